#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "gated/config.hpp"
#include "gated/dataset.hpp"
#include "gated/errors.hpp"
#include "gated/experiment.hpp"
#include "gated/oracle_check.hpp"
#include "gated/verify.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfigError = 2;

int run(const std::string& config_path, std::optional<std::uint64_t> seed, std::string out) {
  auto doc = gated::load_json_file(config_path);
  if (seed) doc["seed"] = *seed;
  const auto config = gated::config_from_json(doc);
  if (out.empty()) out = config.output;
  if (out.empty()) throw gated::ConfigError("no output directory: pass --out or set \"output\"");
  const auto summary = gated::run_experiment(config, out);

  std::cout << "rounds " << config.rounds << ", final network loss "
            << gated::format_double(summary.network_loss.back()) << "\n";
  for (const auto& p : summary.players) {
    std::cout << "  " << p.name << "  T_j=" << p.t_j;
    if (p.t_j == 0) {
      std::cout << "  inactive\n";
      continue;
    }
    std::cout << "  regret(pred)=" << gated::format_double(p.pred.certified())
              << "  regret(grad)=" << gated::format_double(p.grad.value);
    if (p.bound > 0.0) std::cout << "  bound=" << gated::format_double(p.bound);
    std::cout << (p.bounds_ok ? "" : "  [bounds exceeded]") << (p.bound_pass ? "" : "  [over bound]") << "\n";
  }
  std::cout << "written to " << out << "\n";
  return summary.certified && summary.passed ? kPass : kFail;
}

int verify(const std::string& path) {
  const auto report = gated::verify_summary(path);
  report.print(std::cout);
  std::cout << (report.passed() ? "all checks passed\n" : "some checks FAILED\n");
  return report.passed() ? kPass : kFail;
}

int oracle(const std::string& path, long trials, std::uint64_t seed) {
  const auto doc = gated::load_json_file(path);
  const auto& dag_doc = doc.contains("dag") ? doc.at("dag") : doc;
  const auto dag = gated::dag_from_json(dag_doc);
  const auto gate = gated::gate_from_json(doc.value("gate", gated::json()), dag);
  const auto settings = doc.value("oracle", gated::json::object());
  trials = settings.value("trials", trials);
  seed = settings.value("seed", seed);
  const auto report = gated::oracle_check(dag, gate, trials, seed, settings.value("scale", 1.0));
  report.print(std::cout);
  std::cout << (report.passed() ? "oracle agreement: PASS\n" : "oracle agreement: FAIL\n");
  return report.passed() ? kPass : kFail;
}

int dataset(const std::string& spec_path, const std::string& out_path) {
  const auto doc = gated::load_json_file(spec_path);
  const auto& spec_doc = doc.contains("dataset") ? doc.at("dataset") : doc;
  // Reuse the config parser for validation by wrapping the spec.
  gated::DatasetSpec spec;
  {
    gated::json wrapper = {{"dataset", spec_doc}};
    const int inputs = spec_doc.value("inputs", 2) + (spec_doc.value("bias", false) ? 1 : 0);
    gated::json units = gated::json::array();
    gated::json edges = gated::json::array();
    for (int i = 0; i < inputs; ++i) {
      units.push_back({{"id", "x" + std::to_string(i)}, {"kind", "source"}});
    }
    gated::json outputs = gated::json::array();
    for (int k = 0; k < spec_doc.value("outputs", 1); ++k) {
      const std::string o = "o" + std::to_string(k);
      units.push_back({{"id", o}, {"kind", "linear"}});
      for (int i = 0; i < inputs; ++i) edges.push_back({"x" + std::to_string(i), o});
      outputs.push_back(o);
    }
    wrapper["dag"] = {{"units", units}, {"edges", edges}, {"outputs", outputs}};
    spec = gated::config_from_json(wrapper).dataset;
  }
  const long count = doc.value("count", spec_doc.value("count", 1000L));
  const std::uint64_t seed = spec.seed.value_or(doc.value("seed", std::uint64_t{0}));
  const auto data = gated::generate_dataset(spec, count, seed);
  std::ofstream out(out_path);
  if (!out) throw gated::ConfigError("cannot write '" + out_path + "'");
  gated::write_dataset_csv(out, data);
  std::cout << "wrote " << data.size() << " examples to " << out_path << "\n";
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gated-game experiments for rectifier networks"};
  app.require_subcommand(1);

  std::string config_path, out_dir, summary_path, spec_path, out_file;
  std::uint64_t seed = 0;
  long trials = 200;

  auto* run_cmd = app.add_subcommand("run", "train a network and write metrics, signal and summary");
  run_cmd->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run_cmd->add_option("--seed", seed, "override the config seed");
  run_cmd->add_option("--out", out_dir, "output directory");

  auto* verify_cmd = app.add_subcommand("verify", "re-check a run summary against its signal");
  verify_cmd->add_option("--summary", summary_path, "summary.json of a run")->required()->check(CLI::ExistingFile);

  std::uint64_t oracle_seed = 1;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "compare the engine with brute-force path sums");
  oracle_cmd->add_option("--config", config_path, "dag or experiment config (JSON)")->required()->check(CLI::ExistingFile);
  oracle_cmd->add_option("--trials", trials, "random weight draws");
  oracle_cmd->add_option("--seed", oracle_seed, "seed for the draws");

  auto* data_cmd = app.add_subcommand("dataset", "generate a dataset CSV");
  data_cmd->add_option("--spec", spec_path, "dataset spec (JSON)")->required()->check(CLI::ExistingFile);
  data_cmd->add_option("--out", out_file, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  try {
    if (*run_cmd) return run(config_path, seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt, out_dir);
    if (*verify_cmd) return verify(summary_path);
    if (*oracle_cmd) return oracle(config_path, trials, oracle_seed);
    if (*data_cmd) return dataset(spec_path, out_file);
  } catch (const gated::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const gated::OracleLimitError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kConfigError;
}
