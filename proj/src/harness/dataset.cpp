#include "gated/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gated/errors.hpp"

namespace gated {

namespace {

double symmetric(Rng& rng, double scale) { return scale * (2.0 * uniform01(rng) - 1.0); }

int total_inputs(const DatasetSpec& spec) { return spec.inputs + (spec.bias ? 1 : 0); }

}  // namespace

Teacher make_teacher(const DatasetSpec& spec, std::uint64_t seed) {
  Teacher t;
  if (!spec.teacher_dag.is_null()) {
    t.dag = dag_from_json(spec.teacher_dag);
  } else {
    std::vector<UnitId> in, hidden;
    for (int i = 0; i < total_inputs(spec); ++i) in.push_back(t.dag.add_unit("x" + std::to_string(i), UnitKind::source()));
    for (int h = 0; h < spec.hidden; ++h) {
      const UnitId u = t.dag.add_unit("h" + std::to_string(h), UnitKind::rectifier());
      for (UnitId s : in) t.dag.add_edge(s, u);
      hidden.push_back(u);
    }
    for (int o = 0; o < spec.outputs; ++o) {
      const UnitId u = t.dag.add_unit("o" + std::to_string(o), UnitKind::linear());
      for (UnitId h : hidden) t.dag.add_edge(h, u);
      t.dag.add_output(u);
    }
  }
  if (t.dag.sources().size() != static_cast<std::size_t>(total_inputs(spec)) ||
      t.dag.outputs().size() != static_cast<std::size_t>(spec.outputs)) {
    throw ConfigError("dataset: teacher net does not match the input/output sizes");
  }
  Rng rng(seed);
  t.weights = WeightState::zeros(t.dag);
  for (auto& unit : t.weights.w) {
    for (auto& v : unit) {
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = symmetric(rng, spec.scale);
    }
  }
  return t;
}

Eigen::VectorXd teacher_label(const Teacher& teacher, const Eigen::VectorXd& x) {
  WeightState w = teacher.weights;
  set_input(teacher.dag, w, x);
  Rng unused(0);
  return evaluate(teacher.dag, w, GateSpec{}, unused).trace.net_out;
}

std::vector<Example> generate_dataset(const DatasetSpec& spec, long count, std::uint64_t seed) {
  if (count < 0) throw ConfigError("dataset: negative count");
  if (spec.kind == "replay") {
    const auto file = read_dataset_csv(spec.path, total_inputs(spec), spec.outputs);
    if (file.empty()) throw ConfigError("dataset: replay file '" + spec.path + "' has no rows");
    std::vector<Example> out;
    for (long i = 0; i < count; ++i) out.push_back(file[static_cast<std::size_t>(i) % file.size()]);
    return out;
  }

  // Model parameters and samples come from separate streams so that the
  // model does not depend on the sample count.
  Rng model_rng(seed);
  Rng sample_rng(seed ^ 0xd1b54a32d192ed03ULL);
  Teacher teacher;
  Eigen::MatrixXd theta;
  if (spec.kind == "teacher") {
    teacher = make_teacher(spec, model_rng());
  } else {
    theta.resize(spec.outputs, total_inputs(spec));
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta.data()[i] = symmetric(model_rng, spec.scale);
  }

  std::vector<Example> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    Example e;
    e.x.resize(total_inputs(spec));
    for (int k = 0; k < spec.inputs; ++k) e.x[k] = symmetric(sample_rng, 1.0);
    if (spec.bias) e.x[spec.inputs] = 1.0;
    e.y = spec.kind == "teacher" ? teacher_label(teacher, e.x) : Eigen::VectorXd(theta * e.x);
    if (spec.noise > 0.0) {
      for (Eigen::Index k = 0; k < e.y.size(); ++k) e.y[k] += symmetric(sample_rng, spec.noise);
    }
    if (spec.labels == "sign") {
      for (Eigen::Index k = 0; k < e.y.size(); ++k) e.y[k] = e.y[k] >= 0.0 ? 1.0 : -1.0;
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_dataset_csv(std::ostream& out, const std::vector<Example>& data) {
  if (data.empty()) return;
  std::string header;
  for (Eigen::Index i = 0; i < data.front().x.size(); ++i) header += (i ? ",x" : "x") + std::to_string(i);
  for (Eigen::Index i = 0; i < data.front().y.size(); ++i) header += ",y" + std::to_string(i);
  out << header << '\n';
  char buf[64];
  for (const auto& e : data) {
    std::string line;
    for (Eigen::Index i = 0; i < e.x.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", e.x[i]);
      line += buf;
    }
    for (Eigen::Index i = 0; i < e.y.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g", e.y[i]);
      line += buf;
    }
    out << line << '\n';
  }
}

std::vector<Example> read_dataset_csv(const std::string& path, int inputs, int outputs) {
  std::ifstream in(path);
  if (!in) throw ConfigError("dataset: cannot read replay file '" + path + "'");
  std::string line;
  std::getline(in, line);  // header
  std::vector<Example> data;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        cells.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("dataset: " + path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (cells.size() != static_cast<std::size_t>(inputs + outputs)) {
      throw ConfigError("dataset: " + path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(inputs + outputs) + " columns");
    }
    Example e;
    e.x = Eigen::Map<Eigen::VectorXd>(cells.data(), inputs);
    e.y = Eigen::Map<Eigen::VectorXd>(cells.data() + inputs, outputs);
    data.push_back(std::move(e));
  }
  return data;
}

}  // namespace gated
