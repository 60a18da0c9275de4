#include "gated/verify.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "gated/config.hpp"
#include "gated/errors.hpp"
#include "gated/experiment.hpp"
#include "gated/regret.hpp"

namespace gated {

bool VerifyReport::passed() const {
  for (const auto& c : checks) {
    if (!c.skipped && !c.passed) return false;
  }
  return true;
}

void VerifyReport::print(std::ostream& out) const {
  for (const auto& c : checks) {
    out << (c.skipped ? "SKIP" : c.passed ? "PASS" : "FAIL") << "  " << c.name << " [" << c.subject << "]";
    if (!c.detail.empty()) out << "  " << c.detail;
    out << '\n';
  }
}

namespace {

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b))); }

std::string show(double v) { return format_double(v); }

}  // namespace

VerifyReport verify_summary(const std::string& summary_path) {
  const json summary = load_json_file(summary_path);
  const auto dir = std::filesystem::path(summary_path).parent_path();
  return verify_summary(summary, (dir / summary.value("signal_file", std::string("signal.jsonl"))).string());
}

VerifyReport verify_summary(const json& summary, const std::string& signal_path) {
  VerifyReport rep;
  auto add = [&](std::string name, std::string subject, bool ok, std::string detail = {}) {
    rep.checks.push_back({std::move(name), std::move(subject), ok, false, std::move(detail)});
  };
  auto skip = [&](std::string name, std::string subject, std::string detail) {
    rep.checks.push_back({std::move(name), std::move(subject), true, true, std::move(detail)});
  };

  ExperimentConfig config;
  Signal signal;
  try {
    config = config_from_json(summary.at("config"));
    std::ifstream in(signal_path);
    if (!in) throw ConfigError("cannot open signal file '" + signal_path + "'");
    signal.rounds = read_rounds(in);
    signal.players = config.dag.players();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("summary: ") + e.what());
  }
  const auto& players = summary.at("players");
  const double tol = config.tolerances.identity;
  const double slack = config.tolerances.bound_slack;

  add("round count", "run", static_cast<long>(signal.rounds.size()) == summary.at("rounds").get<long>(),
      std::to_string(signal.rounds.size()) + " rounds logged");

  for (std::size_t p = 0; p < signal.players.size(); ++p) {
    const auto& doc = players.at(p);
    const std::string name = doc.at("name").get<std::string>();
    Ball ball;
    ball.center = vector_from_json(doc.at("ball").at("center"));
    ball.diameter = doc.at("ball").at("diameter").get<double>();
    Bounds bounds;
    bounds.D = doc.at("bounds").at("D").get<double>();
    bounds.B = doc.at("bounds").at("B").get<double>();
    bounds.G = doc.at("bounds").at("G").get<double>();
    bounds.alpha = doc.at("bounds").at("alpha").get<double>();
    const LearnerKind kind = learner_kind_from_string(doc.at("learner").get<std::string>());

    // Gating contract and replay consistency, round by round.
    bool contract = true, replay = true;
    std::string contract_detail, replay_detail;
    double max_delta = 0.0, max_input = 0.0;
    for (std::size_t t = 0; t < signal.rounds.size(); ++t) {
      const auto& r = signal.rounds[t];
      const auto& pr = r.players.at(p);
      if (!pr.active) {
        const bool zero_grad = pr.grad.isZero(0.0) && pr.loss_pred == 0.0 && pr.loss_grad == 0.0;
        bool zero_delta = true;
        for (const auto& s : r.samples) zero_delta = zero_delta && !s.players.at(p).active && s.players[p].delta == 0.0;
        const bool unchanged = t + 1 >= signal.rounds.size() || signal.rounds[t + 1].players.at(p).weights == pr.weights;
        if (!(zero_grad && zero_delta && unchanged) && contract) {
          contract = false;
          contract_detail = "round " + std::to_string(t);
        }
        continue;
      }
      for (const auto& s : r.samples) {
        const auto& ps = s.players.at(p);
        if (!ps.active) continue;
        max_delta = std::max(max_delta, std::abs(ps.delta));
        max_input = std::max(max_input, ps.input.norm());
      }
      const double replayed = replay_loss_pred(r, p, pr.weights, config.loss);
      if (!close(replayed, pr.loss_pred, tol) && replay) {
        replay = false;
        replay_detail = "round " + std::to_string(t) + ": " + show(replayed) + " vs " + show(pr.loss_pred);
      }
    }
    add("gating contract", name, contract, contract_detail);
    add("replay consistency", name, replay, replay_detail);

    const auto pred = gated_regret(signal, p, ball, GameMode::Pred, config.loss);
    const auto grad = gated_regret(signal, p, ball, GameMode::Grad, config.loss);
    add("active rounds", name, pred.t_j == doc.at("t_j").get<long>(), "T_j=" + std::to_string(pred.t_j));
    if (pred.inactive) {
      skip("regret bound", name, "inactive");
      continue;
    }
    const auto& rp = doc.at("regret_pred");
    const auto& rg = doc.at("regret_grad");
    add("regret recomputed (pred)", name, close(pred.value, rp.at("value").get<double>(), tol),
        show(pred.value) + " vs " + show(rp.at("value").get<double>()));
    add("regret recomputed (grad)", name, close(grad.value, rg.at("value").get<double>(), tol),
        show(grad.value) + " vs " + show(rg.at("value").get<double>()));
    const double eps_pred = cce_epsilon(signal, p, ball, GameMode::Pred, config.loss);
    const double eps_grad = cce_epsilon(signal, p, ball, GameMode::Grad, config.loss);
    add("epsilon equals regret (pred)", name, std::abs(eps_pred - pred.value) < tol,
        "|diff|=" + show(std::abs(eps_pred - pred.value)));
    add("epsilon equals regret (grad)", name, std::abs(eps_grad - grad.value) < tol,
        "|diff|=" + show(std::abs(eps_grad - grad.value)));
    add("epsilon recomputed", name,
        close(eps_pred, doc.at("eps_pred").get<double>(), tol) && close(eps_grad, doc.at("eps_grad").get<double>(), tol));

    bool bounds_ok = max_delta <= bounds.B && max_input <= bounds.G;
    std::string detail = "max|delta|=" + show(max_delta) + " max|x|=" + show(max_input);
    const double alpha_obs = doc.at("observed").at("alpha").get<double>();
    if (kind == LearnerKind::Nprop && config.loss.kind == LossKind::MeanSquaredError) {
      bounds_ok = bounds_ok && bounds.alpha <= alpha_obs;
      detail += " alpha_obs=" + show(alpha_obs);
    }
    if (kind == LearnerKind::Gd) {
      skip("bounds respected", name, "plain gradient descent carries no bound");
      skip("regret bound", name, "plain gradient descent carries no bound");
      continue;
    }
    add("bounds respected", name, bounds_ok, detail);
    const long d = static_cast<long>(ball.center.size());
    const double bound = kind == LearnerKind::Ogd ? ogd_regret_bound(bounds, pred.t_j)
                                                  : nprop_regret_bound(bounds, d, pred.t_j);
    if (!bounds_ok) {
      skip("regret bound", name, "uncertified: observed maxima exceed the configured bounds");
      continue;
    }
    add("regret bound", name, regret_within_bound(kind, pred, grad, bound, slack),
        "pred=" + show(pred.certified()) + " grad=" + show(grad.value) + " bound=" + show(bound));
  }

  // Checkpoints: recompute and require a non-increasing sequence up to jitter.
  const GameMode mode = config.cce_mode == "pred" ? GameMode::Pred : GameMode::Grad;
  double prev = 0.0;
  bool first = true;
  for (const auto& cp : summary.at("checkpoints")) {
    const long c = cp.at("rounds").get<long>();
    double worst = 0.0;
    bool seen = false;
    for (std::size_t p = 0; p < signal.players.size(); ++p) {
      if (signal.active_count(p, c) == 0) continue;
      Ball ball;
      ball.center = vector_from_json(players.at(p).at("ball").at("center"));
      ball.diameter = players.at(p).at("ball").at("diameter").get<double>();
      const double e = cce_epsilon(signal, p, ball, mode, config.loss, c);
      worst = seen ? std::max(worst, e) : e;
      seen = true;
    }
    const std::string subject = "T=" + std::to_string(c);
    add("checkpoint recomputed", subject, close(worst, cp.at("max_eps").get<double>(), tol), "max eps=" + show(worst));
    if (!first) {
      const double limit = prev + config.tolerances.jitter * std::abs(prev);
      add("checkpoint decrease", subject, worst <= limit, show(worst) + " after " + show(prev));
    }
    prev = worst;
    first = false;
  }

  if (summary.contains("gain_identity")) {
    const auto& gi = summary.at("gain_identity");
    add("projection non-binding", "run", gi.at("nonbinding").get<bool>());
    double gap = 0.0;
    for (std::size_t p = 0; p < signal.players.size(); ++p) {
      const auto w1 = vector_from_json(players.at(p).at("initial_weights"));
      const auto wT = vector_from_json(players.at(p).at("final_weights"));
      gap = std::max(gap, (wT - empirical_gain_grad(signal, p, players.at(p).at("eta").get<double>(), w1)).norm());
    }
    const double tol = config.tolerances.gain_identity;
    const double directional = gi.at("max_directional_gap").get<double>();
    const double rectifier = gi.at("max_rectifier_gap").get<double>();
    add("weights equal gain gradient", "run", gap < tol, "max gap=" + show(gap));
    add("directional derivative", "run", directional < tol, "max gap=" + show(directional));
    add("rectifier output", "run", rectifier < tol, "max gap=" + show(rectifier));
  }
  return rep;
}

}  // namespace gated
