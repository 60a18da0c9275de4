#include "gated/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>

#include "gated/backprop.hpp"
#include "gated/cog.hpp"
#include "gated/dataset.hpp"
#include "gated/errors.hpp"
#include "gated/random_net.hpp"

namespace gated {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool regret_within_bound(LearnerKind kind, const GatedRegretReport& pred, const GatedRegretReport& grad,
                         double bound, double slack) {
  if (pred.inactive) return true;
  switch (kind) {
    case LearnerKind::Ogd:
      return grad.value <= bound + slack && pred.certified() <= bound + slack;
    case LearnerKind::Nprop:
      return pred.certified() <= bound + slack;
    case LearnerKind::Gd:
      return true;
  }
  return true;
}

namespace {

constexpr std::uint64_t kInitStream = 0x6a09e667f3bcc908ULL;
constexpr std::uint64_t kGateStream = 0xbb67ae8584caa73bULL;
constexpr std::uint64_t kDataStream = 0x3c6ef372fe94f82bULL;

Ball make_ball(const LearnerSpec& spec, const Eigen::VectorXd& init) {
  Ball b;
  b.diameter = spec.bounds.D;
  if (spec.center_mode == "init") {
    b.center = init;
  } else if (spec.center_mode == "explicit") {
    b.center = spec.center;
  } else {
    b.center = Eigen::VectorXd::Zero(init.size());
  }
  return b;
}

struct CogRuntime {
  UnitId unit = 0;
  bool maxout = false;
  std::unique_ptr<CogPolicy> policy;
};

CogRuntime make_cog(const ExperimentConfig& config) {
  CogRuntime rt;
  rt.unit = *config.dag.find(config.cog->unit);
  const auto& kind = config.dag.kind(rt.unit);
  rt.maxout = kind.type == UnitType::Maxout;
  std::vector<CogFunction> fs;
  std::vector<std::string> names;
  if (rt.maxout) {
    for (int c = 0; c < kind.arity; ++c) {
      fs.push_back([c](const ContextKey&) { return Subset{1} << c; });
      names.push_back("component" + std::to_string(c));
    }
  } else {
    fs.push_back([](const ContextKey&) { return Subset{1}; });
    names.push_back("always");
    fs.push_back([](const ContextKey&) { return Subset{0}; });
    names.push_back("never");
  }
  rt.policy = std::make_unique<CogPolicy>(fs, names, config.cog->epsilon, config.cog->seed ^ config.seed);
  return rt;
}

json vec(const Eigen::VectorXd& v) { return vector_to_json(v); }

json regret_json(const GatedRegretReport& r) {
  return {{"t_j", r.t_j},
          {"inactive", r.inactive},
          {"value", r.value},
          {"residual", r.residual},
          {"certified_value", r.certified()},
          {"played", r.played},
          {"comparator", vec(r.comparator.w)},
          {"comparator_loss", r.comparator.cumulative},
          {"exact", r.comparator.exact},
          {"converged", r.comparator.converged}};
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config, const std::string& out_dir, const RoundObserver& observer) {
  const Dag& dag = config.dag;
  const auto ids = dag.players();
  const std::size_t P = ids.size();
  const long T = config.rounds;
  const int m = config.minibatch;
  const double inv_m = 1.0 / static_cast<double>(m);

  const std::uint64_t data_seed = config.dataset.seed.value_or(config.seed ^ kDataStream);
  const auto data = generate_dataset(config.dataset, T * m + 1, data_seed);

  Rng init_rng(config.seed ^ kInitStream);
  WeightState weights = random_weights(dag, init_rng, config.init_scale);
  Rng gate_rng(config.gate.seed ^ (config.seed * kGateStream));

  RunSummary summary;
  summary.signal.players = ids;
  std::vector<Learner> learners;
  learners.reserve(P);
  for (std::size_t p = 0; p < P; ++p) {
    const std::string name = dag.player_name(ids[p]);
    const auto& spec = config.learner_for(name);
    const Eigen::VectorXd init = weights.of(ids[p]);
    learners.emplace_back(spec.kind, init, spec.bounds, make_ball(spec, init), spec.eta);
    weights.of(ids[p]) = learners.back().weights();

    PlayerSummary ps;
    ps.name = name;
    ps.id = ids[p];
    ps.d = static_cast<long>(init.size());
    ps.kind = spec.kind;
    ps.bounds = spec.bounds;
    ps.ball = learners.back().ball();
    ps.eta = spec.eta;
    ps.initial_weights = learners.back().weights();
    summary.players.push_back(std::move(ps));
  }

  std::optional<CogRuntime> cog;
  if (config.cog) {
    cog = make_cog(config);
    summary.cog.enabled = true;
    summary.cog.names = cog->policy->names;
    summary.cog.chosen.assign(cog->policy->functions.size(), 0);
  }

  std::ofstream metrics, samples, signal_out;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    metrics.open(out_dir + "/metrics.csv");
    samples.open(out_dir + "/samples.csv");
    signal_out.open(out_dir + "/signal.jsonl");
    if (!metrics || !samples || !signal_out) throw ConfigError("cannot write to output directory '" + out_dir + "'");
    metrics << "round,unit_id,active,network_loss,delta,grad_norm,running_gated_regret,bound_value\n";
    samples << "round,sample";
    for (Eigen::Index i = 0; i < data.front().x.size(); ++i) samples << ",x" << i;
    for (Eigen::Index i = 0; i < data.front().y.size(); ++i) samples << ",y" << i;
    for (std::size_t k = 0; k < dag.outputs().size(); ++k) samples << ",out" << k;
    samples << ",loss\n";
  }

  std::vector<RunningLinearRegret> running;
  for (std::size_t p = 0; p < P; ++p) running.emplace_back(learners[p].ball());
  std::vector<double> max_r(P, 0.0);

  for (long t = 0; t < T; ++t) {
    RoundRecord rec;
    rec.t = t;
    GateOverrides overrides;
    const GateOverrides* forced = nullptr;
    std::optional<CogChoice> choice;
    ContextKey context;

    std::vector<Eigen::VectorXd> grads(P);
    std::vector<double> loss_sum(P, 0.0), delta_sum(P, 0.0);
    std::vector<bool> any(P, false);
    for (std::size_t p = 0; p < P; ++p) grads[p] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(summary.players[p].d));
    double round_loss = 0.0;

    for (int s = 0; s < m; ++s) {
      const Example& ex = data[static_cast<std::size_t>(t * m + s)];
      set_input(dag, weights, ex.x);

      if (cog && s == 0) {
        Rng unused(0);
        const auto probe = evaluate(dag, weights, GateSpec{}, unused);
        std::vector<double> pre;
        for (const auto& w : weights.w[cog->unit]) pre.push_back(w.dot(probe.trace.in[cog->unit]));
        context = make_context(pre, ex.x.norm(), config.cog->norm_max);
        choice = cog_select(*cog->policy, context);
        if (cog->maxout) {
          int c = 0;
          while (!((choice->subset >> c) & 1U)) ++c;
          overrides[cog->unit] = c;
        } else {
          overrides[cog->unit] = choice->subset != 0 ? 1 : 0;
        }
        forced = &overrides;
      }

      const ActiveSet active = compute_active_set(dag, weights, config.gate, gate_rng, forced);
      const ForwardTrace trace = feedforward(dag, weights, active);
      const double L = loss_eval(config.loss, trace.net_out, ex.y);
      const Eigen::VectorXd g = loss_grad_out(config.loss, trace.net_out, ex.y);
      const BackpropTrace bp = backprop(dag, weights, active, trace, g);
      const Eigen::MatrixXd sens = output_sensitivity(dag, weights, active, trace);

      SampleRecord sr{ex.x, ex.y, active, trace.net_out, L, {}};
      for (std::size_t p = 0; p < P; ++p) {
        const PlayerId id = ids[p];
        PlayerSample ps;
        ps.active = active.player_active(id);
        if (ps.active) {
          const UnitId u = id.unit;
          ps.delta = bp.delta[u];
          ps.input = trace.in[u];
          ps.c1 = sens.row(static_cast<Eigen::Index>(u)).transpose();
          ps.c2 = trace.net_out - ps.c1 * trace.pre[u];
          grads[p] += inv_m * bp.grad_of(id);
          loss_sum[p] += inv_m * L;
          delta_sum[p] += inv_m * ps.delta;
          any[p] = true;
          auto& sum = summary.players[p];
          sum.max_delta = std::max(sum.max_delta, std::abs(ps.delta));
          sum.max_input = std::max(sum.max_input, ps.input.norm());
          if (config.loss.kind == LossKind::MeanSquaredError) {
            const Ball& ball = learners[p].ball();
            const double r = (ps.c1 * ball.center.dot(ps.input) + ps.c2 - ex.y).norm() +
                             ps.c1.norm() * ball.radius() * ps.input.norm();
            max_r[p] = std::max(max_r[p], r);
          }
        }
        sr.players.push_back(std::move(ps));
      }
      round_loss += inv_m * L;

      if (samples.is_open()) {
        samples << t << ',' << s;
        for (Eigen::Index i = 0; i < ex.x.size(); ++i) samples << ',' << format_double(ex.x[i]);
        for (Eigen::Index i = 0; i < ex.y.size(); ++i) samples << ',' << format_double(ex.y[i]);
        for (Eigen::Index i = 0; i < trace.net_out.size(); ++i) samples << ',' << format_double(trace.net_out[i]);
        samples << ',' << format_double(L) << '\n';
      }
      rec.samples.push_back(std::move(sr));
    }

    if (cog) {
      CogRound cr{context, choice->subset, choice->probability, std::nullopt};
      if (choice->subset != 0) cr.observed_loss = round_loss;
      cog_update(*cog->policy, cr);
      rec.cog = CogDecision{context.str(),   choice->function, choice->subset,
                            choice->probability, choice->explored, cr.observed_loss.value_or(0.0)};
      ++summary.cog.chosen[static_cast<std::size_t>(choice->function)];
      summary.cog.explored += choice->explored ? 1 : 0;
      summary.cog.observed += cr.observed_loss ? 1 : 0;
    }

    std::vector<Learner> before;
    if (observer) before = learners;
    for (std::size_t p = 0; p < P; ++p) {
      PlayerRound pr;
      pr.active = any[p];
      pr.weights = learners[p].weights();
      pr.grad = grads[p];
      if (any[p]) {
        pr.loss_pred = loss_sum[p];
        pr.loss_grad = grads[p].dot(pr.weights);
        try {
          learners[p].step(grads[p]);
        } catch (const NumericalError& e) {
          throw NumericalError("round " + std::to_string(t) + ", player " + summary.players[p].name + ": " + e.what());
        }
        weights.of(ids[p]) = learners[p].weights();
        running[p].add(grads[p], pr.weights);
        if (const auto* n = learners[p].nprop()) {
          summary.players[p].max_inverse_drift = std::max(summary.players[p].max_inverse_drift, inverse_drift(*n));
        }
      }
      if (metrics.is_open()) {
        metrics << t << ',' << summary.players[p].name << ',' << (any[p] ? 1 : 0) << ',' << format_double(round_loss)
                << ',' << format_double(delta_sum[p]) << ',' << format_double(grads[p].norm()) << ','
                << format_double(running[p].value()) << ',' << format_double(learners[p].bound(running[p].t_j()))
                << '\n';
      }
      rec.players.push_back(std::move(pr));
    }
    summary.network_loss.push_back(round_loss);
    if (signal_out.is_open()) write_round(signal_out, rec);
    summary.signal.rounds.push_back(std::move(rec));
    if (observer) observer({summary.signal.rounds.back(), before, learners});
  }

  // Analyses over the completed signal.
  const double slack = config.tolerances.bound_slack;
  for (std::size_t p = 0; p < P; ++p) {
    auto& ps = summary.players[p];
    const Ball& ball = learners[p].ball();
    ps.pred = gated_regret(summary.signal, p, ball, GameMode::Pred, config.loss);
    ps.grad = gated_regret(summary.signal, p, ball, GameMode::Grad, config.loss);
    ps.eps_pred = cce_epsilon(summary.signal, p, ball, GameMode::Pred, config.loss);
    ps.eps_grad = cce_epsilon(summary.signal, p, ball, GameMode::Grad, config.loss);
    ps.t_j = ps.pred.t_j;
    ps.bound = learners[p].bound(ps.t_j);
    ps.final_weights = learners[p].weights();
    if (const auto* n = learners[p].nprop()) ps.reinversions = n->reinversions;
    if (const auto* g = learners[p].gd()) ps.binding = g->binding;
    if (config.loss.kind == LossKind::MeanSquaredError && max_r[p] > 0.0) ps.observed_alpha = mse_exp_concavity(max_r[p]);
    ps.bounds_ok = ps.max_delta <= ps.bounds.B && ps.max_input <= ps.bounds.G;
    if (ps.kind == LearnerKind::Nprop && config.loss.kind == LossKind::MeanSquaredError && ps.t_j > 0) {
      ps.bounds_ok = ps.bounds_ok && ps.bounds.alpha <= ps.observed_alpha;
    }
    ps.bound_pass = regret_within_bound(ps.kind, ps.pred, ps.grad, ps.bound, slack);
    if (ps.t_j > 0) {
      summary.certified = summary.certified && ps.bounds_ok;
      summary.passed = summary.passed && ps.bound_pass;
    }
  }

  const GameMode cce_mode = config.cce_mode == "pred" ? GameMode::Pred : GameMode::Grad;
  for (long c : config.checkpoints) {
    if (c > T) continue;
    Checkpoint cp;
    cp.rounds = c;
    bool seen = false;
    for (std::size_t p = 0; p < P; ++p) {
      const double e = cce_epsilon(summary.signal, p, learners[p].ball(), cce_mode, config.loss, c);
      cp.eps.push_back(e);
      if (summary.signal.active_count(p, c) > 0) {
        cp.max_eps = seen ? std::max(cp.max_eps, e) : e;
        seen = true;
      }
    }
    summary.checkpoints.push_back(std::move(cp));
  }

  const bool all_gd = P > 0 && std::all_of(learners.begin(), learners.end(),
                                           [](const Learner& l) { return l.kind() == LearnerKind::Gd; });
  if (all_gd) {
    auto& gi = summary.gain_identity;
    gi.applicable = true;
    std::vector<Eigen::VectorXd> gain(P);
    for (std::size_t p = 0; p < P; ++p) {
      gain[p] = empirical_gain_grad(summary.signal, p, learners[p].eta(), summary.players[p].initial_weights);
      gi.max_gain_gap = std::max(gi.max_gain_gap, (learners[p].weights() - gain[p]).norm());
      gi.nonbinding = gi.nonbinding && summary.players[p].binding == 0;
    }
    // One more round with the final weights.
    set_input(dag, weights, data[static_cast<std::size_t>(T * m)].x);
    const ActiveSet active = compute_active_set(dag, weights, config.gate, gate_rng);
    const ForwardTrace trace = feedforward(dag, weights, active);
    for (std::size_t p = 0; p < P; ++p) {
      const UnitId u = ids[p].unit;
      const double a = gain[p].dot(trace.in[u]);
      if (active.player_active(ids[p])) {
        const double pre = weights.of(ids[p]).dot(trace.in[u]);
        gi.max_directional_gap = std::max(gi.max_directional_gap, std::abs(a - pre));
      }
      // Units gated off by dropout or an ignoring max-pool are not rectifier outputs.
      if (dag.kind(u).type == UnitType::Rectifier && (active.unit_active[u] || a <= 0.0)) {
        gi.max_rectifier_gap = std::max(gi.max_rectifier_gap, std::abs(trace.out[u] - std::max(0.0, a)));
      }
    }
  }
  if (cog) summary.cog.estimates = cog->policy->estimates;

  if (!out_dir.empty()) {
    std::ofstream out(out_dir + "/summary.json");
    out << summary.to_json(config).dump(2) << '\n';
  }
  return summary;
}

json RunSummary::to_json(const ExperimentConfig& config) const {
  json cfg = config.raw;
  cfg.erase("output");
  cfg["seed"] = config.seed;

  json players_doc = json::array();
  for (const auto& p : players) {
    players_doc.push_back({{"name", p.name},
                           {"unit", p.id.unit},
                           {"component", p.id.component},
                           {"d", p.d},
                           {"learner", to_string(p.kind)},
                           {"eta", p.eta},
                           {"bounds", {{"D", p.bounds.D}, {"B", p.bounds.B}, {"G", p.bounds.G}, {"alpha", p.bounds.alpha}}},
                           {"ball", {{"center", vec(p.ball.center)}, {"diameter", p.ball.diameter}}},
                           {"t_j", p.t_j},
                           {"inactive", p.t_j == 0},
                           {"regret_pred", regret_json(p.pred)},
                           {"regret_grad", regret_json(p.grad)},
                           {"eps_pred", p.eps_pred},
                           {"eps_grad", p.eps_grad},
                           {"bound", p.bound},
                           {"observed", {{"max_delta", p.max_delta}, {"max_input", p.max_input}, {"alpha", p.observed_alpha}}},
                           {"bounds_ok", p.bounds_ok},
                           {"bound_pass", p.bound_pass},
                           {"initial_weights", vec(p.initial_weights)},
                           {"final_weights", vec(p.final_weights)},
                           {"max_inverse_drift", p.max_inverse_drift},
                           {"reinversions", p.reinversions},
                           {"projection_binding", p.binding}});
  }
  json cps = json::array();
  for (const auto& c : checkpoints) cps.push_back({{"rounds", c.rounds}, {"eps", c.eps}, {"max_eps", c.max_eps}});

  json doc = {{"schema_version", kSchemaVersion},
              {"config", cfg},
              {"signal_file", "signal.jsonl"},
              {"rounds", signal.rounds.size()},
              {"players", players_doc},
              {"network_loss", network_loss},
              {"checkpoints", cps},
              {"cce_mode", config.cce_mode},
              {"certified", certified},
              {"passed", passed}};
  if (gain_identity.applicable) {
    doc["gain_identity"] = {{"nonbinding", gain_identity.nonbinding},
                            {"max_gain_gap", gain_identity.max_gain_gap},
                            {"max_directional_gap", gain_identity.max_directional_gap},
                            {"max_rectifier_gap", gain_identity.max_rectifier_gap}};
  }
  if (cog.enabled) {
    doc["cog"] = {{"functions", cog.names},
                  {"estimates", cog.estimates},
                  {"chosen", cog.chosen},
                  {"explored", cog.explored},
                  {"observed", cog.observed}};
  }
  return doc;
}

}  // namespace gated
