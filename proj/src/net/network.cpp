#include "gated/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gated {

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

WeightState WeightState::zeros(const Dag& dag) {
  WeightState s;
  s.w.resize(dag.size());
  for (UnitId u = 0; u < dag.size(); ++u) {
    const int k = dag.kind(u).players();
    s.w[u].assign(static_cast<std::size_t>(k), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dag.indegree(u))));
  }
  s.input = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dag.sources().size()));
  return s;
}

bool GateSpec::deterministic() const {
  auto positive = [](double p) { return p > 0.0; };
  return std::none_of(dropout.begin(), dropout.end(), positive) &&
         std::none_of(dropconnect.begin(), dropconnect.end(), positive);
}

bool ActiveSet::player_active(PlayerId p) const {
  if (!unit_active.at(p.unit)) return false;
  const int winner = maxout_winner.at(p.unit);
  return winner < 0 || winner == p.component;
}

std::vector<UnitId> ActiveSet::active_units() const {
  std::vector<UnitId> out;
  for (UnitId u = 0; u < unit_active.size(); ++u) {
    if (unit_active[u]) out.push_back(u);
  }
  return out;
}

void set_input(const Dag& dag, WeightState& weights, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != dag.sources().size()) {
    throw std::invalid_argument("set_input: input has " + std::to_string(x.size()) + " entries, dag has " +
                                std::to_string(dag.sources().size()) + " sources");
  }
  weights.input = x;
}

std::vector<Eigen::VectorXd> copy_inputs(const Dag& dag, const ActiveSet& active, const std::vector<double>& out,
                                         UnitId u) {
  const auto& edges = dag.edges();
  if (!dag.kind(u).is_shared_group()) {
    const auto& in = dag.in_edges(u);
    Eigen::VectorXd v(static_cast<Eigen::Index>(in.size()));
    for (std::size_t p = 0; p < in.size(); ++p) {
      const EdgeId e = in[p];
      v[static_cast<Eigen::Index>(p)] = active.edge_keep[e] ? out[edges[e].from] : 0.0;
    }
    return {std::move(v)};
  }
  std::vector<Eigen::VectorXd> copies;
  for (const auto& tuple : dag.group_copies(u)) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(tuple.size()));
    for (std::size_t p = 0; p < tuple.size(); ++p) {
      const auto e = dag.edge_between(tuple[p], u);
      v[static_cast<Eigen::Index>(p)] = (e && active.edge_keep[*e]) ? out[tuple[p]] : 0.0;
    }
    copies.push_back(std::move(v));
  }
  return copies;
}

namespace {

ActiveSet empty_set(const Dag& dag) {
  const std::size_t n = dag.size();
  ActiveSet s;
  s.unit_active.assign(n, false);
  s.maxout_winner.assign(n, -1);
  s.pool_winner.assign(n, -1);
  s.group_active.assign(n, {});
  s.dropout_keep.assign(n, true);
  s.edge_keep.assign(dag.edges().size(), true);
  return s;
}

void track(double& margin, double gap, double scale) {
  margin = std::min(margin, std::abs(gap) / (1.0 + std::abs(scale)));
}

// Gating induction with masks already present in `s`. Fills the remaining
// decisions and, when requested, the smallest boundary margin.
void sweep(const Dag& dag, const WeightState& weights, ActiveSet& s, const GateOverrides* overrides,
           double* margin_out) {
  const std::size_t n = dag.size();
  std::vector<double> out(n, 0.0);
  double margin = std::numeric_limits<double>::infinity();
  const auto& edges = dag.edges();

  for (UnitId u : dag.topological_order()) {
    const auto& kind = dag.kind(u);
    if (kind.is_source()) {
      s.unit_active[u] = true;
      out[u] = weights.input[static_cast<Eigen::Index>(dag.source_slot(u))];
      continue;
    }
    if (!s.dropout_keep[u]) continue;

    std::optional<int> forced;
    if (overrides) {
      if (auto it = overrides->find(u); it != overrides->end()) forced = it->second;
    }

    switch (kind.type) {
      case UnitType::Linear:
      case UnitType::Rectifier: {
        const double a = weights.w[u][0].dot(copy_inputs(dag, s, out, u)[0]);
        bool on = true;
        if (forced) {
          on = *forced != 0;
        } else if (kind.type == UnitType::Rectifier) {
          on = a > 0.0;
          track(margin, a, a);
        }
        s.unit_active[u] = on;
        out[u] = on ? a : 0.0;
        break;
      }
      case UnitType::Maxout: {
        const Eigen::VectorXd in = copy_inputs(dag, s, out, u)[0];
        int best = 0;
        std::vector<double> score(static_cast<std::size_t>(kind.arity));
        for (int c = 0; c < kind.arity; ++c) {
          score[static_cast<std::size_t>(c)] = weights.w[u][static_cast<std::size_t>(c)].dot(in);
          if (score[static_cast<std::size_t>(c)] > score[static_cast<std::size_t>(best)]) best = c;
        }
        if (forced) {
          if (*forced < 0 || *forced >= kind.arity) throw std::out_of_range("gate override: bad maxout component");
          best = *forced;
        } else {
          for (int c = 0; c < kind.arity; ++c) {
            if (c != best) track(margin, score[static_cast<std::size_t>(best)] - score[static_cast<std::size_t>(c)],
                                 score[static_cast<std::size_t>(best)]);
          }
        }
        s.unit_active[u] = true;
        s.maxout_winner[u] = best;
        out[u] = score[static_cast<std::size_t>(best)];
        break;
      }
      case UnitType::MaxPool: {
        long winner = -1;
        for (EdgeId e : dag.in_edges(u)) {
          const UnitId from = edges[e].from;
          if (!s.edge_keep[e] || !s.unit_active[from]) continue;
          if (winner < 0 || out[from] > out[static_cast<std::size_t>(winner)] ||
              (out[from] == out[static_cast<std::size_t>(winner)] && from < static_cast<UnitId>(winner))) {
            winner = static_cast<long>(from);
          }
        }
        if (winner >= 0) {
          for (EdgeId e : dag.in_edges(u)) {
            const UnitId from = edges[e].from;
            if (s.edge_keep[e] && s.unit_active[from] && from != static_cast<UnitId>(winner)) {
              track(margin, out[static_cast<std::size_t>(winner)] - out[from], out[static_cast<std::size_t>(winner)]);
            }
          }
          s.unit_active[u] = true;
          s.pool_winner[u] = winner;
          out[u] = out[static_cast<std::size_t>(winner)];
        }
        break;
      }
      case UnitType::SharedLinearGroup:
      case UnitType::SharedRectifierGroup: {
        const auto copies = copy_inputs(dag, s, out, u);
        const auto& w = weights.w[u][0];
        auto& on = s.group_active[u];
        on.assign(copies.size(), false);
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(w.size());
        bool any = false;
        for (std::size_t c = 0; c < copies.size(); ++c) {
          const double pre = w.dot(copies[c]);
          bool copy_on = true;
          if (forced) {
            copy_on = *forced != 0;
          } else if (kind.type == UnitType::SharedRectifierGroup) {
            copy_on = pre > 0.0;
            track(margin, pre, pre);
          }
          on[c] = copy_on;
          if (copy_on) {
            sum += copies[c];
            any = true;
          }
        }
        s.unit_active[u] = any;
        out[u] = any ? w.dot(sum) : 0.0;
        if (!any) on.assign(copies.size(), false);
        break;
      }
      case UnitType::Source:
        break;
    }
  }

  // Units ignored by every max-pool they feed contribute nothing downstream.
  for (UnitId u = 0; u < n; ++u) {
    if (!s.unit_active[u] || dag.kind(u).is_source() || dag.output_slot(u)) continue;
    const auto& outs = dag.out_edges(u);
    if (outs.empty()) continue;
    const bool ignored = std::all_of(outs.begin(), outs.end(), [&](EdgeId e) {
      const UnitId v = edges[e].to;
      return dag.kind(v).type == UnitType::MaxPool && s.pool_winner[v] != static_cast<long>(u);
    });
    if (ignored) {
      s.unit_active[u] = false;
      s.maxout_winner[u] = -1;
      if (!s.group_active[u].empty()) s.group_active[u].assign(s.group_active[u].size(), false);
    }
  }
  if (margin_out) *margin_out = margin;
}

}  // namespace

ActiveSet compute_active_set(const Dag& dag, const WeightState& weights, const GateSpec& gate, Rng& rng,
                             const GateOverrides* overrides) {
  ActiveSet s = empty_set(dag);
  for (UnitId u = 0; u < dag.size(); ++u) {
    const double p = gate.dropout_of(u);
    if (!dag.kind(u).is_source() && p > 0.0) s.dropout_keep[u] = !(uniform01(rng) < p);
  }
  for (EdgeId e = 0; e < dag.edges().size(); ++e) {
    const double p = gate.dropconnect_of(e);
    if (p > 0.0) s.edge_keep[e] = !(uniform01(rng) < p);
  }
  sweep(dag, weights, s, overrides, nullptr);
  return s;
}

ForwardTrace feedforward(const Dag& dag, const WeightState& weights, const ActiveSet& active) {
  const std::size_t n = dag.size();
  ForwardTrace t;
  t.pre.assign(n, 0.0);
  t.out.assign(n, 0.0);
  t.in.assign(n, Eigen::VectorXd());
  t.component_pre.assign(n, {});

  for (UnitId u : dag.topological_order()) {
    const auto& kind = dag.kind(u);
    if (kind.is_source()) {
      t.out[u] = weights.input[static_cast<Eigen::Index>(dag.source_slot(u))];
      t.pre[u] = t.out[u];
      continue;
    }
    const auto copies = copy_inputs(dag, active, t.out, u);
    if (kind.is_shared_group()) {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dag.indegree(u)));
      const auto& on = active.group_active[u];
      for (std::size_t c = 0; c < copies.size(); ++c) {
        if (c < on.size() && on[c]) sum += copies[c];
      }
      t.in[u] = std::move(sum);
    } else {
      t.in[u] = copies[0];
    }
    if (!active.unit_active[u]) continue;

    switch (kind.type) {
      case UnitType::Linear:
      case UnitType::Rectifier:
      case UnitType::SharedLinearGroup:
      case UnitType::SharedRectifierGroup:
        // Inside the active region a rectifier is the identity on its
        // pre-activation, so the gated sweep is linear.
        t.pre[u] = weights.w[u][0].dot(t.in[u]);
        t.out[u] = t.pre[u];
        if (kind.is_shared_group()) {
          for (std::size_t c = 0; c < copies.size(); ++c) {
            t.component_pre[u].push_back(active.group_active[u][c] ? weights.w[u][0].dot(copies[c]) : 0.0);
          }
        }
        break;
      case UnitType::Maxout: {
        const int winner = active.maxout_winner[u];
        for (int c = 0; c < kind.arity; ++c) {
          t.component_pre[u].push_back(weights.w[u][static_cast<std::size_t>(c)].dot(t.in[u]));
        }
        t.pre[u] = t.component_pre[u][static_cast<std::size_t>(winner)];
        t.out[u] = t.pre[u];
        break;
      }
      case UnitType::MaxPool:
        t.pre[u] = t.out[static_cast<std::size_t>(active.pool_winner[u])];
        t.out[u] = t.pre[u];
        break;
      case UnitType::Source:
        break;
    }
  }

  t.net_out.resize(static_cast<Eigen::Index>(dag.outputs().size()));
  for (std::size_t k = 0; k < dag.outputs().size(); ++k) {
    t.net_out[static_cast<Eigen::Index>(k)] = t.out[dag.outputs()[k]];
  }
  return t;
}

Evaluation evaluate(const Dag& dag, const WeightState& weights, const GateSpec& gate, Rng& rng,
                    const GateOverrides* overrides) {
  Evaluation e;
  e.active = compute_active_set(dag, weights, gate, rng, overrides);
  e.trace = feedforward(dag, weights, e.active);
  return e;
}

double gating_margin(const Dag& dag, const WeightState& weights, const ActiveSet& active) {
  ActiveSet s = empty_set(dag);
  s.dropout_keep = active.dropout_keep;
  s.edge_keep = active.edge_keep;
  double margin = 0.0;
  sweep(dag, weights, s, nullptr, &margin);
  return margin;
}

}  // namespace gated
