#include "gated/backprop.hpp"

#include <algorithm>
#include <cmath>

namespace gated {

BackpropTrace backprop(const Dag& dag, const WeightState& weights, const ActiveSet& active,
                       const ForwardTrace& trace, const Eigen::VectorXd& g) {
  const std::size_t n = dag.size();
  const auto& edges = dag.edges();
  BackpropTrace b;
  b.g = g;
  b.delta.assign(n, 0.0);
  b.grad.resize(n);
  for (UnitId u = 0; u < n; ++u) {
    b.grad[u].assign(static_cast<std::size_t>(dag.kind(u).players()),
                     Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dag.indegree(u))));
  }

  auto order = dag.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const UnitId u = *it;
    if (!active.unit_active[u]) continue;
    double d = 0.0;
    if (auto slot = dag.output_slot(u)) d += g[static_cast<Eigen::Index>(*slot)];
    for (EdgeId e : dag.out_edges(u)) {
      if (!active.edge_keep[e]) continue;
      const UnitId v = edges[e].to;
      const double dv = b.delta[v];
      if (dv == 0.0) continue;
      const auto& kind = dag.kind(v);
      const auto& in = dag.in_edges(v);
      const auto slot = static_cast<Eigen::Index>(std::find(in.begin(), in.end(), e) - in.begin());
      switch (kind.type) {
        case UnitType::Linear:
        case UnitType::Rectifier:
          d += dv * weights.w[v][0][slot];
          break;
        case UnitType::Maxout:
          d += dv * weights.w[v][static_cast<std::size_t>(active.maxout_winner[v])][slot];
          break;
        case UnitType::MaxPool:
          if (active.pool_winner[v] == static_cast<long>(u)) d += dv;
          break;
        case UnitType::SharedLinearGroup:
        case UnitType::SharedRectifierGroup: {
          const auto& copies = dag.group_copies(v);
          for (std::size_t c = 0; c < copies.size(); ++c) {
            if (!active.group_active[v][c]) continue;
            for (std::size_t p = 0; p < copies[c].size(); ++p) {
              if (copies[c][p] == u) d += dv * weights.w[v][0][static_cast<Eigen::Index>(p)];
            }
          }
          break;
        }
        case UnitType::Source:
          break;
      }
    }
    b.delta[u] = d;

    const auto& kind = dag.kind(u);
    if (kind.players() == 0) continue;
    const std::size_t c = kind.type == UnitType::Maxout ? static_cast<std::size_t>(active.maxout_winner[u]) : 0;
    b.grad[u][c] = d * trace.in[u];
  }
  return b;
}

Eigen::MatrixXd output_sensitivity(const Dag& dag, const WeightState& weights, const ActiveSet& active,
                                   const ForwardTrace& trace) {
  const auto k = static_cast<Eigen::Index>(dag.outputs().size());
  Eigen::MatrixXd s(static_cast<Eigen::Index>(dag.size()), k);
  for (Eigen::Index o = 0; o < k; ++o) {
    const auto b = backprop(dag, weights, active, trace, Eigen::VectorXd::Unit(k, o));
    for (UnitId u = 0; u < dag.size(); ++u) s(static_cast<Eigen::Index>(u), o) = b.delta[u];
  }
  return s;
}

AffineForm affine_form(const Dag& dag, const WeightState& weights, const ActiveSet& active,
                       const ForwardTrace& trace, UnitId j) {
  const auto s = output_sensitivity(dag, weights, active, trace);
  AffineForm f;
  f.c1 = s.row(static_cast<Eigen::Index>(j)).transpose();
  f.c2 = trace.net_out - f.c1 * trace.pre[j];
  return f;
}

namespace {

struct Probe {
  double loss;
  ActiveSet active;
};

Probe probe(const Dag& dag, const WeightState& w, const GateSpec& gate, const Eigen::VectorXd& y,
            const LossFn& loss) {
  Rng rng(gate.seed);
  auto ev = evaluate(dag, w, gate, rng);
  return {loss_eval(loss, ev.trace.net_out, y), std::move(ev.active)};
}

}  // namespace

FiniteDiffResult finite_diff_grad(const Dag& dag, const WeightState& weights, const GateSpec& gate,
                                  const Eigen::VectorXd& input, const Eigen::VectorXd& y, const LossFn& loss,
                                  double h, double margin) {
  WeightState w = weights;
  set_input(dag, w, input);
  const Probe base = probe(dag, w, gate, y, loss);

  FiniteDiffResult r;
  r.loss = base.loss;
  r.near_boundary = gating_margin(dag, w, base.active) < margin;
  r.grad.resize(dag.size());
  for (UnitId u = 0; u < dag.size(); ++u) {
    r.grad[u].resize(w.w[u].size());
    for (std::size_t c = 0; c < w.w[u].size(); ++c) {
      auto& v = w.w[u][c];
      Eigen::VectorXd est = Eigen::VectorXd::Zero(v.size());
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double keep = v[i];
        v[i] = keep + h;
        const Probe plus = probe(dag, w, gate, y, loss);
        v[i] = keep - h;
        const Probe minus = probe(dag, w, gate, y, loss);
        v[i] = keep;
        if (!(plus.active == base.active) || !(minus.active == base.active)) r.near_boundary = true;
        est[i] = (plus.loss - minus.loss) / (2.0 * h);
      }
      r.grad[u][c] = std::move(est);
    }
  }
  return r;
}

}  // namespace gated
