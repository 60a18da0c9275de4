#pragma once

// Small hand-built nets shared by the unit tests.

#include "gated/dag.hpp"
#include "gated/network.hpp"

namespace gated::testing {

// x → h1, x → h2 (rectifiers), h1 → o, h2 → o (linear output).
struct Diamond {
  Dag dag;
  UnitId x, h1, h2, o;
  WeightState w;

  Diamond(double x_val = 1.0, double wx1 = 1.0, double wx2 = -1.0, double w1o = 2.0, double w2o = 3.0) {
    x = dag.add_unit("x", UnitKind::source());
    h1 = dag.add_unit("h1", UnitKind::rectifier());
    h2 = dag.add_unit("h2", UnitKind::rectifier());
    o = dag.add_unit("o", UnitKind::linear());
    dag.add_edge(x, h1);
    dag.add_edge(x, h2);
    dag.add_edge(h1, o);
    dag.add_edge(h2, o);
    dag.add_output(o);
    w = WeightState::zeros(dag);
    w.input << x_val;
    w.w[h1][0] << wx1;
    w.w[h2][0] << wx2;
    w.w[o][0] << w1o, w2o;
  }
};

// x → h → o, all linear.
struct Chain {
  Dag dag;
  UnitId x, h, o;
  WeightState w;

  Chain(double x_val = 2.0, double wxh = 3.0, double who = -1.0) {
    x = dag.add_unit("x", UnitKind::source());
    h = dag.add_unit("h", UnitKind::linear());
    o = dag.add_unit("o", UnitKind::linear());
    dag.add_edge(x, h);
    dag.add_edge(h, o);
    dag.add_output(o);
    w = WeightState::zeros(dag);
    w.input << x_val;
    w.w[h][0] << wxh;
    w.w[o][0] << who;
  }
};

inline ActiveSet gate_of(const Dag& dag, const WeightState& w, const GateSpec& gate = {}) {
  Rng rng(gate.seed);
  return compute_active_set(dag, w, gate, rng);
}

}  // namespace gated::testing
