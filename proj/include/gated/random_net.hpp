#pragma once

#include "gated/dag.hpp"
#include "gated/network.hpp"

namespace gated {

/// Shape of the random networks used by the oracle sweeps and `oracle-check`.
struct RandomNetOptions {
  int min_sources = 1;
  int max_sources = 3;
  int min_hidden = 1;
  int max_hidden = 8;  // non-source units, outputs included
  int max_outputs = 2;
  int max_fan_in = 3;
  bool maxout = true;
  bool max_pool = true;
  bool shared_groups = true;
  double weight_scale = 1.0;
};

/// Random layered DAG: every non-source unit draws its predecessors from
/// earlier units, so the result is acyclic and every unit is reachable.
Dag random_dag(Rng& rng, const RandomNetOptions& opts = {});

/// Weights uniform on [-scale, scale], inputs uniform on [-1, 1].
WeightState random_weights(const Dag& dag, Rng& rng, double scale = 1.0);

}  // namespace gated
