#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gated/dag.hpp"

namespace gated {

using Rng = std::mt19937_64;

/// Uniform draw on [0, 1) from the top 53 bits; identical across platforms.
double uniform01(Rng& rng);

/// Weight vectors of every player plus the source weights encoding the input.
struct WeightState {
  /// [unit][component] -> weight vector of length indegree(unit).
  std::vector<std::vector<Eigen::VectorXd>> w;
  /// One entry per source unit, in Dag::sources() order.
  Eigen::VectorXd input;

  static WeightState zeros(const Dag& dag);

  Eigen::VectorXd& of(PlayerId p) { return w.at(p.unit).at(static_cast<std::size_t>(p.component)); }
  const Eigen::VectorXd& of(PlayerId p) const {
    return w.at(p.unit).at(static_cast<std::size_t>(p.component));
  }
};

/// Stochastic gates. Empty vectors mean probability 0 everywhere.
struct GateSpec {
  std::vector<double> dropout;      // per unit
  std::vector<double> dropconnect;  // per edge
  std::uint64_t seed = 0;

  double dropout_of(UnitId u) const { return u < dropout.size() ? dropout[u] : 0.0; }
  double dropconnect_of(EdgeId e) const { return e < dropconnect.size() ? dropconnect[e] : 0.0; }
  bool deterministic() const;
};

/// Externally imposed gating decisions (a conditional gate). For a maxout unit
/// the value is the component to activate; for any other weighted unit a
/// nonzero value forces it active and zero forces it inactive.
using GateOverrides = std::map<UnitId, int>;

/// Outcome of the gating induction for one round.
struct ActiveSet {
  std::vector<bool> unit_active;
  std::vector<int> maxout_winner;                 // -1 unless an active maxout unit
  std::vector<long> pool_winner;                  // winning input unit, -1 if none
  std::vector<std::vector<bool>> group_active;    // per copy, shared groups only
  std::vector<bool> dropout_keep;                 // per unit
  std::vector<bool> edge_keep;                    // per edge (dropconnect)

  bool active(UnitId u) const { return unit_active.at(u); }
  bool player_active(PlayerId p) const;
  std::vector<UnitId> active_units() const;

  friend bool operator==(const ActiveSet&, const ActiveSet&) = default;
};

/// Per-unit values of one forward sweep.
struct ForwardTrace {
  std::vector<double> pre;                 // a_j, zero for inactive units
  std::vector<double> out;                 // output of each unit, zero when inactive
  std::vector<Eigen::VectorXd> in;         // effective input vector of each unit
  std::vector<std::vector<double>> component_pre;  // maxout scores / group copy pre-activations
  Eigen::VectorXd net_out;
};

/// Gating induction over the longest-source-path order: sources and linear
/// units are always active, a rectifier iff its pre-activation over active
/// predecessors is strictly positive, the first highest-scoring maxout
/// component wins, a max-pool unit selects its largest active input (lowest
/// id on ties) and the losers it ignores go inactive, shared-group copies are
/// active iff their own pre-activation is positive. Dropout and dropconnect
/// masks are drawn from `rng` before gating, only for probabilities > 0.
ActiveSet compute_active_set(const Dag& dag, const WeightState& weights, const GateSpec& gate, Rng& rng,
                             const GateOverrides* overrides = nullptr);

/// Forward sweep of the linear subnetwork selected by `active`. Gating
/// decisions are read from `active` and never re-derived.
ForwardTrace feedforward(const Dag& dag, const WeightState& weights, const ActiveSet& active);

struct Evaluation {
  ActiveSet active;
  ForwardTrace trace;
};

Evaluation evaluate(const Dag& dag, const WeightState& weights, const GateSpec& gate, Rng& rng,
                    const GateOverrides* overrides = nullptr);

/// Copies the input vector into the source weights.
void set_input(const Dag& dag, WeightState& weights, const Eigen::VectorXd& x);

/// Per-copy input vectors of unit `u` given predecessor outputs (one entry
/// for non-group units). Dropped connections contribute zero.
std::vector<Eigen::VectorXd> copy_inputs(const Dag& dag, const ActiveSet& active, const std::vector<double>& out,
                                         UnitId u);

/// Smallest distance of any gating decision from its switching boundary:
/// rectifier and group-copy pre-activations, maxout and max-pool winner gaps.
/// Each margin is reported relative to (1 + |value|).
double gating_margin(const Dag& dag, const WeightState& weights, const ActiveSet& active);

}  // namespace gated
