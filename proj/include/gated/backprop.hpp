#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gated/dag.hpp"
#include "gated/loss.hpp"
#include "gated/network.hpp"

namespace gated {

struct BackpropTrace {
  Eigen::VectorXd g;                                // ∂ℓ/∂ς_out
  std::vector<double> delta;                        // per unit
  std::vector<std::vector<Eigen::VectorXd>> grad;   // [unit][component], zero unless the player is active

  const Eigen::VectorXd& grad_of(PlayerId p) const {
    return grad.at(p.unit).at(static_cast<std::size_t>(p.component));
  }
};

/// Error recursion over active units in reverse topological order. Output
/// units start from the matching entry of `g`; an inactive unit's δ is 0.
BackpropTrace backprop(const Dag& dag, const WeightState& weights, const ActiveSet& active,
                       const ForwardTrace& trace, const Eigen::VectorXd& g);

/// Affine form of the network output in one player's weights with all other
/// weights and the gating fixed: ς_out = c1·⟨w_j, ς_in(j)⟩ + c2.
struct AffineForm {
  Eigen::VectorXd c1;
  Eigen::VectorXd c2;
};

/// Row j holds σ_{j↝•}: δ_j obtained with g set to each unit vector in turn.
Eigen::MatrixXd output_sensitivity(const Dag& dag, const WeightState& weights, const ActiveSet& active,
                                   const ForwardTrace& trace);

AffineForm affine_form(const Dag& dag, const WeightState& weights, const ActiveSet& active,
                       const ForwardTrace& trace, UnitId j);

struct FiniteDiffResult {
  std::vector<std::vector<Eigen::VectorXd>> grad;  // same layout as BackpropTrace::grad
  double loss = 0.0;
  bool near_boundary = false;                      // margin flag
};

/// Central differences on every weight coordinate. The gating is recomputed
/// at each probe with a generator freshly seeded from gate.seed, so the
/// dropout masks match the base point. The margin flag is raised when any
/// gating decision is within `margin` of its boundary (relative to 1+|value|)
/// or when a probe changes the active set.
FiniteDiffResult finite_diff_grad(const Dag& dag, const WeightState& weights, const GateSpec& gate,
                                  const Eigen::VectorXd& input, const Eigen::VectorXd& y, const LossFn& loss,
                                  double h = 1e-5, double margin = 1e-6);

}  // namespace gated
