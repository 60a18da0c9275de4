#pragma once

// Randomized probes shared by the unit tests and the acceptance suite.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "gated/backprop.hpp"
#include "gated/loss.hpp"
#include "gated/random_net.hpp"

namespace gated::testing {

inline Eigen::VectorXd uniform_vec(Rng& rng, Eigen::Index n, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * (2.0 * uniform01(rng) - 1.0);
  return v;
}

inline Eigen::VectorXd uniform_in_ball(Rng& rng, const Eigen::VectorXd& center, double radius) {
  Eigen::VectorXd v = uniform_vec(rng, center.size());
  const double n = v.norm();
  if (n > 1.0) v /= n;
  return center + radius * v;
}

// Label matching the loss: ±1 for logistic, real otherwise.
inline Eigen::VectorXd random_label(Rng& rng, const LossFn& loss, Eigen::Index k) {
  Eigen::VectorXd y = uniform_vec(rng, k);
  if (loss.kind == LossKind::Logistic) y = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
  return y;
}

// Loss of the network with the gating frozen at `active` and player p's
// weights replaced by `wp`.
inline double frozen_loss(const Dag& dag, WeightState w, const ActiveSet& active, PlayerId p,
                          const Eigen::VectorXd& wp, const LossFn& loss, const Eigen::VectorXd& y) {
  w.w[p.unit][static_cast<std::size_t>(p.component)] = wp;
  return loss_eval(loss, feedforward(dag, w, active).net_out, y);
}

struct ConvexityProbe {
  bool ran = false;
  double violation = 0.0;  // f(mid) − (f(a)+f(b))/2, positive means non-convex
};

// One segment probe on a random net: a random active player, two random
// points around its current weights, the frozen-gating loss at the midpoint.
inline ConvexityProbe convexity_probe(Rng& rng, const RandomNetOptions& opts = {}) {
  const Dag dag = random_dag(rng, opts);
  const WeightState w = random_weights(dag, rng);
  const ActiveSet active = compute_active_set(dag, w, GateSpec{}, rng);
  std::vector<PlayerId> live;
  for (PlayerId p : dag.players()) {
    if (active.player_active(p)) live.push_back(p);
  }
  if (live.empty()) return {};
  const PlayerId p = live[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(live.size()))];
  const LossFn loss{uniform01(rng) < 0.5 ? LossKind::MeanSquaredError : LossKind::Logistic, 1.0};
  const Eigen::VectorXd y = random_label(rng, loss, static_cast<Eigen::Index>(dag.outputs().size()));
  const Eigen::VectorXd& base = w.w[p.unit][static_cast<std::size_t>(p.component)];
  const Eigen::VectorXd a = base + uniform_vec(rng, base.size(), 2.0);
  const Eigen::VectorXd b = base + uniform_vec(rng, base.size(), 2.0);
  const double fa = frozen_loss(dag, w, active, p, a, loss, y);
  const double fb = frozen_loss(dag, w, active, p, b, loss, y);
  const double fm = frozen_loss(dag, w, active, p, 0.5 * (a + b), loss, y);
  return {true, fm - 0.5 * (fa + fb)};
}

// Exp-concave composite g(w) = ‖A·w + b − y‖² over a ball of diameter D.
// Returns the smallest slack of the second-order lower bound over one random
// (w, v) pair, using the largest β the inequality permits.
struct SecondOrderProbe {
  double slack = 0.0;
  double beta = 0.0;
};

inline SecondOrderProbe second_order_probe(Rng& rng, Eigen::Index n, Eigen::Index d) {
  Eigen::MatrixXd A(d, n);
  for (Eigen::Index i = 0; i < d; ++i) A.row(i) = uniform_vec(rng, n, 2.0).transpose();
  const Eigen::VectorXd b = uniform_vec(rng, d);
  const Eigen::VectorXd y = uniform_vec(rng, d);
  const Eigen::VectorXd center = uniform_vec(rng, n);
  const double D = 0.1 + 2.0 * uniform01(rng);

  // The image of the ball lies within r of y; f is 1/(2r²)-exp-concave there.
  const double op = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
  const double r = (A * center + b - y).norm() + op * D / 2.0;
  const double alpha = 1.0 / (2.0 * r * r);
  const double E = op * 2.0 * r;  // ‖Aᵀ∇f‖ ≤ ‖A‖·2r on that region
  const double beta = 0.5 * std::min(1.0 / (4.0 * D * E), alpha);

  const Eigen::VectorXd w = uniform_in_ball(rng, center, D / 2.0);
  const Eigen::VectorXd v = uniform_in_ball(rng, center, D / 2.0);
  auto g = [&](const Eigen::VectorXd& u) { return (A * u + b - y).squaredNorm(); };
  const Eigen::VectorXd grad = 2.0 * A.transpose() * (A * w + b - y);
  const double proj = grad.dot(w - v);
  const double rhs = g(w) + grad.dot(v - w) + 0.5 * beta * proj * proj;
  return {g(v) - rhs, beta};
}

}  // namespace gated::testing
