#pragma once

#include <memory>
#include <string>
#include <variant>

#include <Eigen/Dense>

namespace gated {

/// Action set of a player: Euclidean ball of diameter D around `center`.
struct Ball {
  Eigen::VectorXd center;
  double diameter = 1.0;

  double radius() const { return diameter / 2.0; }
  bool contains(const Eigen::VectorXd& w, double slack = 1e-12) const;
};

struct Bounds {
  double D = 1.0;      // diameter of the action set
  double B = 1.0;      // bound on |δ|
  double G = 1.0;      // bound on ‖ς_in‖
  double alpha = 1.0;  // exp-concavity of the loss
};

/// Observed magnitudes of one step against the configured bounds.
struct BoundCheck {
  double delta_abs = 0.0;
  double x_norm = 0.0;
  bool ok = true;
};

BoundCheck check_bounds(const Eigen::VectorXd& x, double delta, const Bounds& bounds);

Eigen::VectorXd euclid_project(const Eigen::VectorXd& w, const Ball& ball);

/// argmin over the ball of ⟨v−w, A(v−w)⟩. Bisection on the multiplier of
/// the ball constraint; the returned point always lies inside the ball.
/// Throws NumericalError if 200 iterations do not bracket the boundary.
Eigen::VectorXd weighted_project(const Eigen::VectorXd& w, const Eigen::MatrixXd& A, const Ball& ball,
                                 double tol = 1e-12);

/// Inverse of A + c·u⊗u from A⁻¹. Throws NumericalError when the
/// denominator falls to 1e-12 or below.
Eigen::MatrixXd rank1_inverse_update(const Eigen::MatrixXd& A_inv, const Eigen::VectorXd& u, double c);

// Projected online gradient descent with step D/(B·G·√t_j).
struct OgdState {
  Eigen::VectorXd w;
  long t = 0;  // active steps taken
};

OgdState ogd_step(const OgdState& s, const Eigen::VectorXd& x, double delta, const Bounds& bounds, const Ball& ball,
                  BoundCheck* check = nullptr);
/// Same update from an explicit gradient (minibatch averages).
OgdState ogd_step_grad(const OgdState& s, const Eigen::VectorXd& grad, const Bounds& bounds, const Ball& ball);

// Per-unit online Newton step.
struct NpropState {
  Eigen::VectorXd w;
  Eigen::MatrixXd A;
  Eigen::MatrixXd A_inv;
  double beta = 0.0;
  long t = 0;
  long reinversions = 0;
};

/// β = ½·min{1/(4BGD), α}.
double nprop_beta(const Bounds& bounds);
/// A⁰ = I/(β²D²).
NpropState nprop_init(const Eigen::VectorXd& w, const Bounds& bounds);
NpropState nprop_step(const NpropState& s, const Eigen::VectorXd& x, double delta, const Bounds& bounds,
                      const Ball& ball, BoundCheck* check = nullptr);
NpropState nprop_step_grad(const NpropState& s, const Eigen::VectorXd& grad, const Ball& ball);
/// max |A·A⁻¹ − I|.
double inverse_drift(const NpropState& s);

// Fixed-step gradient descent; the projection is expected never to bind.
struct GdState {
  Eigen::VectorXd w;
  long t = 0;
  long binding = 0;  // steps where the projection moved the iterate
};

GdState gd_step_grad(const GdState& s, const Eigen::VectorXd& grad, double eta, const Ball& ball);

/// Average gated-regret bounds.
double ogd_regret_bound(const Bounds& bounds, double t_j);
double nprop_regret_bound(const Bounds& bounds, long d, double t_j);

enum class LearnerKind { Ogd, Nprop, Gd };

const char* to_string(LearnerKind kind);
/// "ogd", "nprop", "gd"; throws ConfigError otherwise.
LearnerKind learner_kind_from_string(const std::string& name);

/// One player's learner. Inactive rounds must not call step().
class Learner {
 public:
  Learner(LearnerKind kind, const Eigen::VectorXd& w0, const Bounds& bounds, Ball ball, double eta = 0.0);

  LearnerKind kind() const { return kind_; }
  const Bounds& bounds() const { return bounds_; }
  const Ball& ball() const { return ball_; }
  double eta() const { return eta_; }
  const Eigen::VectorXd& weights() const;
  long active_steps() const;

  void step(const Eigen::VectorXd& grad);
  /// Regret bound of this learner after `t_j` active steps; 0 for plain GD,
  /// which carries no guarantee.
  double bound(long t_j) const;

  const NpropState* nprop() const { return std::get_if<NpropState>(&state_); }
  const GdState* gd() const { return std::get_if<GdState>(&state_); }

 private:
  LearnerKind kind_;
  Bounds bounds_;
  Ball ball_;
  double eta_;
  std::variant<OgdState, NpropState, GdState> state_;
};

}  // namespace gated
