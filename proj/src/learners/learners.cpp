#include <cmath>

#include "gated/errors.hpp"
#include "gated/learners.hpp"

namespace gated {

BoundCheck check_bounds(const Eigen::VectorXd& x, double delta, const Bounds& bounds) {
  BoundCheck c;
  c.delta_abs = std::abs(delta);
  c.x_norm = x.norm();
  c.ok = c.delta_abs <= bounds.B && c.x_norm <= bounds.G;
  return c;
}

OgdState ogd_step(const OgdState& s, const Eigen::VectorXd& x, double delta, const Bounds& bounds, const Ball& ball,
                  BoundCheck* check) {
  if (check) *check = check_bounds(x, delta, bounds);
  return ogd_step_grad(s, delta * x, bounds, ball);
}

OgdState ogd_step_grad(const OgdState& s, const Eigen::VectorXd& grad, const Bounds& bounds, const Ball& ball) {
  OgdState next;
  next.t = s.t + 1;
  const double eta = bounds.D / (bounds.B * bounds.G * std::sqrt(static_cast<double>(next.t)));
  next.w = euclid_project(s.w - eta * grad, ball);
  return next;
}

double nprop_beta(const Bounds& b) { return 0.5 * std::min(1.0 / (4.0 * b.B * b.G * b.D), b.alpha); }

NpropState nprop_init(const Eigen::VectorXd& w, const Bounds& bounds) {
  NpropState s;
  s.w = w;
  s.beta = nprop_beta(bounds);
  const double a0 = 1.0 / (s.beta * s.beta * bounds.D * bounds.D);
  const auto d = w.size();
  s.A = a0 * Eigen::MatrixXd::Identity(d, d);
  s.A_inv = (1.0 / a0) * Eigen::MatrixXd::Identity(d, d);
  return s;
}

double inverse_drift(const NpropState& s) {
  const auto d = s.A.rows();
  return (s.A * s.A_inv - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
}

NpropState nprop_step(const NpropState& s, const Eigen::VectorXd& x, double delta, const Bounds& bounds,
                      const Ball& ball, BoundCheck* check) {
  if (check) *check = check_bounds(x, delta, bounds);
  return nprop_step_grad(s, delta * x, ball);
}

NpropState nprop_step_grad(const NpropState& s, const Eigen::VectorXd& grad, const Ball& ball) {
  NpropState next = s;
  next.t = s.t + 1;
  next.A += grad * grad.transpose();
  try {
    next.A_inv = rank1_inverse_update(s.A_inv, grad, 1.0);
  } catch (const NumericalError&) {
    next.A_inv = next.A.inverse();
    ++next.reinversions;
  }
  if (inverse_drift(next) >= 1e-6) {
    next.A_inv = next.A.llt().solve(Eigen::MatrixXd::Identity(next.A.rows(), next.A.cols()));
    ++next.reinversions;
  }
  next.w = weighted_project(s.w - (1.0 / s.beta) * (next.A_inv * grad), next.A, ball);
  return next;
}

GdState gd_step_grad(const GdState& s, const Eigen::VectorXd& grad, double eta, const Ball& ball) {
  GdState next = s;
  next.t = s.t + 1;
  const Eigen::VectorXd raw = s.w - eta * grad;
  next.w = euclid_project(raw, ball);
  if (next.w != raw) ++next.binding;
  return next;
}

double ogd_regret_bound(const Bounds& b, double t_j) {
  if (t_j <= 0) return 0.0;
  return 1.5 * b.D * b.G * b.B / std::sqrt(t_j);
}

double nprop_regret_bound(const Bounds& b, long d, double t_j) {
  if (t_j <= 0) return 0.0;
  return 5.0 * static_cast<double>(d) * (1.0 / b.alpha + b.B * b.D * b.G) * std::log(t_j) / t_j;
}

const char* to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::Ogd: return "ogd";
    case LearnerKind::Nprop: return "nprop";
    case LearnerKind::Gd: return "gd";
  }
  return "unknown";
}

LearnerKind learner_kind_from_string(const std::string& name) {
  if (name == "ogd") return LearnerKind::Ogd;
  if (name == "nprop") return LearnerKind::Nprop;
  if (name == "gd") return LearnerKind::Gd;
  throw ConfigError("learner: unknown kind '" + name + "'");
}

Learner::Learner(LearnerKind kind, const Eigen::VectorXd& w0, const Bounds& bounds, Ball ball, double eta)
    : kind_(kind), bounds_(bounds), ball_(std::move(ball)), eta_(eta) {
  if (!(bounds.D > 0.0 && bounds.B > 0.0 && bounds.G > 0.0 && bounds.alpha > 0.0)) {
    throw ConfigError("learner: bounds D, B, G and alpha must be positive");
  }
  if (ball_.center.size() != w0.size()) throw ConfigError("learner: ball center has the wrong dimension");
  const Eigen::VectorXd start = euclid_project(w0, ball_);
  switch (kind) {
    case LearnerKind::Ogd:
      state_ = OgdState{start, 0};
      break;
    case LearnerKind::Nprop:
      state_ = nprop_init(start, bounds);
      break;
    case LearnerKind::Gd:
      if (!(eta > 0.0)) throw ConfigError("learner: gd needs a positive eta");
      state_ = GdState{start, 0, 0};
      break;
  }
}

const Eigen::VectorXd& Learner::weights() const {
  return std::visit([](const auto& s) -> const Eigen::VectorXd& { return s.w; }, state_);
}

long Learner::active_steps() const {
  return std::visit([](const auto& s) { return s.t; }, state_);
}

void Learner::step(const Eigen::VectorXd& grad) {
  switch (kind_) {
    case LearnerKind::Ogd:
      state_ = ogd_step_grad(std::get<OgdState>(state_), grad, bounds_, ball_);
      break;
    case LearnerKind::Nprop:
      state_ = nprop_step_grad(std::get<NpropState>(state_), grad, ball_);
      break;
    case LearnerKind::Gd:
      state_ = gd_step_grad(std::get<GdState>(state_), grad, eta_, ball_);
      break;
  }
}

double Learner::bound(long t_j) const {
  switch (kind_) {
    case LearnerKind::Ogd: return ogd_regret_bound(bounds_, static_cast<double>(t_j));
    case LearnerKind::Nprop: return nprop_regret_bound(bounds_, static_cast<long>(weights().size()), static_cast<double>(t_j));
    case LearnerKind::Gd: return 0.0;
  }
  return 0.0;
}

}  // namespace gated
