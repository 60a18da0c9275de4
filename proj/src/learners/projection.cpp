#include <cmath>
#include <limits>

#include "gated/errors.hpp"
#include "gated/learners.hpp"

namespace gated {

bool Ball::contains(const Eigen::VectorXd& w, double slack) const {
  return (w - center).norm() <= radius() * (1.0 + slack) + slack;
}

Eigen::VectorXd euclid_project(const Eigen::VectorXd& w, const Ball& ball) {
  const Eigen::VectorXd d = w - ball.center;
  const double n = d.norm();
  if (n <= ball.radius()) return w;
  return ball.center + d * (ball.radius() / n);
}

Eigen::VectorXd weighted_project(const Eigen::VectorXd& w, const Eigen::MatrixXd& A, const Ball& ball, double tol) {
  const double r = ball.radius();
  const Eigen::VectorXd z = w - ball.center;
  if (z.norm() <= r) return w;

  // In the eigenbasis of A, v(λ) − c = V·diag(λ_i/(λ_i+λ))·Vᵀ(w − c).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw NumericalError("weighted_project: matrix is not positive definite");
  }
  const Eigen::VectorXd lam = eig.eigenvalues();
  const Eigen::VectorXd zt = eig.eigenvectors().transpose() * z;
  auto offset = [&](double mu) -> Eigen::VectorXd {
    return eig.eigenvectors() * (lam.array() / (lam.array() + mu) * zt.array()).matrix();
  };

  double lo = 0.0;
  double hi = lam.maxCoeff();
  for (int i = 0; offset(hi).norm() > r; ++i) {
    if (i == 200) throw NumericalError("weighted_project: could not bracket the multiplier");
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double dist = offset(mid).norm();
    if (dist > r) {
      lo = mid;
    } else {
      hi = mid;
      if (r - dist < tol * (1.0 + r)) break;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  const Eigen::VectorXd off = offset(hi);
  if (std::abs(off.norm() - r) > std::sqrt(tol) * (1.0 + r)) {
    throw NumericalError("weighted_project: bisection did not converge");
  }
  return ball.center + off;
}

Eigen::MatrixXd rank1_inverse_update(const Eigen::MatrixXd& A_inv, const Eigen::VectorXd& u, double c) {
  if (c == 0.0) return A_inv;
  const Eigen::VectorXd Au = A_inv * u;
  const double denom = 1.0 + c * u.dot(Au);
  if (denom <= 1e-12) throw NumericalError("rank1_inverse_update: denominator " + std::to_string(denom));
  return A_inv - (c / denom) * Au * Au.transpose();
}

}  // namespace gated
