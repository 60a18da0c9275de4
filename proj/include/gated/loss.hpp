#pragma once

#include <string>

#include <Eigen/Dense>

namespace gated {

enum class LossKind { MeanSquaredError, Logistic, LogLoss };

const char* to_string(LossKind kind);
/// Accepts "mse", "logistic" and "log_loss"; throws ConfigError otherwise.
LossKind loss_kind_from_string(const std::string& name);

struct LossFn {
  LossKind kind = LossKind::MeanSquaredError;
  double alpha = 1.0;  // exp-concavity parameter, as configured
};

/// MSE: Σ(ς−y)². Logistic: Σ log(1+exp(−y·ς)) with y ∈ {−1,+1}.
/// Log-loss: −Σ log ς (labels ignored). Throws LossDomainError outside the domain.
double loss_eval(const LossFn& loss, const Eigen::VectorXd& out, const Eigen::VectorXd& y);
Eigen::VectorXd loss_grad_out(const LossFn& loss, const Eigen::VectorXd& out, const Eigen::VectorXd& y);

/// Largest α for which (ς−y)² is α-exp-concave on |ς−y| ≤ r.
inline double mse_exp_concavity(double r) { return 1.0 / (2.0 * r * r); }

}  // namespace gated
