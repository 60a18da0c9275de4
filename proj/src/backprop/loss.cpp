#include "gated/loss.hpp"

#include <cmath>

#include "gated/errors.hpp"

namespace gated {

const char* to_string(LossKind kind) {
  switch (kind) {
    case LossKind::MeanSquaredError: return "mse";
    case LossKind::Logistic: return "logistic";
    case LossKind::LogLoss: return "log_loss";
  }
  return "unknown";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "mse") return LossKind::MeanSquaredError;
  if (name == "logistic") return LossKind::Logistic;
  if (name == "log_loss" || name == "logloss") return LossKind::LogLoss;
  throw ConfigError("loss: unknown kind '" + name + "'");
}

namespace {

void check_sizes(const Eigen::VectorXd& out, const Eigen::VectorXd& y, LossKind kind) {
  if (kind != LossKind::LogLoss && out.size() != y.size()) {
    throw std::invalid_argument("loss: output has " + std::to_string(out.size()) + " entries, label has " +
                                std::to_string(y.size()));
  }
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

double loss_eval(const LossFn& loss, const Eigen::VectorXd& out, const Eigen::VectorXd& y) {
  check_sizes(out, y, loss.kind);
  double total = 0.0;
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    switch (loss.kind) {
      case LossKind::MeanSquaredError:
        total += (out[k] - y[k]) * (out[k] - y[k]);
        break;
      case LossKind::Logistic:
        total += softplus(-y[k] * out[k]);
        break;
      case LossKind::LogLoss:
        if (!(out[k] > 0.0)) throw LossDomainError("log-loss: prediction must be positive, got " + std::to_string(out[k]));
        total -= std::log(out[k]);
        break;
    }
  }
  return total;
}

Eigen::VectorXd loss_grad_out(const LossFn& loss, const Eigen::VectorXd& out, const Eigen::VectorXd& y) {
  check_sizes(out, y, loss.kind);
  Eigen::VectorXd g(out.size());
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    switch (loss.kind) {
      case LossKind::MeanSquaredError:
        g[k] = 2.0 * (out[k] - y[k]);
        break;
      case LossKind::Logistic:
        // d/dς log(1+exp(−yς)) = −y / (1 + exp(yς))
        g[k] = -y[k] / (1.0 + std::exp(y[k] * out[k]));
        break;
      case LossKind::LogLoss:
        if (!(out[k] > 0.0)) throw LossDomainError("log-loss: prediction must be positive, got " + std::to_string(out[k]));
        g[k] = -1.0 / out[k];
        break;
    }
  }
  return g;
}

}  // namespace gated
