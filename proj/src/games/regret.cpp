#include "gated/regret.hpp"

#include <cmath>
#include <limits>

#include "gated/errors.hpp"

namespace gated {

double player_loss_pred(const RoundRecord& r, std::size_t p) {
  return r.players.at(p).active ? r.players[p].loss_pred : 0.0;
}

double player_loss_grad(const RoundRecord& r, std::size_t p) {
  return r.players.at(p).active ? r.players[p].loss_grad : 0.0;
}

double replay_loss_pred(const RoundRecord& r, std::size_t p, const Eigen::VectorXd& w, const LossFn& loss) {
  if (!r.players.at(p).active) return 0.0;
  double total = 0.0;
  for (const auto& s : r.samples) {
    const auto& ps = s.players.at(p);
    if (!ps.active) continue;
    total += loss_eval(loss, ps.c1 * w.dot(ps.input) + ps.c2, s.y);
  }
  return total / static_cast<double>(r.samples.size());
}

namespace {

// One replayed term: weight·ℓ(c1·⟨w, x⟩ + c2, y).
struct Term {
  const PlayerSample* ps;
  const Eigen::VectorXd* y;
  double weight;
};

std::vector<Term> collect_terms(const Signal& signal, std::size_t p, long prefix) {
  std::vector<Term> terms;
  for (std::size_t t : signal.active_rounds(p, prefix)) {
    const auto& r = signal.rounds[t];
    const double weight = 1.0 / static_cast<double>(r.samples.size());
    for (const auto& s : r.samples) {
      if (s.players.at(p).active) terms.push_back({&s.players[p], &s.y, weight});
    }
  }
  return terms;
}

double objective(const std::vector<Term>& terms, const Eigen::VectorXd& w, const LossFn& loss) {
  double f = 0.0;
  for (const auto& t : terms) f += t.weight * loss_eval(loss, t.ps->c1 * w.dot(t.ps->input) + t.ps->c2, *t.y);
  return f;
}

Eigen::VectorXd gradient(const std::vector<Term>& terms, const Eigen::VectorXd& w, const LossFn& loss) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
  for (const auto& t : terms) {
    const Eigen::VectorXd out = t.ps->c1 * w.dot(t.ps->input) + t.ps->c2;
    g += t.weight * loss_grad_out(loss, out, *t.y).dot(t.ps->c1) * t.ps->input;
  }
  return g;
}

// max over the ball of ⟨∇F(w), w − v⟩, an upper bound on F(w) − min F.
double frank_wolfe_gap(const Eigen::VectorXd& g, const Eigen::VectorXd& w, const Ball& ball) {
  return std::max(0.0, g.dot(w - ball.center) + ball.radius() * g.norm());
}

// min over ‖z‖ ≤ r of zᵀQz + 2qᵀz with Q symmetric positive semidefinite.
Eigen::VectorXd ball_quadratic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& q, double r) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q);
  const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
  const Eigen::VectorXd qt = eig.eigenvectors().transpose() * q;
  const double floor = 1e-12 * std::max(1.0, lam.maxCoeff());

  auto z_of = [&](double mu) {
    Eigen::VectorXd zt(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
      const double den = lam[i] + mu;
      zt[i] = den > floor ? -qt[i] / den : 0.0;
    }
    return zt;
  };

  // Minimum-norm unconstrained minimizer first.
  Eigen::VectorXd zt = z_of(0.0);
  if (zt.norm() <= r) return eig.eigenvectors() * zt;

  double lo = 0.0;
  double hi = std::max(1.0, lam.maxCoeff());
  while (z_of(hi).norm() > r) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("hindsight: could not bracket the multiplier");
  }
  for (int i = 0; i < 300 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (z_of(mid).norm() > r ? lo : hi) = mid;
  }
  return eig.eigenvectors() * z_of(hi);
}

Comparator solve_mse(const std::vector<Term>& terms, const Ball& ball, const LossFn& loss, std::size_t dim) {
  // Σ weight·‖c1‖²·(xᵀw)² + 2·weight·⟨c1, c2 − y⟩·xᵀw + const
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (const auto& t : terms) {
    const auto& x = t.ps->input;
    Q += t.weight * t.ps->c1.squaredNorm() * x * x.transpose();
    b += t.weight * t.ps->c1.dot(t.ps->c2 - *t.y) * x;
  }
  // Shift to the ball center: w = c + z.
  const Eigen::VectorXd q = Q * ball.center + b;
  Comparator c;
  c.w = ball.center + ball_quadratic(Q, q, ball.radius());
  c.w = euclid_project(c.w, ball);
  c.cumulative = objective(terms, c.w, loss);
  c.residual = frank_wolfe_gap(gradient(terms, c.w, loss), c.w, ball);
  c.exact = true;
  return c;
}

Comparator solve_fista(const std::vector<Term>& terms, const Ball& ball, const LossFn& loss, int budget, double tol) {
  Eigen::VectorXd w = ball.center;
  Eigen::VectorXd y = w;
  double L = 1.0;
  double theta = 1.0;
  bool converged = false;
  for (int it = 0; it < budget; ++it) {
    const double fy = objective(terms, y, loss);
    const Eigen::VectorXd gy = gradient(terms, y, loss);
    Eigen::VectorXd next;
    for (int k = 0; k < 60; ++k) {
      next = euclid_project(y - gy / L, ball);
      const Eigen::VectorXd d = next - y;
      if (objective(terms, next, loss) <= fy + gy.dot(d) + 0.5 * L * d.squaredNorm() + 1e-15 * (1.0 + std::abs(fy))) {
        break;
      }
      L *= 2.0;
    }
    const double mapping = L * (next - y).norm();
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    y = next + ((theta - 1.0) / theta_next) * (next - w);
    w = next;
    theta = theta_next;
    if (mapping < tol) {
      converged = true;
      break;
    }
  }
  Comparator c;
  c.w = w;
  c.cumulative = objective(terms, w, loss);
  c.residual = frank_wolfe_gap(gradient(terms, w, loss), w, ball);
  c.exact = false;
  c.converged = converged;
  return c;
}

}  // namespace

Comparator hindsight_best_linear(const Signal& signal, std::size_t p, const Ball& ball, long prefix) {
  Eigen::VectorXd gsum = Eigen::VectorXd::Zero(ball.center.size());
  for (std::size_t t : signal.active_rounds(p, prefix)) gsum += signal.rounds[t].players[p].grad;
  Comparator c;
  const double n = gsum.norm();
  c.w = n > 0.0 ? Eigen::VectorXd(ball.center - ball.radius() * gsum / n) : ball.center;
  c.cumulative = gsum.dot(c.w);
  return c;
}

Comparator hindsight_best_convex(const Signal& signal, std::size_t p, const Ball& ball, const LossFn& loss,
                                 int budget, double tol, long prefix) {
  const auto terms = collect_terms(signal, p, prefix);
  if (terms.empty()) return Comparator{ball.center, 0.0, true, 0.0, true};
  if (loss.kind == LossKind::MeanSquaredError) {
    return solve_mse(terms, ball, loss, static_cast<std::size_t>(ball.center.size()));
  }
  return solve_fista(terms, ball, loss, budget, tol);
}

GatedRegretReport gated_regret(const Signal& signal, std::size_t p, const Ball& ball, GameMode mode,
                               const LossFn& loss, long prefix) {
  GatedRegretReport r;
  const auto rounds = signal.active_rounds(p, prefix);
  r.t_j = static_cast<long>(rounds.size());
  if (r.t_j == 0) {
    r.inactive = true;
    r.comparator = Comparator{ball.center, 0.0, true, 0.0, true};
    return r;
  }
  for (std::size_t t : rounds) {
    r.played += mode == GameMode::Pred ? player_loss_pred(signal.rounds[t], p) : player_loss_grad(signal.rounds[t], p);
  }
  r.comparator = mode == GameMode::Pred ? hindsight_best_convex(signal, p, ball, loss, 5000, 1e-10, prefix)
                                        : hindsight_best_linear(signal, p, ball, prefix);
  const double tj = static_cast<double>(r.t_j);
  r.value = (r.played - r.comparator.cumulative) / tj;
  r.residual = r.comparator.residual / tj;
  return r;
}

double cce_epsilon(const Signal& signal, std::size_t p, const Ball& ball, GameMode mode, const LossFn& loss,
                   long prefix) {
  const auto rounds = signal.active_rounds(p, prefix);
  if (rounds.empty()) return 0.0;
  const Comparator c = mode == GameMode::Pred ? hindsight_best_convex(signal, p, ball, loss, 5000, 1e-10, prefix)
                                              : hindsight_best_linear(signal, p, ball, prefix);
  const double mass = 1.0 / static_cast<double>(rounds.size());
  double played = 0.0;
  double deviation = 0.0;
  for (std::size_t t : rounds) {
    const auto& r = signal.rounds[t];
    if (mode == GameMode::Pred) {
      played += mass * player_loss_pred(r, p);
      deviation += mass * replay_loss_pred(r, p, c.w, loss);
    } else {
      played += mass * player_loss_grad(r, p);
      deviation += mass * r.players[p].grad.dot(c.w);
    }
  }
  return played - deviation;
}

Eigen::VectorXd empirical_gain_grad(const Signal& signal, std::size_t p, double eta, const Eigen::VectorXd& w1,
                                    long prefix) {
  Eigen::VectorXd g = w1;
  for (std::size_t t : signal.active_rounds(p, prefix)) g -= eta * signal.rounds[t].players[p].grad;
  return g;
}

void RunningLinearRegret::add(const Eigen::VectorXd& grad, const Eigen::VectorXd& w) {
  gsum_ += grad;
  played_ += grad.dot(w);
  ++t_;
}

double RunningLinearRegret::value() const {
  if (t_ == 0) return 0.0;
  const double best = gsum_.dot(ball_.center) - ball_.radius() * gsum_.norm();
  return (played_ - best) / static_cast<double>(t_);
}

}  // namespace gated
