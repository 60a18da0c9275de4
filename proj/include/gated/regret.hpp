#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gated/learners.hpp"
#include "gated/loss.hpp"
#include "gated/signal.hpp"

namespace gated {

/// PS-Pred: the network loss as a function of the player's weights.
/// PS-Grad: the linearized loss ⟨∇ℓ_j, w⟩.
enum class GameMode { Pred, Grad };

double player_loss_pred(const RoundRecord& r, std::size_t p);
double player_loss_grad(const RoundRecord& r, std::size_t p);

/// Loss of player `p` on round `r` replayed at weights `w` through the
/// logged affine form, with the gating held at its logged value.
double replay_loss_pred(const RoundRecord& r, std::size_t p, const Eigen::VectorXd& w, const LossFn& loss);

struct Comparator {
  Eigen::VectorXd w;
  double cumulative = 0.0;  // Σ over active rounds of the comparator's loss
  bool exact = true;
  double residual = 0.0;    // certified upper bound on cumulative − optimum
  bool converged = true;
};

/// argmin over the ball of Σ_active ⟨∇ℓ_j^t, w⟩, in closed form.
Comparator hindsight_best_linear(const Signal& signal, std::size_t p, const Ball& ball, long prefix = -1);

/// argmin over the ball of Σ_active ℓ_j(w) with the replayed PS-Pred losses.
/// MSE is solved as a ball-constrained quadratic; the other losses by
/// accelerated projected gradient with backtracking until the gradient-mapping
/// norm drops below `tol` or `budget` iterations pass. The residual is the
/// Frank-Wolfe gap at the returned point.
Comparator hindsight_best_convex(const Signal& signal, std::size_t p, const Ball& ball, const LossFn& loss,
                                 int budget = 5000, double tol = 1e-10, long prefix = -1);

struct GatedRegretReport {
  long t_j = 0;
  bool inactive = false;
  double value = 0.0;     // (played − comparator)/T_j
  double residual = 0.0;  // comparator residual / T_j
  double played = 0.0;    // Σ over active rounds
  Comparator comparator;

  /// value + residual: an upper bound on the true gated-regret.
  double certified() const { return value + residual; }
};

GatedRegretReport gated_regret(const Signal& signal, std::size_t p, const Ball& ball, GameMode mode,
                               const LossFn& loss, long prefix = -1);

/// E_{P̂_j}[ℓ_j(w)] − E_{P̂_j}[ℓ_j(w*)] with P̂_j uniform over active rounds.
/// Evaluated from per-round expectations, independently of gated_regret's
/// sums, using the same comparator point.
double cce_epsilon(const Signal& signal, std::size_t p, const Ball& ball, GameMode mode, const LossFn& loss,
                   long prefix = -1);

/// w¹_j − η·Σ_active ∇ℓ_j^t.
Eigen::VectorXd empirical_gain_grad(const Signal& signal, std::size_t p, double eta, const Eigen::VectorXd& w1,
                                    long prefix = -1);

/// Incremental PS-Grad regret, updated one round at a time.
class RunningLinearRegret {
 public:
  explicit RunningLinearRegret(const Ball& ball) : ball_(ball), gsum_(Eigen::VectorXd::Zero(ball.center.size())) {}
  void add(const Eigen::VectorXd& grad, const Eigen::VectorXd& w);
  double value() const;
  long t_j() const { return t_; }

 private:
  Ball ball_;
  Eigen::VectorXd gsum_;
  double played_ = 0.0;
  long t_ = 0;
};

}  // namespace gated
