#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gated/config.hpp"
#include "gated/learners.hpp"
#include "gated/regret.hpp"
#include "gated/signal.hpp"

namespace gated {

struct PlayerSummary {
  std::string name;
  PlayerId id;
  long d = 0;
  LearnerKind kind = LearnerKind::Ogd;
  Bounds bounds;
  Ball ball;
  double eta = 0.0;
  long t_j = 0;
  GatedRegretReport pred;
  GatedRegretReport grad;
  double eps_pred = 0.0;
  double eps_grad = 0.0;
  double bound = 0.0;            // 0 when the learner has no guarantee
  double max_delta = 0.0;        // observed max |δ|
  double max_input = 0.0;        // observed max ‖ς_in‖
  double observed_alpha = 0.0;   // MSE only; 0 when not computed
  bool bounds_ok = true;         // observed maxima within B, G (and α for NProp)
  bool bound_pass = true;        // regret within the learner's bound
  Eigen::VectorXd initial_weights;
  Eigen::VectorXd final_weights;
  double max_inverse_drift = 0.0;
  long reinversions = 0;
  long binding = 0;
};

struct Checkpoint {
  long rounds = 0;
  std::vector<double> eps;  // per player, in the configured game
  double max_eps = 0.0;
};

/// Identities for fixed-step gradient descent; only filled when every
/// player runs plain GD.
struct GainIdentityResult {
  bool applicable = false;
  bool nonbinding = true;
  double max_gain_gap = 0.0;         // max_j ‖w_j^{T+1} − ∇Ĝ_j‖
  double max_directional_gap = 0.0;  // max_j |⟨∇Ĝ_j, ς_in(j)^{T+1}⟩ − a_j^{T+1}|
  double max_rectifier_gap = 0.0;    // max over rectifiers |ς_j^{T+1} − max(0, ·)|
};

struct CogSummary {
  bool enabled = false;
  std::vector<std::string> names;
  std::vector<double> estimates;
  std::vector<long> chosen;
  long explored = 0;
  long observed = 0;
};

struct RunSummary {
  std::vector<PlayerSummary> players;
  std::vector<double> network_loss;  // per round, mean over the minibatch
  std::vector<Checkpoint> checkpoints;
  GainIdentityResult gain_identity;
  CogSummary cog;
  Signal signal;
  bool certified = true;  // every active player's bounds respected
  bool passed = true;     // every active player's regret within its bound

  json to_json(const ExperimentConfig& config) const;
};

/// Learner state around one round, for tests that inspect internals.
struct RoundObservation {
  const RoundRecord& record;
  const std::vector<Learner>& before;
  const std::vector<Learner>& after;
};

using RoundObserver = std::function<void(const RoundObservation&)>;

/// Runs the gated round protocol for `config.rounds` rounds. Files are written to `out_dir`
/// unless it is empty: metrics.csv, samples.csv, signal.jsonl, summary.json.
RunSummary run_experiment(const ExperimentConfig& config, const std::string& out_dir = "",
                          const RoundObserver& observer = nullptr);

/// Bound-check helpers shared with `verify`.
bool regret_within_bound(LearnerKind kind, const GatedRegretReport& pred, const GatedRegretReport& grad,
                         double bound, double slack);

std::string format_double(double v);

}  // namespace gated
