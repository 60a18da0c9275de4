#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gated/network.hpp"

namespace gated {

/// Discretized context: sign pattern of the gated players' pre-activations
/// and an equal-width bucket of the input norm.
struct ContextKey {
  std::vector<bool> signs;
  int bucket = 0;

  std::string str() const;
  friend bool operator==(const ContextKey&, const ContextKey&) = default;
};

ContextKey make_context(const std::vector<double>& pre, double input_norm, double norm_max, int buckets = 8);

/// Player subsets are bitmasks over the gated players.
using Subset = std::uint64_t;
using CogFunction = std::function<Subset(const ContextKey&)>;

struct CogPolicy {
  std::vector<CogFunction> functions;
  std::vector<std::string> names;
  double epsilon = 0.1;
  std::vector<double> estimates;  // cumulative importance-weighted loss per function
  Rng rng;

  CogPolicy(std::vector<CogFunction> fs, std::vector<std::string> labels, double eps, std::uint64_t seed);
};

struct CogChoice {
  int function = 0;
  Subset subset = 0;
  double probability = 1.0;  // probability that the policy plays `subset` on this context
  bool explored = false;
};

/// ε-greedy: with probability ε a uniform function, otherwise the lowest
/// estimate (lowest index on ties).
CogChoice cog_select(CogPolicy& policy, const ContextKey& context);

/// Only the chosen subset's loss is carried. No loss (an empty subset
/// activates nobody) means no update.
struct CogRound {
  ContextKey context;
  Subset subset = 0;
  double probability = 1.0;
  std::optional<double> observed_loss;
};

/// Adds loss/probability to the estimate of every function that maps the
/// round's context to the chosen subset.
void cog_update(CogPolicy& policy, const CogRound& round);

/// (1/T)·max_φ Σ_t [ℓ^t(F^t) − ℓ^t(φ(c^t))] from full per-round loss tables.
double cog_pseudo_regret(const std::vector<CogRound>& history, const std::vector<CogFunction>& functions,
                         const std::vector<std::map<Subset, double>>& tables);

/// Two-lever maxout bandit: the gate picks which component of a maxout unit
/// fires; lever a incurs a Bernoulli(mean[a]) loss.
struct MaxoutBanditResult {
  double pseudo_regret = 0.0;
  double realized_regret = 0.0;
  double better_frequency = 0.0;
  std::vector<CogRound> history;
};

MaxoutBanditResult run_maxout_bandit(std::uint64_t seed, long rounds, double epsilon,
                                     const std::vector<double>& means = {0.2, 0.8});

}  // namespace gated
