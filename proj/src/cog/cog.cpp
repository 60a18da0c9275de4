#include "gated/cog.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace gated {

std::string ContextKey::str() const {
  std::string s;
  for (bool b : signs) s += b ? '+' : '-';
  return s + "/" + std::to_string(bucket);
}

ContextKey make_context(const std::vector<double>& pre, double input_norm, double norm_max, int buckets) {
  ContextKey k;
  for (double a : pre) k.signs.push_back(a > 0.0);
  const double frac = norm_max > 0.0 ? input_norm / norm_max : 0.0;
  k.bucket = std::clamp(static_cast<int>(std::floor(frac * buckets)), 0, buckets - 1);
  return k;
}

CogPolicy::CogPolicy(std::vector<CogFunction> fs, std::vector<std::string> labels, double eps, std::uint64_t seed)
    : functions(std::move(fs)), names(std::move(labels)), epsilon(eps), estimates(functions.size(), 0.0), rng(seed) {
  if (functions.empty()) throw std::invalid_argument("cog: empty function class");
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("cog: epsilon must lie in [0,1]");
  names.resize(functions.size());
}

namespace {

int greedy(const CogPolicy& policy) {
  return static_cast<int>(std::min_element(policy.estimates.begin(), policy.estimates.end()) -
                          policy.estimates.begin());
}

}  // namespace

CogChoice cog_select(CogPolicy& policy, const ContextKey& context) {
  const int n = static_cast<int>(policy.functions.size());
  const int best = greedy(policy);
  CogChoice c;
  // Both draws are always taken so the generator advances identically.
  const double coin = uniform01(policy.rng);
  const int uniform = std::min(n - 1, static_cast<int>(uniform01(policy.rng) * n));
  c.explored = coin < policy.epsilon;
  c.function = c.explored ? uniform : best;
  c.subset = policy.functions[static_cast<std::size_t>(c.function)](context);

  int agree = 0;
  for (const auto& f : policy.functions) agree += f(context) == c.subset ? 1 : 0;
  const bool greedy_agrees = policy.functions[static_cast<std::size_t>(best)](context) == c.subset;
  c.probability = (1.0 - policy.epsilon) * (greedy_agrees ? 1.0 : 0.0) + policy.epsilon * agree / n;
  return c;
}

void cog_update(CogPolicy& policy, const CogRound& round) {
  if (!round.observed_loss || round.subset == 0) return;
  if (!(round.probability > 0.0)) throw std::invalid_argument("cog: chosen subset has zero probability");
  const double step = *round.observed_loss / round.probability;
  for (std::size_t i = 0; i < policy.functions.size(); ++i) {
    if (policy.functions[i](round.context) == round.subset) policy.estimates[i] += step;
  }
}

double cog_pseudo_regret(const std::vector<CogRound>& history, const std::vector<CogFunction>& functions,
                         const std::vector<std::map<Subset, double>>& tables) {
  if (history.empty()) return 0.0;
  if (tables.size() != history.size()) throw std::invalid_argument("cog: one loss table per round required");
  double played = 0.0;
  std::vector<double> alt(functions.size(), 0.0);
  for (std::size_t t = 0; t < history.size(); ++t) {
    played += tables[t].at(history[t].subset);
    for (std::size_t i = 0; i < functions.size(); ++i) alt[i] += tables[t].at(functions[i](history[t].context));
  }
  const double best = *std::min_element(alt.begin(), alt.end());
  return (played - best) / static_cast<double>(history.size());
}

MaxoutBanditResult run_maxout_bandit(std::uint64_t seed, long rounds, double epsilon,
                                     const std::vector<double>& means) {
  const int k = static_cast<int>(means.size());
  Rng env(seed);
  // Fixed component weights of the maxout unit over a 2-d input.
  Eigen::MatrixXd W(k, 2);
  for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = 2.0 * uniform01(env) - 1.0;

  std::vector<CogFunction> fs;
  std::vector<std::string> names;
  for (int a = 0; a < k; ++a) {
    fs.push_back([a](const ContextKey&) { return Subset{1} << a; });
    names.push_back("lever" + std::to_string(a));
  }
  // The unit's own gate: first component with a positive score.
  fs.push_back([k](const ContextKey& c) {
    for (int a = 0; a < k; ++a) {
      if (c.signs[static_cast<std::size_t>(a)]) return Subset{1} << a;
    }
    return Subset{1} << (k - 1);
  });
  names.push_back("sign-gate");
  CogPolicy policy(fs, names, epsilon, seed ^ 0x9e3779b97f4a7c15ULL);

  const int best_arm = static_cast<int>(std::min_element(means.begin(), means.end()) - means.begin());
  MaxoutBanditResult res;
  std::vector<std::map<Subset, double>> expected, realized;
  long better = 0;
  for (long t = 0; t < rounds; ++t) {
    Eigen::Vector2d x(2.0 * uniform01(env) - 1.0, 2.0 * uniform01(env) - 1.0);
    const Eigen::VectorXd score = W * x;
    const ContextKey ctx = make_context(std::vector<double>(score.data(), score.data() + k), x.norm(), std::sqrt(2.0));
    const CogChoice choice = cog_select(policy, ctx);

    std::map<Subset, double> exp_table, real_table;
    for (int a = 0; a < k; ++a) {
      exp_table[Subset{1} << a] = means[static_cast<std::size_t>(a)];
      real_table[Subset{1} << a] = uniform01(env) < means[static_cast<std::size_t>(a)] ? 1.0 : 0.0;
    }
    CogRound round{ctx, choice.subset, choice.probability, real_table.at(choice.subset)};
    cog_update(policy, round);
    if (choice.subset == (Subset{1} << best_arm)) ++better;
    res.history.push_back(std::move(round));
    expected.push_back(std::move(exp_table));
    realized.push_back(std::move(real_table));
  }
  res.pseudo_regret = cog_pseudo_regret(res.history, fs, expected);
  res.realized_regret = cog_pseudo_regret(res.history, fs, realized);
  res.better_frequency = rounds > 0 ? static_cast<double>(better) / static_cast<double>(rounds) : 0.0;
  return res;
}

}  // namespace gated
