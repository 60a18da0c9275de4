#include <gtest/gtest.h>

#include "gated/cog.hpp"

using namespace gated;

namespace {

CogFunction constant(Subset s) {
  return [s](const ContextKey&) { return s; };
}

const ContextKey kCtx{{true, false}, 2};

}  // namespace

TEST(Context, SignsAndBuckets) {
  const auto k = make_context({0.5, 0.0, -1.0}, 0.49, 1.0, 4);
  EXPECT_EQ(k.signs, (std::vector<bool>{true, false, false}));
  EXPECT_EQ(k.bucket, 1);
  EXPECT_EQ(k.str(), "+--/1");
  EXPECT_EQ(make_context({}, 5.0, 1.0, 4).bucket, 3);
  EXPECT_EQ(make_context({}, 1.0, 0.0, 4).bucket, 0);
}

TEST(Select, GreedyWhenEpsilonIsZero) {
  CogPolicy p({constant(1), constant(2)}, {"a", "b"}, 0.0, 1);
  p.estimates = {5.0, 1.0};
  for (int i = 0; i < 50; ++i) {
    const auto c = cog_select(p, kCtx);
    EXPECT_EQ(c.function, 1);
    EXPECT_FALSE(c.explored);
    EXPECT_EQ(c.probability, 1.0);
  }
}

TEST(Select, UniformWhenEpsilonIsOne) {
  CogPolicy p({constant(1), constant(2), constant(4), constant(8)}, {}, 1.0, 2);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 8000; ++i) {
    const auto c = cog_select(p, kCtx);
    EXPECT_TRUE(c.explored);
    EXPECT_DOUBLE_EQ(c.probability, 0.25);
    ++counts[static_cast<std::size_t>(c.function)];
  }
  for (int n : counts) EXPECT_NEAR(n / 8000.0, 0.25, 0.03);
}

TEST(Select, SingletonClassAlwaysPlaysIt) {
  CogPolicy p({constant(3)}, {"only"}, 0.3, 3);
  for (int i = 0; i < 20; ++i) {
    const auto c = cog_select(p, kCtx);
    EXPECT_EQ(c.subset, 3u);
    EXPECT_DOUBLE_EQ(c.probability, 1.0);
  }
}

TEST(Select, ProbabilityCountsAgreeingFunctions) {
  CogPolicy p({constant(1), constant(1), constant(2)}, {}, 0.3, 4);
  p.estimates = {0.0, 1.0, 2.0};
  for (int i = 0; i < 200; ++i) {
    const auto c = cog_select(p, kCtx);
    EXPECT_DOUBLE_EQ(c.probability, c.subset == 1 ? 0.7 + 0.3 * 2.0 / 3.0 : 0.3 / 3.0);
  }
}

TEST(Update, OnlyConsistentFunctionsMove) {
  CogPolicy p({constant(1), constant(2), constant(1)}, {}, 0.1, 5);
  cog_update(p, CogRound{kCtx, 1, 0.5, 0.2});
  EXPECT_EQ(p.estimates, (std::vector<double>{0.4, 0.0, 0.4}));
  cog_update(p, CogRound{kCtx, 2, 0.25, std::nullopt});
  EXPECT_EQ(p.estimates, (std::vector<double>{0.4, 0.0, 0.4}));
  EXPECT_THROW(cog_update(p, CogRound{kCtx, 2, 0.0, 1.0}), std::invalid_argument);
}

TEST(Update, IdenticalFunctionsStayTied) {
  CogPolicy p({constant(4), constant(4)}, {}, 0.5, 6);
  for (int i = 0; i < 100; ++i) {
    const auto c = cog_select(p, kCtx);
    cog_update(p, CogRound{kCtx, c.subset, c.probability, 0.3});
  }
  EXPECT_EQ(p.estimates[0], p.estimates[1]);
}

TEST(Update, NeverActivateIsNeverCharged) {
  // {always, never} over one rectifier: silence carries no loss signal.
  CogPolicy p({constant(1), constant(0)}, {"always", "never"}, 0.2, 7);
  for (int i = 0; i < 500; ++i) {
    const auto c = cog_select(p, kCtx);
    const std::optional<double> loss = c.subset ? std::optional<double>(0.5) : std::nullopt;
    cog_update(p, CogRound{kCtx, c.subset, c.probability, loss});
  }
  EXPECT_EQ(p.estimates[1], 0.0);
  EXPECT_GT(p.estimates[0], 0.0);
}

TEST(PseudoRegret, Examples) {
  const std::vector<CogFunction> fs{constant(1), constant(2)};
  const std::map<Subset, double> table{{1, 0.2}, {2, 0.8}};
  std::vector<CogRound> h(4, CogRound{kCtx, 1, 1.0, 0.0});
  const std::vector<std::map<Subset, double>> tables(4, table);
  EXPECT_DOUBLE_EQ(cog_pseudo_regret(h, fs, tables), 0.0);
  h[0].subset = 2;
  h[1].subset = 2;
  EXPECT_NEAR(cog_pseudo_regret(h, fs, tables), 0.3, 1e-15);
  EXPECT_EQ(cog_pseudo_regret({}, fs, {}), 0.0);
}

TEST(MaxoutBandit, FindsTheBetterLever) {
  const auto r = run_maxout_bandit(8, 5000, 0.1);
  EXPECT_GT(r.better_frequency, 0.85);
  EXPECT_LT(r.pseudo_regret, 0.12);
  EXPECT_EQ(r.history.size(), 5000u);
  const auto again = run_maxout_bandit(8, 5000, 0.1);
  EXPECT_EQ(again.pseudo_regret, r.pseudo_regret);
}
