#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "gated/regret.hpp"
#include "gated/signal.hpp"
#include "probes.hpp"

using namespace gated;
using gated::testing::uniform_vec;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// One-player, one-sample round with scalar output.
RoundRecord round_of(long t, bool active, const Eigen::VectorXd& w, const Eigen::VectorXd& x, double c1, double c2,
                     double y, const LossFn& loss = {}) {
  RoundRecord r;
  r.t = t;
  SampleRecord s;
  s.x = x;
  s.y = vec({y});
  PlayerSample ps;
  ps.active = active;
  ps.input = x;
  ps.c1 = vec({c1});
  ps.c2 = vec({c2});
  const Eigen::VectorXd out = ps.c1 * w.dot(x) + ps.c2;
  s.net_out = out;
  s.network_loss = loss_eval(loss, out, s.y);
  ps.delta = active ? loss_grad_out(loss, out, s.y).dot(ps.c1) : 0.0;
  s.players.push_back(ps);
  r.samples.push_back(s);
  PlayerRound pr;
  pr.active = active;
  pr.weights = w;
  pr.grad = active ? Eigen::VectorXd(ps.delta * x) : Eigen::VectorXd::Zero(x.size());
  pr.loss_pred = active ? s.network_loss : 0.0;
  pr.loss_grad = active ? pr.grad.dot(w) : 0.0;
  r.players.push_back(pr);
  return r;
}

Signal random_signal(Rng& rng, int rounds, Eigen::Index d, const LossFn& loss) {
  Signal s;
  s.players.push_back({1, 0});
  for (int t = 0; t < rounds; ++t) {
    const double y = loss.kind == LossKind::Logistic ? (uniform01(rng) < 0.5 ? -1.0 : 1.0) : 2.0 * uniform01(rng) - 1.0;
    s.rounds.push_back(round_of(t, uniform01(rng) < 0.6, uniform_vec(rng, d), uniform_vec(rng, d), 0.5 + uniform01(rng),
                                uniform01(rng) - 0.5, y, loss));
  }
  return s;
}

// Smallest objective over a grid of the 2-d ball.
double grid_min(const std::function<double(const Eigen::VectorXd&)>& f, const Ball& ball) {
  double best = f(ball.center);
  const int n = 250;
  for (int i = -n; i <= n; ++i) {
    for (int k = -n; k <= n; ++k) {
      const Eigen::VectorXd v = ball.center + ball.radius() * vec({double(i) / n, double(k) / n});
      if (!ball.contains(v)) continue;
      best = std::min(best, f(v));
    }
  }
  return best;
}

}  // namespace

TEST(RoundLosses, DiamondValues) {
  // Player h1 on the diamond net: input 1, downstream weight 2, output 2, label 0.
  const auto r = round_of(0, true, vec({1.0}), vec({1.0}), 2.0, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(player_loss_pred(r, 0), 4.0);
  EXPECT_DOUBLE_EQ(r.players[0].grad[0], 8.0);
  EXPECT_DOUBLE_EQ(player_loss_grad(r, 0), 8.0);
  EXPECT_DOUBLE_EQ(replay_loss_pred(r, 0, vec({1.0}), LossFn{}), 4.0);
  const auto off = round_of(1, false, vec({1.0}), vec({1.0}), 2.0, 0.0, 0.0);
  EXPECT_EQ(player_loss_pred(off, 0), 0.0);
  EXPECT_EQ(player_loss_grad(off, 0), 0.0);
}

TEST(Hindsight, LinearClosedForm) {
  Signal s;
  s.players.push_back({1, 0});
  for (int t = 0; t < 2; ++t) {
    RoundRecord r;
    r.players.push_back(PlayerRound{true, vec({0.0, 0.0}), vec({1.0, 0.0}), 0.0, 0.0});
    s.rounds.push_back(r);
  }
  RoundRecord idle;
  idle.players.push_back(PlayerRound{false, vec({0.0, 0.0}), vec({0.0, 0.0}), 0.0, 0.0});
  s.rounds.push_back(idle);
  const Ball ball{vec({0.0, 0.0}), 2.0};
  const auto c = hindsight_best_linear(s, 0, ball);
  EXPECT_EQ(c.w, vec({-1.0, 0.0}));
  EXPECT_DOUBLE_EQ(c.cumulative, -2.0);
  const double grid = grid_min([](const Eigen::VectorXd& v) { return 2.0 * v[0]; }, ball);
  EXPECT_NEAR(c.cumulative, grid, 1e-9);
}

TEST(Hindsight, ConvexMatchesGridSearch) {
  Rng rng(41);
  for (LossKind kind : {LossKind::MeanSquaredError, LossKind::Logistic}) {
    const LossFn loss{kind, 1.0};
    for (int trial = 0; trial < 4; ++trial) {
      const Signal s = random_signal(rng, 30, 2, loss);
      const Ball ball{uniform_vec(rng, 2, 0.5), 1.0 + 2.0 * uniform01(rng)};
      const auto c = hindsight_best_convex(s, 0, ball, loss);
      EXPECT_TRUE(ball.contains(c.w));
      EXPECT_TRUE(c.converged);
      auto f = [&](const Eigen::VectorXd& w) {
        double total = 0.0;
        for (const auto& r : s.rounds) total += replay_loss_pred(r, 0, w, loss);
        return total;
      };
      const double grid = grid_min(f, ball);
      EXPECT_LE(c.cumulative, grid + 1e-9);
      EXPECT_GE(c.cumulative, grid - 1e-2);
      EXPECT_GE(c.residual, 0.0);
      EXPECT_LE(c.residual, 1e-6);
    }
  }
}

TEST(Regret, EpsilonEqualsRegret) {
  Rng rng(42);
  for (GameMode mode : {GameMode::Pred, GameMode::Grad}) {
    for (LossKind kind : {LossKind::MeanSquaredError, LossKind::Logistic}) {
      const LossFn loss{kind, 1.0};
      const Signal s = random_signal(rng, 60, 3, loss);
      const Ball ball{Eigen::VectorXd::Zero(3), 2.0};
      for (long prefix : {10L, 40L, -1L}) {
        const auto r = gated_regret(s, 0, ball, mode, loss, prefix);
        EXPECT_NEAR(cce_epsilon(s, 0, ball, mode, loss, prefix), r.value, 1e-9);
      }
    }
  }
}

TEST(Regret, PlayingComparatorGivesZeroRegret) {
  // The comparator is optimal in hindsight, so playing it every round gives
  // zero regret up to the solver residual.
  Rng rng(43);
  const LossFn loss{};
  Signal s = random_signal(rng, 40, 2, loss);
  const Ball ball{Eigen::VectorXd::Zero(2), 2.0};
  const auto best = hindsight_best_convex(s, 0, ball, loss);
  Signal replay = s;
  for (auto& r : replay.rounds) {
    const auto& ps = r.samples[0].players[0];
    r = round_of(r.t, r.players[0].active, best.w, ps.input, ps.c1[0], ps.c2[0], r.samples[0].y[0]);
  }
  const auto rep = gated_regret(replay, 0, ball, GameMode::Pred, loss);
  EXPECT_NEAR(rep.value, 0.0, 1e-9);
}

TEST(Regret, InactiveRoundsDoNotCount) {
  Rng rng(44);
  const LossFn loss{};
  Signal s = random_signal(rng, 50, 2, loss);
  const Ball ball{Eigen::VectorXd::Zero(2), 2.0};
  const auto before = gated_regret(s, 0, ball, GameMode::Pred, loss);

  // Moving inactive rounds around and changing their content is invisible.
  Signal shuffled;
  shuffled.players = s.players;
  std::vector<RoundRecord> idle;
  for (auto r : s.rounds) {
    if (r.players[0].active) {
      shuffled.rounds.push_back(r);
    } else {
      r.samples[0].y[0] = 100.0;
      idle.push_back(r);
    }
  }
  std::reverse(idle.begin(), idle.end());
  shuffled.rounds.insert(shuffled.rounds.begin(), idle.begin(), idle.end());
  const auto after = gated_regret(shuffled, 0, ball, GameMode::Pred, loss);
  EXPECT_EQ(after.t_j, before.t_j);
  EXPECT_NEAR(after.value, before.value, 1e-12);

  Signal none;
  none.players = s.players;
  none.rounds = idle;
  EXPECT_TRUE(gated_regret(none, 0, ball, GameMode::Pred, loss).inactive);
}

TEST(Regret, RunningLinearMatchesBatch) {
  Rng rng(45);
  const Signal s = random_signal(rng, 80, 3, LossFn{});
  const Ball ball{vec({0.1, 0.0, -0.2}), 1.5};
  RunningLinearRegret running(ball);
  for (const auto& r : s.rounds) {
    if (r.players[0].active) running.add(r.players[0].grad, r.players[0].weights);
  }
  const auto batch = gated_regret(s, 0, ball, GameMode::Grad, LossFn{});
  EXPECT_EQ(running.t_j(), batch.t_j);
  EXPECT_NEAR(running.value(), batch.value, 1e-12);
}

TEST(GainGradient, SumsActiveGradients) {
  Signal s;
  s.players.push_back({1, 0});
  for (int t = 0; t < 3; ++t) {
    RoundRecord r;
    r.players.push_back(PlayerRound{t != 1, vec({0.0}), vec({double(t + 1)}), 0.0, 0.0});
    s.rounds.push_back(r);
  }
  EXPECT_DOUBLE_EQ(empirical_gain_grad(s, 0, 0.5, vec({1.0}))[0], 1.0 - 0.5 * (1.0 + 3.0));
  EXPECT_DOUBLE_EQ(empirical_gain_grad(s, 0, 0.5, vec({1.0}), 1)[0], 0.5);
}

TEST(Signal, JsonRoundTrip) {
  Rng rng(46);
  Signal s = random_signal(rng, 5, 2, LossFn{});
  s.rounds[2].cog = CogDecision{"+-|3", 1, 2, 0.95, false, 0.25};
  std::stringstream io;
  write_signal(io, s);
  const auto back = read_rounds(io);
  ASSERT_EQ(back.size(), s.rounds.size());
  for (std::size_t t = 0; t < back.size(); ++t) {
    EXPECT_EQ(round_to_json(back[t]), round_to_json(s.rounds[t]));
    EXPECT_EQ(back[t].players[0].weights, s.rounds[t].players[0].weights);
  }
  ASSERT_TRUE(back[2].cog.has_value());
  EXPECT_EQ(back[2].cog->probability, 0.95);
  EXPECT_EQ(s.active_count(0), static_cast<long>(s.active_rounds(0).size()));
}
