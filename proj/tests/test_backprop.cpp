#include <cmath>

#include <gtest/gtest.h>

#include "gated/backprop.hpp"
#include "gated/errors.hpp"
#include "gated/pathsum.hpp"
#include "gated/random_net.hpp"
#include "nets.hpp"
#include "probes.hpp"

using namespace gated;
using gated::testing::Diamond;
using gated::testing::gate_of;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

struct Pass {
  ActiveSet active;
  ForwardTrace trace;
  BackpropTrace bp;
};

Pass run(const Dag& dag, const WeightState& w, const LossFn& loss, const Eigen::VectorXd& y) {
  Pass p;
  p.active = gate_of(dag, w);
  p.trace = feedforward(dag, w, p.active);
  p.bp = backprop(dag, w, p.active, p.trace, loss_grad_out(loss, p.trace.net_out, y));
  return p;
}

}  // namespace

TEST(Loss, Values) {
  const LossFn mse{LossKind::MeanSquaredError, 1.0};
  EXPECT_DOUBLE_EQ(loss_eval(mse, vec({2.0, 0.0}), vec({0.5, 1.0})), 2.25 + 1.0);
  EXPECT_DOUBLE_EQ(loss_grad_out(mse, vec({2.0}), vec({0.5}))[0], 3.0);

  const LossFn logistic{LossKind::Logistic, 1.0};
  EXPECT_NEAR(loss_eval(logistic, vec({0.0}), vec({1.0})), std::log(2.0), 1e-15);
  EXPECT_NEAR(loss_grad_out(logistic, vec({0.0}), vec({1.0}))[0], -0.5, 1e-15);
  EXPECT_NEAR(loss_eval(logistic, vec({-800.0}), vec({1.0})), 800.0, 1e-9);

  const LossFn logloss{LossKind::LogLoss, 1.0};
  EXPECT_NEAR(loss_eval(logloss, vec({std::exp(-2.0)}), vec({0.0})), 2.0, 1e-14);
  EXPECT_THROW(loss_eval(logloss, vec({0.0}), vec({0.0})), LossDomainError);
  EXPECT_THROW(loss_grad_out(logloss, vec({-1.0}), vec({0.0})), LossDomainError);
}

TEST(Loss, Names) {
  EXPECT_EQ(loss_kind_from_string("logistic"), LossKind::Logistic);
  EXPECT_STREQ(to_string(LossKind::LogLoss), "log_loss");
  EXPECT_THROW(loss_kind_from_string("hinge"), ConfigError);
  EXPECT_DOUBLE_EQ(mse_exp_concavity(2.0), 0.125);
}

TEST(Loss, GradientsMatchDifferences) {
  Rng rng(3);
  for (LossKind kind : {LossKind::MeanSquaredError, LossKind::Logistic, LossKind::LogLoss}) {
    const LossFn loss{kind, 1.0};
    for (int i = 0; i < 100; ++i) {
      Eigen::VectorXd out = gated::testing::uniform_vec(rng, 2, 3.0);
      if (kind == LossKind::LogLoss) out = out.cwiseAbs().array() + 0.1;
      const Eigen::VectorXd y = gated::testing::random_label(rng, loss, 2);
      const Eigen::VectorXd g = loss_grad_out(loss, out, y);
      for (Eigen::Index k = 0; k < 2; ++k) {
        Eigen::VectorXd up = out, dn = out;
        up[k] += 1e-6;
        dn[k] -= 1e-6;
        EXPECT_NEAR(g[k], (loss_eval(loss, up, y) - loss_eval(loss, dn, y)) / 2e-6, 1e-6);
      }
    }
  }
}

TEST(Backprop, DiamondErrors) {
  Diamond d;
  const auto p = run(d.dag, d.w, LossFn{}, vec({0.0}));
  EXPECT_DOUBLE_EQ(p.bp.g[0], 4.0);
  EXPECT_DOUBLE_EQ(p.bp.delta[d.o], 4.0);
  EXPECT_DOUBLE_EQ(p.bp.delta[d.h1], 8.0);
  EXPECT_EQ(p.bp.delta[d.h2], 0.0);
  EXPECT_DOUBLE_EQ(p.bp.grad_of({d.h1, 0})[0], 8.0);
  EXPECT_EQ(p.bp.grad_of({d.h2, 0}), Eigen::VectorXd::Zero(1));
  EXPECT_EQ(p.bp.grad_of({d.o, 0}), vec({4.0, 0.0}));
}

TEST(Backprop, MaxoutGradientGoesToWinner) {
  Dag dag;
  const UnitId x = dag.add_unit("x", UnitKind::source());
  const UnitId m = dag.add_unit("m", UnitKind::maxout(2));
  dag.add_edge(x, m);
  dag.add_output(m);
  WeightState w = WeightState::zeros(dag);
  w.input << 2.0;
  w.w[m][0] << -1.0;
  w.w[m][1] << 1.0;
  const auto p = run(dag, w, LossFn{}, vec({0.0}));
  EXPECT_EQ(p.bp.grad_of({m, 0})[0], 0.0);
  EXPECT_DOUBLE_EQ(p.bp.grad_of({m, 1})[0], 8.0);
}

TEST(Backprop, MatchesPathSumsOnRandomNets) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const Dag dag = random_dag(rng);
    const WeightState w = random_weights(dag, rng);
    const auto active = compute_active_set(dag, w, GateSpec{}, rng);
    const auto trace = feedforward(dag, w, active);
    const Eigen::VectorXd g = gated::testing::uniform_vec(rng, trace.net_out.size());
    const auto bp = backprop(dag, w, active, trace, g);
    const PathOracle oracle(dag, w, active);
    for (UnitId j = 0; j < dag.size(); ++j) {
      if (dag.kind(j).is_source()) continue;
      if (!active.active(j)) {
        EXPECT_EQ(bp.delta[j], 0.0);
        continue;
      }
      const Eigen::VectorXd down = oracle.sigma_to_out(j);
      EXPECT_NEAR(bp.delta[j], g.dot(down), 1e-9);
      if (dag.kind(j).type == UnitType::MaxPool) continue;
      const int c = dag.kind(j).type == UnitType::Maxout ? active.maxout_winner[j] : 0;
      const auto& wj = w.w[j][static_cast<std::size_t>(c)];
      EXPECT_NEAR(bp.grad_of({j, c}).dot(wj), bp.delta[j] * oracle.sigma_source_to(j), 1e-9);
    }
  }
}

TEST(Backprop, FiniteDifferencesAtSafePoints) {
  Rng rng(22);
  int probes = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const Dag dag = random_dag(rng);
    const WeightState w = random_weights(dag, rng);
    const LossFn loss{trial % 2 ? LossKind::Logistic : LossKind::MeanSquaredError, 1.0};
    const Eigen::VectorXd y = gated::testing::random_label(rng, loss, static_cast<Eigen::Index>(dag.outputs().size()));
    const auto fd = finite_diff_grad(dag, w, GateSpec{}, w.input, y, loss, 1e-6, 1e-4);
    if (fd.near_boundary) continue;
    const auto p = run(dag, w, loss, y);
    EXPECT_NEAR(fd.loss, loss_eval(loss, p.trace.net_out, y), 1e-12);
    for (UnitId u = 0; u < dag.size(); ++u) {
      for (std::size_t c = 0; c < fd.grad[u].size(); ++c) {
        const Eigen::VectorXd& a = p.bp.grad[u][c];
        const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
        EXPECT_LT((a - fd.grad[u][c]).cwiseAbs().maxCoeff() / scale, 1e-6);
        ++probes;
      }
    }
  }
  EXPECT_GT(probes, 300);
}

TEST(Backprop, MarginFlagRaisedAtKink) {
  Diamond d(1.0, 0.0, -1.0);
  const auto fd = finite_diff_grad(d.dag, d.w, GateSpec{}, d.w.input, vec({0.0}), LossFn{});
  EXPECT_TRUE(fd.near_boundary);
  Diamond safe;
  EXPECT_FALSE(finite_diff_grad(safe.dag, safe.w, GateSpec{}, safe.w.input, vec({0.0}), LossFn{}).near_boundary);
}

TEST(AffineForm, ReproducesFrozenLoss) {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const Dag dag = random_dag(rng);
    WeightState w = random_weights(dag, rng);
    const auto active = compute_active_set(dag, w, GateSpec{}, rng);
    const auto trace = feedforward(dag, w, active);
    for (PlayerId p : dag.players()) {
      if (!active.player_active(p)) continue;
      const auto form = affine_form(dag, w, active, trace, p.unit);
      const Eigen::VectorXd other = gated::testing::uniform_vec(rng, w.w[p.unit][0].size(), 2.0);
      WeightState moved = w;
      moved.w[p.unit][static_cast<std::size_t>(p.component)] = other;
      const Eigen::VectorXd expect = feedforward(dag, moved, active).net_out;
      const Eigen::VectorXd got = form.c1 * other.dot(trace.in[p.unit]) + form.c2;
      EXPECT_LT((expect - got).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Convexity, FrozenGatingSegmentsAreConvex) {
  Rng rng(24);
  int ran = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto probe = gated::testing::convexity_probe(rng);
    if (!probe.ran) continue;
    ++ran;
    EXPECT_LE(probe.violation, 1e-10);
  }
  EXPECT_GT(ran, 1000);
}

TEST(Convexity, LinearizedLossIsLinear) {
  Diamond d;
  const auto p = run(d.dag, d.w, LossFn{}, vec({0.0}));
  const Eigen::VectorXd g = p.bp.grad_of({d.h1, 0});
  const Eigen::VectorXd a = vec({0.3}), b = vec({-2.0});
  EXPECT_DOUBLE_EQ(g.dot(0.5 * (a + b)), 0.5 * (g.dot(a) + g.dot(b)));
}
