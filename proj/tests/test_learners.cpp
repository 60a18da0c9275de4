#include <cmath>

#include <gtest/gtest.h>

#include "gated/errors.hpp"
#include "gated/learners.hpp"
#include "probes.hpp"

using namespace gated;
using gated::testing::uniform_in_ball;
using gated::testing::uniform_vec;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Ball unit_ball(Eigen::Index d) { return Ball{Eigen::VectorXd::Zero(d), 2.0}; }

Eigen::MatrixXd random_spd(Rng& rng, Eigen::Index d) {
  Eigen::MatrixXd M(d, d);
  for (Eigen::Index i = 0; i < d; ++i) M.row(i) = uniform_vec(rng, d).transpose();
  return M * M.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
}

// Brute-force argmin of the A-quadratic over a polar grid of the 2-d ball.
Eigen::VectorXd grid_argmin(const Eigen::VectorXd& w, const Eigen::MatrixXd& A, const Ball& ball) {
  Eigen::VectorXd best = ball.center;
  double best_val = (w - best).dot(A * (w - best));
  const int radial = 800, angular = 4000;
  for (int i = 1; i <= radial; ++i) {
    const double r = ball.radius() * i / radial;
    for (int k = 0; k < angular; ++k) {
      const double th = 2.0 * M_PI * k / angular;
      const Eigen::VectorXd v = ball.center + r * vec({std::cos(th), std::sin(th)});
      const double val = (w - v).dot(A * (w - v));
      if (val < best_val) {
        best_val = val;
        best = v;
      }
    }
  }
  return best;
}

}  // namespace

TEST(EuclidProject, Examples) {
  EXPECT_TRUE(euclid_project(vec({3.0, 4.0}), unit_ball(2)).isApprox(vec({0.6, 0.8}), 1e-15));
  EXPECT_EQ(euclid_project(vec({0.1, -0.2}), unit_ball(2)), vec({0.1, -0.2}));
  const Ball shifted{vec({1.0, 1.0}), 2.0};
  EXPECT_TRUE(euclid_project(vec({1.0, 5.0}), shifted).isApprox(vec({1.0, 2.0}), 1e-15));
}

TEST(EuclidProject, NonExpansive) {
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    const Ball ball{uniform_vec(rng, 3), 0.5 + uniform01(rng)};
    const Eigen::VectorXd w = uniform_vec(rng, 3, 4.0);
    const Eigen::VectorXd p = euclid_project(w, ball);
    EXPECT_TRUE(ball.contains(p));
    const Eigen::VectorXd u = uniform_in_ball(rng, ball.center, ball.radius());
    EXPECT_LE((p - u).norm(), (w - u).norm() + 1e-12);
  }
}

TEST(WeightedProject, IdentityMetricIsEuclidean) {
  Rng rng(32);
  for (int i = 0; i < 200; ++i) {
    const Ball ball{uniform_vec(rng, 3), 1.0};
    const Eigen::VectorXd w = uniform_vec(rng, 3, 3.0);
    EXPECT_LT((weighted_project(w, Eigen::MatrixXd::Identity(3, 3), ball) - euclid_project(w, ball)).norm(), 1e-9);
  }
}

TEST(WeightedProject, InsideIsIdentity) {
  const Eigen::VectorXd w = vec({0.2, 0.3});
  EXPECT_EQ(weighted_project(w, Eigen::Vector2d(100.0, 1.0).asDiagonal(), unit_ball(2)), w);
}

TEST(WeightedProject, MatchesGridSearch) {
  const Eigen::MatrixXd A = Eigen::Vector2d(100.0, 1.0).asDiagonal();
  const Eigen::VectorXd w = vec({2.0, 2.0});
  const Eigen::VectorXd p = weighted_project(w, A, unit_ball(2));
  EXPECT_LE(p.norm(), 1.0);
  EXPECT_LT((p - grid_argmin(w, A, unit_ball(2))).norm(), 1e-3);

  Rng rng(33);
  for (int i = 0; i < 3; ++i) {
    const Eigen::MatrixXd S = random_spd(rng, 2);
    const Ball ball{uniform_vec(rng, 2), 1.0};
    const Eigen::VectorXd x = uniform_vec(rng, 2, 3.0);
    EXPECT_LT((weighted_project(x, S, ball) - grid_argmin(x, S, ball)).norm(), 1e-3);
  }
}

TEST(RankOneUpdate, Examples) {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd inv = rank1_inverse_update(I, vec({1.0, 0.0}), 1.0);
  EXPECT_TRUE(inv.isApprox(Eigen::MatrixXd(Eigen::Vector2d(0.5, 1.0).asDiagonal()), 1e-15));
  EXPECT_EQ(rank1_inverse_update(I, vec({1.0, 0.0}), 0.0), I);
  EXPECT_THROW(rank1_inverse_update(I, vec({1.0, 0.0}), -1.0), NumericalError);
}

TEST(RankOneUpdate, TwentyUpdateChain) {
  Rng rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd A = random_spd(rng, 4);
    Eigen::MatrixXd inv = A.inverse();
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd u = uniform_vec(rng, 4);
      const double c = uniform01(rng);
      A += c * u * u.transpose();
      inv = rank1_inverse_update(inv, u, c);
    }
    EXPECT_LT((A * inv - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Ogd, HandExample) {
  const Bounds b{1.0, 8.0, 1.0, 1.0};
  const auto s = ogd_step(OgdState{vec({0.5}), 0}, vec({1.0}), 8.0, b, unit_ball(1));
  EXPECT_EQ(s.t, 1);
  EXPECT_DOUBLE_EQ(s.w[0], -0.5);
}

TEST(Ogd, ZeroErrorAndViolationFlag) {
  const Bounds b{1.0, 1.0, 1.0, 1.0};
  BoundCheck check;
  const auto s = ogd_step(OgdState{vec({0.25}), 3}, vec({5.0}), 0.0, b, unit_ball(1), &check);
  EXPECT_EQ(s.w, vec({0.25}));
  EXPECT_EQ(s.t, 4);
  EXPECT_FALSE(check.ok);
  EXPECT_DOUBLE_EQ(check.x_norm, 5.0);
}

TEST(Nprop, InitialState) {
  const Bounds b{1.0, 1.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(nprop_beta(b), 0.125);
  const auto s = nprop_init(Eigen::VectorXd::Zero(2), b);
  EXPECT_EQ(s.A, 64.0 * Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(s.A_inv, Eigen::MatrixXd::Identity(2, 2) / 64.0);
}

TEST(Nprop, ZeroErrorLeavesInteriorPoint) {
  const Bounds b{2.0, 1.0, 1.0, 1.0};
  const auto s0 = nprop_init(vec({0.1, 0.2}), b);
  const auto s1 = nprop_step(s0, vec({1.0, 1.0}), 0.0, b, unit_ball(2));
  EXPECT_EQ(s1.A, s0.A);
  EXPECT_EQ(s1.w, s0.w);
  EXPECT_EQ(s1.t, 1);
}

TEST(Nprop, CurvatureMatchesScratchAccumulation) {
  Rng rng(35);
  const Bounds b{2.0, 1.0, 1.5, 0.5};
  const Ball ball = unit_ball(2);
  auto s = nprop_init(Eigen::VectorXd::Zero(2), b);
  Eigen::MatrixXd scratch = s.A;
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd x = uniform_vec(rng, 2);
    const double delta = 2.0 * uniform01(rng) - 1.0;
    s = nprop_step(s, x, delta, b, ball);
    scratch += delta * delta * x * x.transpose();
    EXPECT_LT((s.A - scratch).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT(inverse_drift(s), 1e-6);
    EXPECT_TRUE(ball.contains(s.w));
  }
}

TEST(Gd, CountsBindingProjections) {
  GdState s{vec({0.0}), 0, 0};
  s = gd_step_grad(s, vec({-0.5}), 1.0, unit_ball(1));
  EXPECT_EQ(s.binding, 0);
  s = gd_step_grad(s, vec({-1.0}), 1.0, unit_ball(1));
  EXPECT_EQ(s.binding, 1);
  EXPECT_DOUBLE_EQ(s.w[0], 1.0);
}

TEST(Bounds, Formulas) {
  EXPECT_DOUBLE_EQ(ogd_regret_bound(Bounds{2.0, 1.0, 1.0, 1.0}, 100), 0.3);
  EXPECT_NEAR(nprop_regret_bound(Bounds{1.0, 1.0, 1.0, 1.0}, 3, std::exp(1.0)), 30.0 / std::exp(1.0), 1e-14);
  EXPECT_NEAR(nprop_regret_bound(Bounds{1.0, 1.0, 1.0, 1.0}, 3, std::exp(1.0)), 11.04, 5e-3);
  EXPECT_EQ(ogd_regret_bound(Bounds{}, 0), 0.0);
  EXPECT_NEAR(nprop_regret_bound(Bounds{1.0, 1.0, 1.0, 1.0}, 2, 100), 20.0 * std::log(100.0) / 100.0, 1e-15);
}

TEST(Learner, InactiveRoundsAreNotStepsAndIteratesStayInBall) {
  Rng rng(36);
  for (LearnerKind kind : {LearnerKind::Ogd, LearnerKind::Nprop, LearnerKind::Gd}) {
    const Ball ball{vec({0.5, -0.5}), 1.0};
    Learner l(kind, vec({3.0, 3.0}), Bounds{1.0, 1.0, 1.0, 1.0}, ball, 0.1);
    EXPECT_TRUE(ball.contains(l.weights()));
    for (int t = 0; t < 100; ++t) {
      l.step(uniform_vec(rng, 2, 3.0));
      EXPECT_TRUE(ball.contains(l.weights()));
    }
    EXPECT_EQ(l.active_steps(), 100);
  }
  EXPECT_EQ(learner_kind_from_string("nprop"), LearnerKind::Nprop);
  EXPECT_THROW(learner_kind_from_string("adam"), ConfigError);
}

TEST(SecondOrderBound, SecondOrderLowerBoundHolds) {
  Rng rng(37);
  for (int i = 0; i < 2000; ++i) {
    const auto n = 1 + static_cast<Eigen::Index>(uniform01(rng) * 4);
    const auto d = 1 + static_cast<Eigen::Index>(uniform01(rng) * 3);
    EXPECT_GE(gated::testing::second_order_probe(rng, n, d).slack, -1e-12);
  }
}
