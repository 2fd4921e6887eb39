// SPDX-License-Identifier: Apache-2.0

#include "biped_gait/gait_constraints.hpp"
#include "support/lagrange_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace {

using biped::Constraint;
using biped::GaitProblemConfig;
using biped::PolynomialGait;
using biped::RobotParams;
using biped::Vec2;
using biped::Vec4;
using biped::Vec5;

const RobotParams kRabbit = RobotParams::rabbit();

PolynomialGait random_gait(std::mt19937_64& rng, double scale) {
  const auto cfg = GaitProblemConfig::defaults();
  std::uniform_real_distribution<double> u(-scale, scale);
  biped::FreeParams z;
  for (int i = 0; i < biped::kFreeParams; ++i) z.z[i] = u(rng);
  return biped::assemble_gait(z, cfg.q_init, cfg.q_final, cfg.step_duration());
}

PolynomialGait standing_gait(const Vec5& q) {
  PolynomialGait g;
  g.duration = 0.5;
  g.alpha.col(0) = q;
  return g;
}

TEST(GaitConstraints, StandingStillCarriesTheWeight) {
  const Vec5 q(0.05, 0.2, -0.3, 0.4, 0.3);
  const auto s = biped::sample_gait(standing_gait(q), kRabbit, 11);
  const Vec5 g = oracle::gravity_vector(q, kRabbit);
  for (std::size_t i = 0; i < s.time.size(); ++i) {
    EXPECT_NEAR(s.reaction[i].x(), 0.0, 1e-12);
    EXPECT_NEAR(s.reaction[i].y(), 392.4, 1e-9);
    EXPECT_LE((s.torque[i] - g.tail<4>()).norm(), 1e-10);
    EXPECT_NEAR(s.zero_dynamics[i], g[0], 1e-10);
  }
}

TEST(GaitConstraints, InverseDynamicsMatchesLagrangeOracle) {
  std::mt19937_64 rng(301);
  for (int n = 0; n < 20; ++n) {
    const auto gait = random_gait(rng, 3.0);
    for (double t : {0.0, 0.13, 0.31, 0.5}) {
      const auto x = biped::eval_gait(gait, t);
      const Vec5 ref = oracle::mass_matrix(x.q, kRabbit) * x.qddot +
                       oracle::bias_vector(x.q, x.qdot, kRabbit);
      const auto id = biped::inverse_dynamics_split(x.q, x.qdot, x.qddot, kRabbit);
      const double scale = std::max(1.0, ref.norm());
      EXPECT_NEAR(id.zero_dynamics_residual, ref[0], 1e-8 * scale);
      EXPECT_LE((id.torques - ref.tail<4>()).norm(), 1e-8 * scale);
    }
  }
}

TEST(GaitConstraints, GroundReactionIsRateOfMomentumPlusWeight) {
  std::mt19937_64 rng(303);
  const double m = kRabbit.total_mass();
  for (int n = 0; n < 10; ++n) {
    const auto gait = random_gait(rng, 3.0);
    auto com_at = [&](double t) { return oracle::com(biped::eval_gait(gait, t).q, kRabbit); };
    const double h = 1e-3;
    for (double t : {0.1, 0.25, 0.4}) {
      const Vec2 acc = (-com_at(t + 2 * h) + 16 * com_at(t + h) - 30 * com_at(t) +
                        16 * com_at(t - h) - com_at(t - 2 * h)) /
                       (12 * h * h);
      const Vec2 ref = m * (acc + Vec2(0.0, kRabbit.gravity));
      const auto x = biped::eval_gait(gait, t);
      EXPECT_LE((biped::ground_reaction(x.q, x.qdot, x.qddot, kRabbit) - ref).norm(),
                1e-5 * ref.norm());
    }
  }
}

TEST(GaitConstraints, ViolationPrimitives) {
  const std::vector<double> heights{0.05, -0.02, 0.01};
  EXPECT_NEAR(biped::clearance_violation(heights, 1e-4), 0.0201, 1e-15);
  const std::vector<double> torques{-120.0, 180.0, 10.0};
  EXPECT_DOUBLE_EQ(biped::magnitude_violation(torques, 150.0), 30.0);
  const std::vector<double> knees{0.3, 0.7, -0.05};
  EXPECT_NEAR(biped::bound_violation(knees, 0.0, 0.6), 0.1, 1e-15);
  const std::vector<Vec2> forces{Vec2(80.0, 100.0), Vec2(-10.0, 200.0)};
  EXPECT_NEAR(biped::friction_violation(forces, 0.7), 10.0, 1e-12);
  const std::vector<Vec2> lifting{Vec2(0.0, -5.0), Vec2(0.0, 50.0)};
  EXPECT_NEAR(biped::normal_force_violation(lifting, 1e-4), 5.0001, 1e-12);
  const std::vector<double> ok{0.1, 0.2};
  EXPECT_EQ(biped::clearance_violation(ok, 1e-4), 0.0);
  EXPECT_EQ(biped::magnitude_violation(ok, 1.0), 0.0);
}

double integrate(const std::vector<double>& w, double duration, int power) {
  const int n = static_cast<int>(w.size());
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += w[static_cast<std::size_t>(i)] * std::pow(duration * i / (n - 1), power);
  return s;
}

TEST(GaitConstraints, SimpsonWeightsAreExactForCubics) {
  for (int n : {3, 4, 11, 50, 51, 101}) {
    const auto w = biped::simpson_weights(n, 0.5);
    ASSERT_EQ(static_cast<int>(w.size()), n);
    for (int p = 0; p <= 3; ++p) {
      EXPECT_NEAR(integrate(w, 0.5, p), std::pow(0.5, p + 1) / (p + 1), 1e-15) << "n=" << n << " p=" << p;
    }
  }
  EXPECT_THROW(biped::simpson_weights(2, 0.5), biped::GaitError);
}

TEST(GaitConstraints, ObjectiveConvergesWithTheGrid) {
  std::mt19937_64 rng(307);
  const auto gait = random_gait(rng, 2.0);
  const double fine = biped::objective(gait, kRabbit, 2001);
  EXPECT_LE(std::abs(biped::objective(gait, kRabbit, 51) - fine), 1e-3 * fine);
  EXPECT_LE(std::abs(biped::objective(gait, kRabbit, 101) - fine), 1e-4 * fine);
}

TEST(GaitConstraints, ObjectiveTermsReproduceTheObjective) {
  std::mt19937_64 rng(311);
  const auto cfg = GaitProblemConfig::defaults();
  const auto gait = random_gait(rng, 2.0);
  const auto r = biped::constraint_residuals(gait, kRabbit, cfg);
  double sum = 0.0;
  for (double t : r.objective_terms) sum += t * t;
  EXPECT_NEAR(sum, r.report.objective, 1e-10 * r.report.objective);
  EXPECT_NEAR(r.report.objective, biped::objective(gait, kRabbit, cfg.grid_size), 1e-10 * sum);
  EXPECT_EQ(r.equalities.size(), static_cast<std::size_t>(10 + 2 + cfg.grid_size + 5));
  for (double v : r.inequalities) EXPECT_GE(v, 0.0);
}

TEST(GaitConstraints, ReportMatchesIndependentScan) {
  std::mt19937_64 rng(313);
  const auto cfg = GaitProblemConfig::defaults();
  for (int n = 0; n < 10; ++n) {
    const auto gait = random_gait(rng, 4.0);
    const auto rep = biped::evaluate_constraints(gait, kRabbit, cfg);
    double clearance = 0.0, knee = 0.0, torque = 0.0, rate = 0.0, zd = 0.0;
    for (int i = 0; i < cfg.grid_size; ++i) {
      const double t = i + 1 == cfg.grid_size ? gait.duration : gait.duration * i / (cfg.grid_size - 1);
      const auto x = biped::eval_gait(gait, t);
      const Vec5 tau = oracle::mass_matrix(x.q, kRabbit) * x.qddot +
                       oracle::bias_vector(x.q, x.qdot, kRabbit);
      const double y = oracle::swing_foot(x.q, kRabbit).y();
      if (i == 0 || i + 1 == cfg.grid_size) {
        clearance = std::max(clearance, std::abs(y));
      } else {
        clearance = std::max(clearance, cfg.clearance_margin - y);
      }
      for (int k : {1, 4}) knee = std::max({knee, -x.q[k], x.q[k] - 0.6});
      torque = std::max(torque, tau.tail<4>().cwiseAbs().maxCoeff() - cfg.torque_max);
      rate = std::max(rate, x.qdot.cwiseAbs().maxCoeff() - cfg.rate_max);
      zd = std::max(zd, std::abs(tau[0]));
    }
    EXPECT_NEAR(rep[Constraint::kClearance], clearance, 1e-12);
    EXPECT_NEAR(rep[Constraint::kKnee], knee, 1e-12);
    EXPECT_NEAR(rep[Constraint::kTorque], torque, 1e-7 * std::max(1.0, torque));
    EXPECT_NEAR(rep[Constraint::kRate], rate, 1e-12);
    EXPECT_NEAR(rep[Constraint::kZeroDynamics], zd, 1e-7 * std::max(1.0, zd));
    EXPECT_LE(rep[Constraint::kBoundary], 1e-12);
    EXPECT_EQ(rep.feasible, rep.max_violation() <= cfg.violation_threshold);
  }
}

TEST(GaitConstraints, ZeroCoefficientGaitMissesTheBoundaries) {
  const auto cfg = GaitProblemConfig::defaults();
  PolynomialGait g;
  g.duration = 0.5;
  const auto rep = biped::evaluate_constraints(g, kRabbit, cfg);
  EXPECT_NEAR(rep[Constraint::kBoundary], 0.6499, 1e-12);
  EXPECT_FALSE(rep.feasible);
}

TEST(GaitConstraints, NonFiniteGaitIsNeverFeasible) {
  auto g = standing_gait(Vec5::Zero());
  g.alpha(2, 3) = std::numeric_limits<double>::quiet_NaN();
  const auto rep = biped::evaluate_constraints(g, kRabbit, GaitProblemConfig::defaults());
  EXPECT_FALSE(rep.feasible);
  EXPECT_GE(rep.max_violation(), biped::kInfeasibleSentinel);
}

TEST(GaitConstraints, TighterTorqueLimitRaisesTheViolation) {
  std::mt19937_64 rng(317);
  auto cfg = GaitProblemConfig::defaults();
  const auto gait = random_gait(rng, 1.0);
  const auto loose = biped::evaluate_constraints(gait, kRabbit, cfg);
  cfg.torque_max = 0.0;
  const auto tight = biped::evaluate_constraints(gait, kRabbit, cfg);
  const auto s = biped::sample_gait(gait, kRabbit, cfg.grid_size);
  double peak = 0.0;
  for (const Vec4& t : s.torque) peak = std::max(peak, t.cwiseAbs().maxCoeff());
  EXPECT_DOUBLE_EQ(tight[Constraint::kTorque], peak);
  EXPECT_GE(tight[Constraint::kTorque], loose[Constraint::kTorque]);
  EXPECT_FALSE(tight.feasible);
}

TEST(GaitConstraints, ConfigValidation) {
  EXPECT_NO_THROW(GaitProblemConfig::defaults().validate());
  auto cfg = GaitProblemConfig::defaults();
  cfg.grid_size = 5;
  EXPECT_THROW(cfg.validate(), biped::GaitError);
  cfg = GaitProblemConfig::defaults();
  cfg.velocity = 0.0;
  EXPECT_THROW(cfg.validate(), biped::GaitError);
  cfg = GaitProblemConfig::defaults();
  cfg.friction = -0.1;
  EXPECT_THROW(cfg.validate(), biped::GaitError);
}

}  // namespace
