// SPDX-License-Identifier: Apache-2.0

#include "biped_gait/robot_model.hpp"
#include "support/lagrange_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

using biped::JointState;
using biped::Mat5;
using biped::RobotParams;
using biped::Vec2;
using biped::Vec4;
using biped::Vec5;

const RobotParams kRabbit = RobotParams::rabbit();

Vec5 random_rates(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Vec5 v;
  for (int i = 0; i < 5; ++i) v[i] = n(rng);
  return v;
}

JointState rk4_step(const JointState& s, double dt) {
  auto f = [](const JointState& x) {
    JointState d;
    d.q = x.qdot;
    d.qdot = biped::forward_dynamics(x, Vec4::Zero(), kRabbit);
    return d;
  };
  auto axpy = [](const JointState& x, const JointState& d, double h) {
    JointState y;
    y.q = x.q + h * d.q;
    y.qdot = x.qdot + h * d.qdot;
    return y;
  };
  const JointState k1 = f(s);
  const JointState k2 = f(axpy(s, k1, dt / 2));
  const JointState k3 = f(axpy(s, k2, dt / 2));
  const JointState k4 = f(axpy(s, k3, dt));
  JointState out;
  out.q = s.q + dt / 6 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q);
  out.qdot = s.qdot + dt / 6 * (k1.qdot + 2 * k2.qdot + 2 * k3.qdot + k4.qdot);
  return out;
}

double total_energy(const JointState& s) {
  return oracle::kinetic_energy(s.q, s.qdot, kRabbit) + oracle::potential_energy(s.q, kRabbit);
}

TEST(RobotModel, RabbitParametersValidate) {
  EXPECT_NO_THROW(kRabbit.validate());
  EXPECT_NEAR(kRabbit.total_mass(), 40.0, 1e-12);
}

TEST(RobotModel, RejectsNonPhysicalParameters) {
  RobotParams p = kRabbit;
  p.mass[2] = -1.0;
  try {
    p.validate();
    FAIL() << "negative mass accepted";
  } catch (const biped::GaitError& e) {
    EXPECT_EQ(e.code(), biped::ErrorCode::kInvalidArgument);
  }
  p = kRabbit;
  p.length[0] = std::nan("");
  EXPECT_THROW(p.validate(), biped::GaitError);
}

TEST(RobotModel, AngleMapsAreInverse) {
  const Mat5 prod = biped::relative_to_absolute_matrix() * biped::absolute_to_relative_matrix();
  EXPECT_TRUE(prod.isIdentity(0.0));
  std::mt19937_64 rng(3);
  const Vec5 q = oracle::random_angles(rng);
  EXPECT_LE((biped::absolute_to_relative(biped::relative_to_absolute(q)) - q).norm(), 1e-15);
}

TEST(RobotModel, ForwardKinematicsMatchesGeometry) {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 100; ++n) {
    const Vec5 q = oracle::random_angles(rng);
    const auto fk = biped::forward_kinematics(q, kRabbit);
    const auto ref = oracle::chain_at(q, kRabbit);
    EXPECT_EQ(fk.stance_foot.norm(), 0.0);
    EXPECT_NEAR(fk.swing_foot.x(), ref.foot_x, 1e-14);
    EXPECT_NEAR(fk.swing_foot.y(), ref.foot_y, 1e-14);
    for (int i = 0; i < 5; ++i) {
      EXPECT_NEAR(fk.link_com[i].x(), ref.com_x[i], 1e-14);
      EXPECT_NEAR(fk.link_com[i].y(), ref.com_y[i], 1e-14);
    }
    EXPECT_LE((fk.com - oracle::com(q, kRabbit)).norm(), 1e-14);
  }
}

TEST(RobotModel, MassMatrixMatchesEnergyOracle) {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 200; ++n) {
    const Vec5 q = oracle::random_angles(rng, 3.0);
    const Mat5 m = biped::mass_matrix(q, kRabbit);
    const Mat5 ref = oracle::mass_matrix(q, kRabbit);
    EXPECT_LE((m - ref).norm(), 1e-8 * ref.norm()) << "state " << n;
    EXPECT_LE((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(m.llt().info(), Eigen::Success);
  }
}

TEST(RobotModel, BiasMatchesLagrangeOracle) {
  std::mt19937_64 rng(13);
  for (int n = 0; n < 100; ++n) {
    const Vec5 q = oracle::random_angles(rng, 3.0);
    const Vec5 qdot = random_rates(rng, 3.0);
    const auto b = biped::bias_and_gravity(q, qdot, kRabbit);
    const Vec5 h = b.coriolis * qdot + b.gravity;
    const Vec5 ref = oracle::bias_vector(q, qdot, kRabbit);
    EXPECT_LE((h - ref).norm(), 1e-8 * ref.norm()) << "state " << n;
    const Vec5 gref = oracle::gravity_vector(q, kRabbit);
    EXPECT_LE((b.gravity - gref).norm(), 1e-12 * gref.norm());
  }
}

TEST(RobotModel, MdotMinusTwoCIsSkew) {
  std::mt19937_64 rng(17);
  for (int n = 0; n < 100; ++n) {
    const Vec5 q = oracle::random_angles(rng, 3.0);
    const Vec5 qdot = random_rates(rng, 3.0);
    Mat5 mdot = Mat5::Zero();
    for (int k = 0; k < 5; ++k) {
      mdot += oracle::stencil([](const Vec5& x) { return biped::mass_matrix(x, kRabbit); }, q, k,
                              1e-3) *
              qdot[k];
    }
    const Mat5 n_mat = mdot - 2.0 * biped::bias_and_gravity(q, qdot, kRabbit).coriolis;
    EXPECT_LE((n_mat + n_mat.transpose()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(RobotModel, EnergyHelpersMatchOracle) {
  std::mt19937_64 rng(19);
  const JointState s{oracle::random_angles(rng), random_rates(rng, 2.0)};
  EXPECT_NEAR(biped::kinetic_energy(s, kRabbit), oracle::kinetic_energy(s.q, s.qdot, kRabbit),
              1e-12);
  EXPECT_NEAR(biped::potential_energy(s.q, kRabbit), oracle::potential_energy(s.q, kRabbit), 1e-12);
}

TEST(RobotModel, UnforcedMotionConservesEnergy) {
  std::mt19937_64 rng(23);
  for (int n = 0; n < 10; ++n) {
    JointState s{oracle::random_angles(rng, 0.5), random_rates(rng, 1.0)};
    const double e0 = total_energy(s);
    double drift = 0.0;
    for (int k = 0; k < 10000; ++k) {
      s = rk4_step(s, 1e-4);
      drift = std::max(drift, std::abs(total_energy(s) - e0));
    }
    EXPECT_LE(drift / std::abs(e0), 1e-6) << "state " << n;
  }
}

TEST(RobotModel, ForwardDynamicsSolvesEquationsOfMotion) {
  std::mt19937_64 rng(29);
  const JointState s{oracle::random_angles(rng), random_rates(rng, 2.0)};
  const Vec4 u(10.0, -20.0, 5.0, 30.0);
  const Vec5 qddot = biped::forward_dynamics(s, u, kRabbit);
  Vec5 tau = Vec5::Zero();
  tau.tail<4>() = u;
  const Vec5 lhs = oracle::mass_matrix(s.q, kRabbit) * qddot + oracle::bias_vector(s.q, s.qdot, kRabbit);
  EXPECT_LE((lhs - tau).norm(), 1e-7 * tau.norm());
}

TEST(RobotModel, JacobiansMatchDifferences) {
  std::mt19937_64 rng(31);
  for (int n = 0; n < 20; ++n) {
    const Vec5 q = oracle::random_angles(rng);
    const auto jf = biped::swing_foot_jacobian(q, kRabbit);
    EXPECT_LE((jf - oracle::extended_foot_jacobian(q, kRabbit).leftCols<5>()).norm(), 1e-13);
    biped::Mat25 jc;
    for (int k = 0; k < 5; ++k) {
      jc.col(k) = oracle::stencil([](const Vec5& x) { return oracle::com(x, kRabbit); }, q, k, 1e-3);
    }
    EXPECT_LE((biped::com_jacobian(q, kRabbit) - jc).norm(), 1e-10);
  }
}

TEST(RobotModel, ComAccelerationMatchesSecondDifference) {
  std::mt19937_64 rng(37);
  for (int n = 0; n < 20; ++n) {
    const Vec5 q = oracle::random_angles(rng);
    const Vec5 qd = random_rates(rng, 2.0);
    const Vec5 qdd = random_rates(rng, 5.0);
    auto path = [&](double t) { return oracle::com(q + qd * t + 0.5 * qdd * t * t, kRabbit); };
    const double h = 1e-3;
    const Vec2 ref =
        (-path(2 * h) + 16 * path(h) - 30 * path(0) + 16 * path(-h) - path(-2 * h)) / (12 * h * h);
    EXPECT_LE((biped::com_acceleration(q, qd, qdd, kRabbit) - ref).norm(), 1e-6);
  }
}

TEST(RobotModel, InverseKinematicsRoundTrip) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int solved = 0;
  for (int n = 0; n < 200; ++n) {
    const Vec2 hip(-0.2 + 0.4 * u(rng), 0.6 + 0.18 * u(rng));
    const Vec2 foot(-0.4 + 0.8 * u(rng), 0.1 * u(rng));
    const double trunk = -0.5 + u(rng);
    biped::IkSolution sol;
    try {
      sol = biped::inverse_kinematics(hip, foot, trunk, kRabbit);
    } catch (const biped::GaitError& e) {
      EXPECT_EQ(e.code(), biped::ErrorCode::kUnreachable);
      continue;
    }
    ++solved;
    const auto fk = biped::forward_kinematics(sol.q, kRabbit);
    EXPECT_LE((fk.hip - hip).norm(), 1e-12);
    EXPECT_LE((fk.swing_foot - foot).norm(), 1e-12);
    EXPECT_NEAR(oracle::chain_at(sol.q, kRabbit).angle[2], trunk, 1e-12);
    EXPECT_GE(sol.q[1], 0.0);
    EXPECT_GE(sol.q[4], 0.0);
  }
  EXPECT_GT(solved, 100);
}

TEST(RobotModel, InverseKinematicsRejectsUnreachableTargets) {
  try {
    biped::inverse_kinematics(Vec2(0.0, 2.0), Vec2(0.3, 0.0), 0.0, kRabbit);
    FAIL() << "hip out of reach accepted";
  } catch (const biped::GaitError& e) {
    EXPECT_EQ(e.code(), biped::ErrorCode::kUnreachable);
  }
}

}  // namespace
