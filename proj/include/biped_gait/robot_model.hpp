// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "biped_gait/types.hpp"

#include <array>

namespace biped {

// Planar five-link walker with a point stance foot pinned at the origin.
//
// Link order follows the chain from the stance foot: 0 stance shin,
// 1 stance thigh, 2 trunk, 3 swing thigh, 4 swing shin.
//
// Joint coordinates q are relative angles:
//   q1  absolute angle of the stance shin,
//   q2  stance knee flexion,
//   q3  trunk relative to the stance thigh,
//   q4  swing thigh relative to the trunk,
//   q5  swing knee flexion.
// Absolute link angles are measured clockwise from the upward vertical, each
// leg link pointing from its foot toward the hip and the trunk pointing from
// the hip to its tip, so that a link at angle th has direction (sin th, cos th)
// and walking progresses toward +x. See relative_to_absolute().
struct RobotParams {
  std::array<double, 5> mass{};        // kg
  std::array<double, 5> inertia{};     // kg m^2, about the link COM
  std::array<double, 5> length{};      // m
  std::array<double, 5> com_offset{};  // m, from the knee (shins) or hip (thighs, trunk)
  double gravity = 9.81;               // m/s^2

  // RABBIT testbed values.
  static RobotParams rabbit();

  // Throws GaitError(kInvalidArgument) on non-physical values.
  void validate() const;

  double total_mass() const;
};

struct JointState {
  Vec5 q = Vec5::Zero();
  Vec5 qdot = Vec5::Zero();
};

struct ChainGeometry {
  Vec2 stance_foot = Vec2::Zero();
  Vec2 stance_knee = Vec2::Zero();
  Vec2 hip = Vec2::Zero();
  Vec2 trunk_tip = Vec2::Zero();
  Vec2 swing_knee = Vec2::Zero();
  Vec2 swing_foot = Vec2::Zero();
  std::array<Vec2, 5> link_com{};
  Vec2 com = Vec2::Zero();
};

// Constant map theta = A q from relative to absolute angles (and rates).
const Mat5& relative_to_absolute_matrix();
// Its inverse, q = H theta.
const Mat5& absolute_to_relative_matrix();

Vec5 relative_to_absolute(const Vec5& q_rel);
Vec5 absolute_to_relative(const Vec5& q_abs);

ChainGeometry forward_kinematics(const Vec5& q, const RobotParams& params);

// Inertia matrix of the pinned chain.
Mat5 mass_matrix(const Vec5& q, const RobotParams& params);

struct BiasTerms {
  Mat5 coriolis;  // Christoffel-symbol factorization, Mdot - 2C skew
  Vec5 gravity;   // dV/dq
};

BiasTerms bias_and_gravity(const Vec5& q, const Vec5& qdot,
                           const RobotParams& params);

// d(swing foot position)/dq. Also maps qdot to the swing-foot velocity.
Mat25 swing_foot_jacobian(const Vec5& q, const RobotParams& params);

// Total COM velocity Jacobian d(com)/dq.
Mat25 com_jacobian(const Vec5& q, const RobotParams& params);

// Second time derivative of the total COM along (q, qdot, qddot).
Vec2 com_acceleration(const Vec5& q, const Vec5& qdot, const Vec5& qddot,
                      const RobotParams& params);

// qddot = M^-1 ((0, u) - C qdot - G). The first coordinate is unactuated.
Vec5 forward_dynamics(const JointState& state, const Vec4& torques,
                      const RobotParams& params);

double kinetic_energy(const JointState& state, const RobotParams& params);
double potential_energy(const Vec5& q, const RobotParams& params);

struct IkSolution {
  Vec5 q = Vec5::Zero();
  // A leg is exactly straight; the two knee branches coincide.
  bool singular = false;
};

// Solves for the joint angles that put the hip and the swing foot at the
// requested points with the given absolute trunk angle. Of the four branches
// the one with both knee flexions in [0, pi) is returned.
// Throws GaitError(kUnreachable) if either leg cannot span its distance.
IkSolution inverse_kinematics(const Vec2& hip, const Vec2& swing_foot,
                              double trunk_abs_angle,
                              const RobotParams& params);

}  // namespace biped
