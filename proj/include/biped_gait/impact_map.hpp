// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "biped_gait/gait_polynomial.hpp"
#include "biped_gait/robot_model.hpp"

namespace biped {

// Result of a plastic swing-foot strike.
//
// The strike is resolved on the chain extended by the stance-foot position
// (seven coordinates): the impulse acts only at the striking foot and the old
// stance foot is free to leave the ground. Joint rates are chart independent,
// so qdot_plus is valid both before and after the legs are relabeled.
struct ImpactOutcome {
  Vec5 qdot_plus = Vec5::Zero();
  // Ground impulse at the new contact, N s.
  Vec2 impulse = Vec2::Zero();
  // Velocity of the old stance foot right after the strike (lift-off).
  Vec2 stance_foot_velocity_plus = Vec2::Zero();
  Vec5 qdot_minus_input = Vec5::Zero();
};

// Relative <-> absolute and leg-swap maps. R = H Gamma H^-1 acts on relative
// angles and rates and is an integer involution.
struct RelabelMaps {
  Mat5 to_relative;  // H: q = H theta
  Mat5 leg_swap;     // Gamma: theta_new = Gamma theta_old
  Mat5 relabel;      // R

  static RelabelMaps standard();
};

// Pre-impact admissibility: |swing foot height| at q_minus.
inline constexpr double kImpactHeightTolerance = 1e-8;

// Inertia of the chain with the stance-foot translation appended.
Mat7 extended_mass_matrix(const Vec5& q, const RobotParams& params);

// [J | I2]: world velocity of the swing foot in extended rates.
Mat27 extended_swing_foot_jacobian(const Vec5& q, const RobotParams& params);

// Throws GaitError(kInvalidArgument) if the swing foot is off the ground and
// GaitError(kRankDeficient) if the contact system is singular or non-finite.
ImpactOutcome impact_velocity_map(const Vec5& q_minus, const Vec5& qdot_minus,
                                  const RobotParams& params);

// Same strike without the ground-height precondition. Used by the
// constraint machinery, which scores boundary mismatch separately.
ImpactOutcome impact_velocity_map_unchecked(const Vec5& q_minus, const Vec5& qdot_minus,
                                            const RobotParams& params);

JointState relabel_state(const Vec5& q, const Vec5& qdot, const RelabelMaps& maps);

// relabel(impact(q(T), qdot(T))).qdot - qdot(0). Zero for a periodic gait.
Vec5 impact_invariance_residual(const PolynomialGait& gait, const RobotParams& params,
                                const RelabelMaps& maps);

// Angular momentum about `point` for the chain whose stance foot moves with
// `stance_velocity`, evaluated from link velocities directly.
double angular_momentum_about(const Vec5& q, const Vec5& qdot, const Vec2& stance_velocity,
                              const Vec2& point, const RobotParams& params);

}  // namespace biped
