// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "biped_gait/gait_polynomial.hpp"
#include "biped_gait/impact_map.hpp"
#include "biped_gait/robot_model.hpp"

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace biped {

struct GaitProblemConfig {
  double knee_upper_stance = 0.6;  // rad, bound on q2
  double knee_upper_swing = 0.6;   // rad, bound on q5
  double torque_max = 150.0;       // N m
  double rate_max = 5.0;           // rad/s
  double friction = 0.7;
  double step_length = 0.5;  // m
  double velocity = 1.0;     // m/s
  Vec5 q_init = Vec5::Zero();
  Vec5 q_final = Vec5::Zero();
  int grid_size = 51;
  double clearance_margin = 1e-4;     // m
  double normal_force_margin = 1e-4;  // N
  double violation_threshold = 0.01;

  // Table-driven defaults, including the RABBIT boundary configurations.
  static GaitProblemConfig defaults();

  double step_duration() const { return step_length / velocity; }

  void validate() const;
};

enum class Constraint : int {
  kBoundary = 0,
  kKnee,
  kClearance,
  kTorque,
  kRate,
  kFriction,
  kNormalForce,
  kZeroDynamics,
  kImpactInvariance,
};

inline constexpr int kConstraintCount = 9;

std::string_view constraint_name(Constraint c);

// Reported when the impact map cannot be evaluated.
inline constexpr double kInfeasibleSentinel = 1e9;

struct ConstraintReport {
  std::array<double, kConstraintCount> violation{};
  double objective = 0.0;  // N^2 m^2 s
  double threshold = 0.01;
  bool feasible = false;

  double operator[](Constraint c) const { return violation[static_cast<int>(c)]; }
  double max_violation() const;
};

struct InverseDynamicsSplit {
  // Row 1 of M qddot + C qdot + G; must vanish on a realizable motion.
  double zero_dynamics_residual = 0.0;
  Vec4 torques = Vec4::Zero();
};

InverseDynamicsSplit inverse_dynamics_split(const Vec5& q, const Vec5& qdot, const Vec5& qddot,
                                            const RobotParams& params);

// Stance-foot ground reaction (F_x, F_y), N.
Vec2 ground_reaction(const Vec5& q, const Vec5& qdot, const Vec5& qddot,
                     const RobotParams& params);

// Everything the constraints and reports need on the uniform grid.
struct GaitSamples {
  std::vector<double> time;
  std::vector<GaitSample> state;
  std::vector<Vec4> torque;
  std::vector<double> zero_dynamics;
  std::vector<Vec2> reaction;
  std::vector<Vec2> swing_foot;
};

GaitSamples sample_gait(const PolynomialGait& gait, const RobotParams& params, int grid_size);

// Composite Simpson weights on n uniform points; the 3/8 rule closes an odd
// interval count.
std::vector<double> simpson_weights(int n, double duration);

// Integral of |tau|^2 over the step.
double objective(const PolynomialGait& gait, const RobotParams& params, int grid_size);
double integrate_squared_torque(std::span<const Vec4> torque, double duration);

// Violation primitives. Each returns the largest positive shortfall.
double clearance_violation(std::span<const double> heights, double margin);
double bound_violation(std::span<const double> values, double lower, double upper);
double magnitude_violation(std::span<const double> values, double limit);
double friction_violation(std::span<const Vec2> reactions, double mu);
double normal_force_violation(std::span<const Vec2> reactions, double margin);

// Residual vectors behind the report: every entry is zero on a feasible gait.
// Equalities are signed; inequalities are already clipped to their positive
// parts. objective_terms squared and summed reproduce the objective.
struct ConstraintResiduals {
  std::vector<double> objective_terms;
  std::vector<double> equalities;
  std::vector<double> inequalities;
  ConstraintReport report;
};

ConstraintResiduals constraint_residuals(const PolynomialGait& gait, const RobotParams& params,
                                         const GaitProblemConfig& cfg);

ConstraintReport evaluate_constraints(const PolynomialGait& gait, const RobotParams& params,
                                      const GaitProblemConfig& cfg);

}  // namespace biped
