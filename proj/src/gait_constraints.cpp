// SPDX-License-Identifier: Apache-2.0

#include "biped_gait/gait_constraints.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace biped {

GaitProblemConfig GaitProblemConfig::defaults() {
  GaitProblemConfig cfg;
  cfg.q_init << -0.1681, 0.3073, -0.6499, 0.0064, 0.3073;
  cfg.q_final << 0.4754, 0.3073, -0.0064, 0.6499, 0.3073;
  return cfg;
}

void GaitProblemConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw GaitError(ErrorCode::kInvalidArgument, what);
  };
  require(knee_upper_stance > 0.0 && knee_upper_swing > 0.0, "knee bounds must be positive");
  require(torque_max >= 0.0, "torque limit must be non-negative");
  require(rate_max > 0.0, "rate limit must be positive");
  require(friction > 0.0, "friction coefficient must be positive");
  require(step_length > 0.0 && velocity > 0.0, "step length and velocity must be positive");
  require(std::isfinite(step_duration()), "step duration must be finite");
  require(q_init.allFinite() && q_final.allFinite(), "boundary configurations must be finite");
  require(grid_size >= 10, "grid needs at least 10 points");
  require(clearance_margin >= 0.0 && normal_force_margin >= 0.0, "margins must be non-negative");
  require(violation_threshold > 0.0, "violation threshold must be positive");
}

std::string_view constraint_name(Constraint c) {
  switch (c) {
    case Constraint::kBoundary: return "boundary";
    case Constraint::kKnee: return "knee";
    case Constraint::kClearance: return "clearance";
    case Constraint::kTorque: return "torque";
    case Constraint::kRate: return "rate";
    case Constraint::kFriction: return "friction";
    case Constraint::kNormalForce: return "normal-force";
    case Constraint::kZeroDynamics: return "zero-dynamics";
    case Constraint::kImpactInvariance: return "impact-invariance";
  }
  return "unknown";
}

double ConstraintReport::max_violation() const {
  return *std::max_element(violation.begin(), violation.end());
}

InverseDynamicsSplit inverse_dynamics_split(const Vec5& q, const Vec5& qdot, const Vec5& qddot,
                                            const RobotParams& params) {
  const BiasTerms bias = bias_and_gravity(q, qdot, params);
  const Vec5 generalized = mass_matrix(q, params) * qddot + bias.coriolis * qdot + bias.gravity;
  return {generalized[0], generalized.tail<4>()};
}

Vec2 ground_reaction(const Vec5& q, const Vec5& qdot, const Vec5& qddot,
                     const RobotParams& params) {
  const Vec2 acc = com_acceleration(q, qdot, qddot, params);
  return params.total_mass() * (acc + Vec2(0.0, params.gravity));
}

GaitSamples sample_gait(const PolynomialGait& gait, const RobotParams& params, int grid_size) {
  GaitSamples s;
  const auto n = static_cast<std::size_t>(grid_size);
  s.time.reserve(n);
  s.state.reserve(n);
  s.torque.reserve(n);
  s.zero_dynamics.reserve(n);
  s.reaction.reserve(n);
  s.swing_foot.reserve(n);
  for (int i = 0; i < grid_size; ++i) {
    // The last node lands exactly on the duration.
    const double t = i + 1 == grid_size ? gait.duration : gait.duration * i / (grid_size - 1);
    const GaitSample x = eval_gait(gait, t);
    const InverseDynamicsSplit id = inverse_dynamics_split(x.q, x.qdot, x.qddot, params);
    s.time.push_back(t);
    s.state.push_back(x);
    s.torque.push_back(id.torques);
    s.zero_dynamics.push_back(id.zero_dynamics_residual);
    s.reaction.push_back(ground_reaction(x.q, x.qdot, x.qddot, params));
    s.swing_foot.push_back(forward_kinematics(x.q, params).swing_foot);
  }
  return s;
}

std::vector<double> simpson_weights(int n, double duration) {
  if (n < 3) throw GaitError(ErrorCode::kInvalidArgument, "Simpson rule needs 3+ points");
  const int intervals = n - 1;
  const double h = duration / intervals;
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  int simpson_end = intervals;
  if (intervals % 2 == 1) {
    if (intervals < 3) throw GaitError(ErrorCode::kInvalidArgument, "grid too coarse");
    simpson_end = intervals - 3;
    const double c = 3.0 * h / 8.0;
    w[simpson_end] += c;
    w[simpson_end + 1] += 3.0 * c;
    w[simpson_end + 2] += 3.0 * c;
    w[simpson_end + 3] += c;
  }
  for (int i = 0; i + 2 <= simpson_end; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
  return w;
}

double integrate_squared_torque(std::span<const Vec4> torque, double duration) {
  const std::vector<double> w = simpson_weights(static_cast<int>(torque.size()), duration);
  double sum = 0.0;
  for (std::size_t i = 0; i < torque.size(); ++i) sum += w[i] * torque[i].squaredNorm();
  return sum;
}

double objective(const PolynomialGait& gait, const RobotParams& params, int grid_size) {
  const GaitSamples s = sample_gait(gait, params, grid_size);
  return integrate_squared_torque(s.torque, gait.duration);
}

double clearance_violation(std::span<const double> heights, double margin) {
  double v = 0.0;
  for (double h : heights) v = std::max(v, margin - h);
  return v;
}

double bound_violation(std::span<const double> values, double lower, double upper) {
  double v = 0.0;
  for (double x : values) v = std::max({v, lower - x, x - upper});
  return v;
}

double magnitude_violation(std::span<const double> values, double limit) {
  double v = 0.0;
  for (double x : values) v = std::max(v, std::abs(x) - limit);
  return v;
}

double friction_violation(std::span<const Vec2> reactions, double mu) {
  double v = 0.0;
  for (const Vec2& f : reactions) v = std::max(v, std::abs(f.x()) - mu * f.y());
  return v;
}

double normal_force_violation(std::span<const Vec2> reactions, double margin) {
  double v = 0.0;
  for (const Vec2& f : reactions) v = std::max(v, margin - f.y());
  return v;
}

namespace {

// Non-finite inputs count as maximally violated so NaN never reads as feasible.
double sanitize(double v) { return std::isfinite(v) ? v : kInfeasibleSentinel; }

double pos(double x) { return std::isfinite(x) ? std::max(0.0, x) : kInfeasibleSentinel; }

}  // namespace

ConstraintResiduals constraint_residuals(const PolynomialGait& gait, const RobotParams& params,
                                         const GaitProblemConfig& cfg) {
  const int n = cfg.grid_size;
  const GaitSamples s = sample_gait(gait, params, n);
  const std::vector<double> w = simpson_weights(n, gait.duration);

  ConstraintResiduals out;
  ConstraintReport& rep = out.report;
  rep.threshold = cfg.violation_threshold;
  auto bump = [&rep](Constraint c, double v) {
    auto& slot = rep.violation[static_cast<int>(c)];
    slot = std::max(slot, sanitize(v));
  };

  out.objective_terms.reserve(static_cast<std::size_t>(4 * n));
  for (int i = 0; i < n; ++i) {
    const double sw = std::sqrt(w[static_cast<std::size_t>(i)]);
    for (int a = 0; a < kActuators; ++a) {
      out.objective_terms.push_back(sw * s.torque[static_cast<std::size_t>(i)][a]);
    }
  }
  rep.objective = integrate_squared_torque(s.torque, gait.duration);

  // Boundary configurations and touchdown heights (equalities).
  const Vec5 start_gap = s.state.front().q - cfg.q_init;
  const Vec5 end_gap = s.state.back().q - cfg.q_final;
  for (int k = 0; k < kJoints; ++k) {
    out.equalities.push_back(start_gap[k]);
    out.equalities.push_back(end_gap[k]);
    bump(Constraint::kBoundary, std::abs(start_gap[k]));
    bump(Constraint::kBoundary, std::abs(end_gap[k]));
  }
  const double h0 = s.swing_foot.front().y();
  const double h1 = s.swing_foot.back().y();
  out.equalities.push_back(h0);
  out.equalities.push_back(h1);
  bump(Constraint::kClearance, std::abs(h0));
  bump(Constraint::kClearance, std::abs(h1));

  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const GaitSample& x = s.state[idx];
    const double zd = s.zero_dynamics[idx];
    out.equalities.push_back(std::isfinite(zd) ? zd : kInfeasibleSentinel);
    bump(Constraint::kZeroDynamics, std::abs(zd));

    const double knee_stance = bound_violation(std::span(&x.q[1], 1), 0.0, cfg.knee_upper_stance);
    const double knee_swing = bound_violation(std::span(&x.q[4], 1), 0.0, cfg.knee_upper_swing);
    out.inequalities.push_back(pos(knee_stance));
    out.inequalities.push_back(pos(knee_swing));
    bump(Constraint::kKnee, std::max(knee_stance, knee_swing));

    if (i > 0 && i + 1 < n) {
      const double height = s.swing_foot[idx].y();
      const double c = clearance_violation(std::span(&height, 1), cfg.clearance_margin);
      out.inequalities.push_back(pos(c));
      bump(Constraint::kClearance, c);
    }

    for (int a = 0; a < kActuators; ++a) {
      const double v = std::abs(s.torque[idx][a]) - cfg.torque_max;
      out.inequalities.push_back(pos(v));
      bump(Constraint::kTorque, v);
    }
    for (int k = 0; k < kJoints; ++k) {
      const double v = std::abs(x.qdot[k]) - cfg.rate_max;
      out.inequalities.push_back(pos(v));
      bump(Constraint::kRate, v);
    }
    const double fr = friction_violation(std::span(&s.reaction[idx], 1), cfg.friction);
    const double fn = normal_force_violation(std::span(&s.reaction[idx], 1), cfg.normal_force_margin);
    out.inequalities.push_back(pos(fr));
    out.inequalities.push_back(pos(fn));
    bump(Constraint::kFriction, fr);
    bump(Constraint::kNormalForce, fn);
  }

  try {
    const Vec5 r = impact_invariance_residual(gait, params, RelabelMaps::standard());
    for (int k = 0; k < kJoints; ++k) {
      out.equalities.push_back(std::isfinite(r[k]) ? r[k] : kInfeasibleSentinel);
      bump(Constraint::kImpactInvariance, std::abs(r[k]));
    }
  } catch (const GaitError& e) {
    if (e.code() != ErrorCode::kRankDeficient) throw;
    for (int k = 0; k < kJoints; ++k) out.equalities.push_back(kInfeasibleSentinel);
    bump(Constraint::kImpactInvariance, kInfeasibleSentinel);
  }

  rep.feasible = rep.max_violation() <= rep.threshold;
  return out;
}

ConstraintReport evaluate_constraints(const PolynomialGait& gait, const RobotParams& params,
                                      const GaitProblemConfig& cfg) {
  cfg.validate();
  return constraint_residuals(gait, params, cfg).report;
}

}  // namespace biped
