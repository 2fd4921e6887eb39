// SPDX-License-Identifier: Apache-2.0

#include "biped_gait/robot_model.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace biped {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "OK";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kUnreachable: return "UNREACHABLE";
    case ErrorCode::kSingular: return "SINGULAR";
    case ErrorCode::kOutOfRange: return "OUT_OF_RANGE";
    case ErrorCode::kRankDeficient: return "RANK_DEFICIENT";
    case ErrorCode::kNoProgress: return "NO_PROGRESS";
    case ErrorCode::kInfeasible: return "INFEASIBLE";
    case ErrorCode::kNoImpact: return "NO_IMPACT";
    case ErrorCode::kParseError: return "PARSE_ERROR";
    case ErrorCode::kIoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

RobotParams RobotParams::rabbit() {
  RobotParams p;
  p.mass = {3.2, 6.8, 20.0, 6.8, 3.2};
  p.inertia = {0.93, 1.08, 2.22, 1.08, 0.93};
  p.length = {0.4, 0.4, 0.625, 0.4, 0.4};
  p.com_offset = {0.128, 0.163, 0.2, 0.163, 0.128};
  p.gravity = 9.81;
  return p;
}

void RobotParams::validate() const {
  for (int i = 0; i < kJoints; ++i) {
    std::ostringstream msg;
    msg << "link " << i + 1 << ": ";
    if (!(mass[i] > 0.0) || !std::isfinite(mass[i])) {
      msg << "mass must be positive";
    } else if (!(length[i] > 0.0) || !std::isfinite(length[i])) {
      msg << "length must be positive";
    } else if (!(inertia[i] >= 0.0) || !std::isfinite(inertia[i])) {
      msg << "inertia must be non-negative";
    } else if (!(com_offset[i] >= 0.0) || com_offset[i] > length[i]) {
      msg << "COM offset must lie within [0, length]";
    } else {
      continue;
    }
    throw GaitError(ErrorCode::kInvalidArgument, msg.str());
  }
  if (!std::isfinite(gravity) || gravity < 0.0) {
    throw GaitError(ErrorCode::kInvalidArgument, "gravity must be finite and non-negative");
  }
}

double RobotParams::total_mass() const {
  double m = 0.0;
  for (double mi : mass) m += mi;
  return m;
}

namespace {

// Every point of interest is a fixed linear combination of the five link
// direction vectors e(th_j) = (sin th_j, cos th_j). Row i of the returned
// matrix holds the coefficients for the COM of link i.
Mat5 com_coefficients(const RobotParams& p) {
  const auto& l = p.length;
  const auto& d = p.com_offset;
  Mat5 k = Mat5::Zero();
  k(0, 0) = l[0] - d[0];
  k(1, 0) = l[0];
  k(1, 1) = l[1] - d[1];
  k(2, 0) = l[0];
  k(2, 1) = l[1];
  k(2, 2) = d[2];
  k(3, 0) = l[0];
  k(3, 1) = l[1];
  k(3, 3) = -d[3];
  k(4, 0) = l[0];
  k(4, 1) = l[1];
  k(4, 3) = -l[3];
  k(4, 4) = -d[4];
  return k;
}

Vec5 swing_foot_coefficients(const RobotParams& p) {
  Vec5 c;
  c << p.length[0], p.length[1], 0.0, -p.length[3], -p.length[4];
  return c;
}

// Mass-weighted COM coefficients, b_j = sum_i m_i k_ij.
Vec5 weighted_coefficients(const RobotParams& p, const Mat5& k) {
  Vec5 b = Vec5::Zero();
  for (int i = 0; i < kJoints; ++i) b += p.mass[i] * k.row(i).transpose();
  return b;
}

Vec2 direction(double th) { return {std::sin(th), std::cos(th)}; }
Vec2 direction_derivative(double th) { return {std::cos(th), -std::sin(th)}; }

// Inertia coupling B_jk = sum_i m_i k_ij k_ik (+ I_j on the diagonal), so that
// the absolute-angle inertia matrix is B_jk cos(th_j - th_k).
Mat5 coupling_matrix(const RobotParams& p) {
  const Mat5 k = com_coefficients(p);
  Mat5 b = Mat5::Zero();
  for (int i = 0; i < kJoints; ++i) {
    b += p.mass[i] * k.row(i).transpose() * k.row(i);
  }
  for (int j = 0; j < kJoints; ++j) b(j, j) += p.inertia[j];
  return b;
}

Mat25 point_jacobian_absolute(const Vec5& th, const Vec5& coeff) {
  Mat25 j;
  for (int c = 0; c < kJoints; ++c) j.col(c) = coeff[c] * direction_derivative(th[c]);
  return j;
}

double wrap_pi(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

}  // namespace

const Mat5& relative_to_absolute_matrix() {
  static const Mat5 a = [] {
    Mat5 m;
    m << 1, 0, 0, 0, 0,
         1, -1, 0, 0, 0,
         1, -1, -1, 0, 0,
         1, -1, -1, -1, 0,
         1, -1, -1, -1, 1;
    return m;
  }();
  return a;
}

const Mat5& absolute_to_relative_matrix() {
  static const Mat5 h = [] {
    Mat5 m;
    m << 1, 0, 0, 0, 0,
         1, -1, 0, 0, 0,
         0, 1, -1, 0, 0,
         0, 0, 1, -1, 0,
         0, 0, 0, -1, 1;
    return m;
  }();
  return h;
}

Vec5 relative_to_absolute(const Vec5& q_rel) { return relative_to_absolute_matrix() * q_rel; }

Vec5 absolute_to_relative(const Vec5& q_abs) { return absolute_to_relative_matrix() * q_abs; }

ChainGeometry forward_kinematics(const Vec5& q, const RobotParams& params) {
  const Vec5 th = relative_to_absolute(q);
  const auto& l = params.length;
  std::array<Vec2, 5> e;
  for (int j = 0; j < kJoints; ++j) e[j] = direction(th[j]);

  ChainGeometry g;
  g.stance_foot = Vec2::Zero();
  g.stance_knee = l[0] * e[0];
  g.hip = g.stance_knee + l[1] * e[1];
  g.trunk_tip = g.hip + l[2] * e[2];
  g.swing_knee = g.hip - l[3] * e[3];
  g.swing_foot = g.swing_knee - l[4] * e[4];

  const Mat5 k = com_coefficients(params);
  Vec2 weighted = Vec2::Zero();
  for (int i = 0; i < kJoints; ++i) {
    Vec2 c = Vec2::Zero();
    for (int j = 0; j < kJoints; ++j) c += k(i, j) * e[j];
    g.link_com[i] = c;
    weighted += params.mass[i] * c;
  }
  g.com = weighted / params.total_mass();
  return g;
}

Mat5 mass_matrix(const Vec5& q, const RobotParams& params) {
  const Mat5& a = relative_to_absolute_matrix();
  const Vec5 th = a * q;
  const Mat5 b = coupling_matrix(params);
  Mat5 m_abs;
  for (int j = 0; j < kJoints; ++j) {
    for (int k = 0; k < kJoints; ++k) m_abs(j, k) = b(j, k) * std::cos(th[j] - th[k]);
  }
  return a.transpose() * m_abs * a;
}

BiasTerms bias_and_gravity(const Vec5& q, const Vec5& qdot, const RobotParams& params) {
  const Mat5& a = relative_to_absolute_matrix();
  const Vec5 th = a * q;
  const Vec5 w = a * qdot;
  const Mat5 b = coupling_matrix(params);

  // In absolute angles the Christoffel sum collapses to
  // C_jk = B_jk sin(th_j - th_k) w_k, and the transformation to relative
  // angles is the congruence by the constant map A.
  Mat5 c_abs;
  for (int j = 0; j < kJoints; ++j) {
    for (int k = 0; k < kJoints; ++k) c_abs(j, k) = b(j, k) * std::sin(th[j] - th[k]) * w[k];
  }

  // V = g sum_j bm_j cos th_j
  const Vec5 bm = weighted_coefficients(params, com_coefficients(params));
  Vec5 g_abs;
  for (int j = 0; j < kJoints; ++j) g_abs[j] = -params.gravity * bm[j] * std::sin(th[j]);

  BiasTerms out;
  out.coriolis = a.transpose() * c_abs * a;
  out.gravity = a.transpose() * g_abs;
  return out;
}

Mat25 swing_foot_jacobian(const Vec5& q, const RobotParams& params) {
  const Mat5& a = relative_to_absolute_matrix();
  return point_jacobian_absolute(a * q, swing_foot_coefficients(params)) * a;
}

Mat25 com_jacobian(const Vec5& q, const RobotParams& params) {
  const Mat5& a = relative_to_absolute_matrix();
  const Vec5 bm = weighted_coefficients(params, com_coefficients(params)) / params.total_mass();
  return point_jacobian_absolute(a * q, bm) * a;
}

Vec2 com_acceleration(const Vec5& q, const Vec5& qdot, const Vec5& qddot,
                      const RobotParams& params) {
  const Mat5& a = relative_to_absolute_matrix();
  const Vec5 th = a * q;
  const Vec5 w = a * qdot;
  const Vec5 alpha = a * qddot;
  const Vec5 bm = weighted_coefficients(params, com_coefficients(params)) / params.total_mass();
  Vec2 acc = Vec2::Zero();
  for (int j = 0; j < kJoints; ++j) {
    acc += bm[j] * (direction_derivative(th[j]) * alpha[j] - direction(th[j]) * w[j] * w[j]);
  }
  return acc;
}

Vec5 forward_dynamics(const JointState& state, const Vec4& torques, const RobotParams& params) {
  const Mat5 m = mass_matrix(state.q, params);
  const BiasTerms bias = bias_and_gravity(state.q, state.qdot, params);
  Vec5 rhs;
  rhs << 0.0, torques;
  rhs -= bias.coriolis * state.qdot + bias.gravity;
  return m.ldlt().solve(rhs);
}

double kinetic_energy(const JointState& state, const RobotParams& params) {
  return 0.5 * state.qdot.dot(mass_matrix(state.q, params) * state.qdot);
}

double potential_energy(const Vec5& q, const RobotParams& params) {
  const ChainGeometry g = forward_kinematics(q, params);
  return params.total_mass() * params.gravity * g.com.y();
}

IkSolution inverse_kinematics(const Vec2& hip, const Vec2& swing_foot, double trunk_abs_angle,
                              const RobotParams& params) {
  const auto& l = params.length;
  constexpr double kSlack = 1e-12;

  // Knee flexion k >= 0 for a two-link leg spanning `span` from its foot; the
  // shin leans by `lean` from the foot->hip line so the knee points forward.
  struct LegSolution {
    double shin_abs;
    double thigh_abs;
    bool straight;
  };
  auto solve_leg = [&](const Vec2& from_foot, double shin, double thigh,
                       const char* which) -> LegSolution {
    const double span = from_foot.norm();
    if (span > shin + thigh + kSlack || span < std::abs(shin - thigh) - kSlack) {
      std::ostringstream msg;
      msg << which << " leg cannot span " << span << " m";
      throw GaitError(ErrorCode::kUnreachable, msg.str());
    }
    const double line = std::atan2(from_foot.x(), from_foot.y());
    double cos_knee = (shin * shin + thigh * thigh - span * span) / (2.0 * shin * thigh);
    cos_knee = std::clamp(cos_knee, -1.0, 1.0);
    const double flex = std::numbers::pi - std::acos(cos_knee);
    double cos_lean = span > 0.0 ? (shin * shin + span * span - thigh * thigh) / (2.0 * shin * span) : 1.0;
    cos_lean = std::clamp(cos_lean, -1.0, 1.0);
    const double lean = std::acos(cos_lean);
    const bool straight = std::abs(span - (shin + thigh)) <= kSlack;
    return {line + lean, line + lean - flex, straight};
  };

  const LegSolution stance = solve_leg(hip, l[0], l[1], "stance");
  const LegSolution swing = solve_leg(hip - swing_foot, l[4], l[3], "swing");

  Vec5 th;
  th << stance.shin_abs, stance.thigh_abs, trunk_abs_angle, swing.thigh_abs, swing.shin_abs;
  Vec5 q = absolute_to_relative(th);
  for (int i = 0; i < kJoints; ++i) q[i] = wrap_pi(q[i]);
  return {q, stance.straight || swing.straight};
}

}  // namespace biped
