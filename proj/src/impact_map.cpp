// SPDX-License-Identifier: Apache-2.0

#include "biped_gait/impact_map.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <sstream>

namespace biped {

RelabelMaps RelabelMaps::standard() {
  RelabelMaps maps;
  maps.to_relative = absolute_to_relative_matrix();
  maps.leg_swap = Mat5::Zero();
  for (int i = 0; i < kJoints; ++i) maps.leg_swap(i, kJoints - 1 - i) = 1.0;
  maps.relabel = maps.to_relative * maps.leg_swap * relative_to_absolute_matrix();
  return maps;
}

Mat7 extended_mass_matrix(const Vec5& q, const RobotParams& params) {
  const double m = params.total_mass();
  Mat7 me = Mat7::Zero();
  me.topLeftCorner<5, 5>() = mass_matrix(q, params);
  const Mat25 jc = com_jacobian(q, params);
  me.bottomLeftCorner<2, 5>() = m * jc;
  me.topRightCorner<5, 2>() = m * jc.transpose();
  me.bottomRightCorner<2, 2>() = m * Eigen::Matrix2d::Identity();
  return me;
}

Mat27 extended_swing_foot_jacobian(const Vec5& q, const RobotParams& params) {
  Mat27 e;
  e.leftCols<5>() = swing_foot_jacobian(q, params);
  e.rightCols<2>() = Eigen::Matrix2d::Identity();
  return e;
}

ImpactOutcome impact_velocity_map_unchecked(const Vec5& q_minus, const Vec5& qdot_minus,
                                            const RobotParams& params) {
  const Mat7 me = extended_mass_matrix(q_minus, params);
  const Mat27 e = extended_swing_foot_jacobian(q_minus, params);
  Vec7 v_minus = Vec7::Zero();
  v_minus.head<5>() = qdot_minus;

  const Eigen::LDLT<Mat7> me_ldlt(me);
  const Eigen::Matrix<double, 7, 2> me_inv_et = me_ldlt.solve(e.transpose());
  const Eigen::Matrix2d contact = e * me_inv_et;
  const Eigen::FullPivLU<Eigen::Matrix2d> contact_lu(contact);
  const Vec2 foot_velocity = e * v_minus;

  ImpactOutcome out;
  out.qdot_minus_input = qdot_minus;
  if (!contact.allFinite() || !foot_velocity.allFinite() || contact_lu.rank() < 2 ||
      contact_lu.rcond() < 1e-12) {
    throw GaitError(ErrorCode::kRankDeficient, "contact inertia J M^-1 J^T is singular");
  }
  out.impulse = contact_lu.solve(-foot_velocity);
  const Vec7 v_plus = v_minus + me_inv_et * out.impulse;
  out.qdot_plus = v_plus.head<5>();
  out.stance_foot_velocity_plus = v_plus.tail<2>();
  return out;
}

ImpactOutcome impact_velocity_map(const Vec5& q_minus, const Vec5& qdot_minus,
                                  const RobotParams& params) {
  const double height = forward_kinematics(q_minus, params).swing_foot.y();
  if (!(std::abs(height) <= kImpactHeightTolerance)) {
    std::ostringstream msg;
    msg << "swing foot is " << height << " m off the ground at impact";
    throw GaitError(ErrorCode::kInvalidArgument, msg.str());
  }
  return impact_velocity_map_unchecked(q_minus, qdot_minus, params);
}

JointState relabel_state(const Vec5& q, const Vec5& qdot, const RelabelMaps& maps) {
  return {maps.relabel * q, maps.relabel * qdot};
}

Vec5 impact_invariance_residual(const PolynomialGait& gait, const RobotParams& params,
                                const RelabelMaps& maps) {
  const GaitSample end = eval_gait(gait, gait.duration);
  const GaitSample start = eval_gait(gait, 0.0);
  const ImpactOutcome hit = impact_velocity_map_unchecked(end.q, end.qdot, params);
  return maps.relabel * hit.qdot_plus - start.qdot;
}

double angular_momentum_about(const Vec5& q, const Vec5& qdot, const Vec2& stance_velocity,
                              const Vec2& point, const RobotParams& params) {
  const ChainGeometry g = forward_kinematics(q, params);
  const Vec5 w = relative_to_absolute(qdot);
  // Link COM velocity by the rigid-body rule along the chain.
  const Vec5 th = relative_to_absolute(q);
  auto rate = [](double theta, double omega, double r) -> Vec2 {
    return Vec2(std::cos(theta), -std::sin(theta)) * omega * r;
  };
  const auto& l = params.length;
  const auto& d = params.com_offset;
  const Vec2 v_knee = stance_velocity + rate(th[0], w[0], l[0]);
  const Vec2 v_hip = v_knee + rate(th[1], w[1], l[1]);
  const Vec2 v_sknee = v_hip - rate(th[3], w[3], l[3]);
  std::array<Vec2, 5> v;
  v[0] = stance_velocity + rate(th[0], w[0], l[0] - d[0]);
  v[1] = v_knee + rate(th[1], w[1], l[1] - d[1]);
  v[2] = v_hip + rate(th[2], w[2], d[2]);
  v[3] = v_hip - rate(th[3], w[3], d[3]);
  v[4] = v_sknee - rate(th[4], w[4], d[4]);

  // Angles are clockwise, so the counter-clockwise spin of link i is -w_i.
  double sigma = 0.0;
  for (int i = 0; i < kJoints; ++i) {
    const Vec2 r = g.link_com[i] - point;
    sigma += params.mass[i] * (r.x() * v[i].y() - r.y() * v[i].x()) - params.inertia[i] * w[i];
  }
  return sigma;
}

}  // namespace biped
