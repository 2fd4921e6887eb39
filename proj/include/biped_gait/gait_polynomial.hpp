// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "biped_gait/types.hpp"

namespace biped {

inline constexpr int kPolyDegree = 4;
inline constexpr int kCoeffsPerJoint = kPolyDegree + 1;
// 25 coefficients less the 10 pinned by the two boundary configurations.
inline constexpr int kFreeParams = kJoints * kCoeffsPerJoint - 2 * kJoints;

using CoeffMatrix = Eigen::Matrix<double, kJoints, kCoeffsPerJoint>;

// q_k(t) = sum_i alpha(k, i) t^i on [0, duration].
struct PolynomialGait {
  CoeffMatrix alpha = CoeffMatrix::Zero();
  double duration = 0.0;
};

struct FreeParams {
  Eigen::Matrix<double, kFreeParams, 1> z = Eigen::Matrix<double, kFreeParams, 1>::Zero();
};

struct GaitSample {
  Vec5 q;
  Vec5 qdot;
  Vec5 qddot;
};

// Throws GaitError(kOutOfRange) when t lies outside [0, duration].
GaitSample eval_gait(const PolynomialGait& gait, double t);

// Coefficient 0 is fixed by q_init and coefficient 4 by q_final; z supplies
// coefficients 1..3 of each joint, joint-major.
PolynomialGait assemble_gait(const FreeParams& params, const Vec5& q_init,
                             const Vec5& q_final, double duration);

FreeParams extract_free_params(const PolynomialGait& gait);

}  // namespace biped
