// SPDX-License-Identifier: Apache-2.0

#include "biped_gait/gait_polynomial.hpp"

#include <cmath>
#include <sstream>

namespace biped {

GaitSample eval_gait(const PolynomialGait& gait, double t) {
  if (!(t >= 0.0 && t <= gait.duration)) {
    std::ostringstream msg;
    msg << "t = " << t << " outside [0, " << gait.duration << "]";
    throw GaitError(ErrorCode::kOutOfRange, msg.str());
  }
  GaitSample s;
  for (int k = 0; k < kJoints; ++k) {
    // Horner for the value and both derivatives.
    double p = gait.alpha(k, kPolyDegree);
    double dp = 0.0;
    double ddp = 0.0;
    for (int i = kPolyDegree - 1; i >= 0; --i) {
      ddp = ddp * t + 2.0 * dp;
      dp = dp * t + p;
      p = p * t + gait.alpha(k, i);
    }
    s.q[k] = p;
    s.qdot[k] = dp;
    s.qddot[k] = ddp;
  }
  return s;
}

PolynomialGait assemble_gait(const FreeParams& params, const Vec5& q_init, const Vec5& q_final,
                             double duration) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw GaitError(ErrorCode::kInvalidArgument, "step duration must be positive");
  }
  PolynomialGait gait;
  gait.duration = duration;
  const double t = duration;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t4 = t3 * t;
  for (int k = 0; k < kJoints; ++k) {
    const double a1 = params.z[3 * k];
    const double a2 = params.z[3 * k + 1];
    const double a3 = params.z[3 * k + 2];
    gait.alpha(k, 0) = q_init[k];
    gait.alpha(k, 1) = a1;
    gait.alpha(k, 2) = a2;
    gait.alpha(k, 3) = a3;
    gait.alpha(k, 4) = (q_final[k] - q_init[k] - a1 * t - a2 * t2 - a3 * t3) / t4;
  }
  return gait;
}

FreeParams extract_free_params(const PolynomialGait& gait) {
  FreeParams out;
  for (int k = 0; k < kJoints; ++k) {
    out.z[3 * k] = gait.alpha(k, 1);
    out.z[3 * k + 1] = gait.alpha(k, 2);
    out.z[3 * k + 2] = gait.alpha(k, 3);
  }
  return out;
}

}  // namespace biped
