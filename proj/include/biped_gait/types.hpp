// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace biped {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Mat7 = Eigen::Matrix<double, 7, 7>;
using Mat25 = Eigen::Matrix<double, 2, 5>;
using Mat27 = Eigen::Matrix<double, 2, 7>;

inline constexpr int kJoints = 5;
inline constexpr int kActuators = 4;

// Numbering is shared with the C API (bg_status in biped_gait.h).
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kUnreachable = 2,
  kSingular = 3,
  kOutOfRange = 4,
  kRankDeficient = 5,
  kNoProgress = 6,
  kInfeasible = 7,
  kNoImpact = 8,
  kParseError = 9,
  kIoError = 10,
};

const char* to_string(ErrorCode code) noexcept;

class GaitError : public std::runtime_error {
 public:
  GaitError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace biped
