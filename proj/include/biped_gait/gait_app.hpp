// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "biped_gait/hybrid_optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace biped {

enum class LogLevel : int { kQuiet = 0, kInfo = 1, kDebug = 2 };

void set_log_level(LogLevel level);
LogLevel log_level();
void log_message(LogLevel level, std::string_view message);

// Everything a run needs. Defaults reproduce the RABBIT setup.
struct RunConfig {
  RobotParams robot = RobotParams::rabbit();
  GaitProblemConfig problem = GaitProblemConfig::defaults();
  GaConfig ga;
  RefineConfig refine;
  PenaltyConfig penalty;
  std::uint64_t seed = 20240611;
  std::string output_dir = "out";

  void validate() const;
};

// JSON document with optional sections robot, problem, ga, refine, penalty and
// run. Missing keys keep their defaults; unknown keys are rejected.
// Throws GaitError(kParseError) on malformed input, kInvalidArgument on
// values that fail validation and kIoError if the file cannot be read.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& cfg);

// Where the boundary configurations put the feet, and whether they had to be
// rebuilt from step geometry.
struct BoundaryCheck {
  Vec2 init_swing_foot = Vec2::Zero();
  Vec2 final_swing_foot = Vec2::Zero();
  bool table_values_valid = false;
  bool regenerated = false;
  Vec5 q_init = Vec5::Zero();
  Vec5 q_final = Vec5::Zero();
};

inline constexpr double kBoundaryHeightTolerance = 0.01;  // m
inline constexpr double kBoundaryStepTolerance = 0.02;    // m

// Swing foot on the ground and one step length from the stance foot, behind at
// the start and ahead at the end.
bool boundary_geometry_valid(const Vec5& q_init, const Vec5& q_final,
                             const RobotParams& robot, double step_length);

// Validates the configured boundaries and, if they fail, replaces them with an
// inverse-kinematics pair that keeps the configured hip height and trunk
// angle. The returned problem carries the boundaries actually used.
BoundaryCheck check_boundaries(const RobotParams& robot, GaitProblemConfig& problem);

struct OptimizeOutcome {
  GaitReport report;
  BoundaryCheck boundary;
};

OptimizeOutcome run_optimize(const RunConfig& cfg);

// Report document written to report.json. Contains no wall-clock data so
// identical inputs give identical bytes.
std::string report_to_json(const OptimizeOutcome& outcome, const RunConfig& cfg);

// report.json, history.jsonl and the CSV series, each written atomically.
void write_optimize_artifacts(const std::filesystem::path& dir, const OptimizeOutcome& outcome,
                              const RunConfig& cfg);

// Accepts {"coefficients": [25], "duration": T}, a report with a "gait" member,
// or plain text holding the 25 coefficients followed by T. Coefficients are
// joint-major in ascending powers.
PolynomialGait parse_gait(std::string_view text);
PolynomialGait load_gait(const std::filesystem::path& path);
std::string gait_to_json(const PolynomialGait& gait);

struct VerifyOutcome {
  PolynomialGait gait;
  ConstraintReport constraints;
};

VerifyOutcome run_verify(const PolynomialGait& gait, const RunConfig& cfg);
std::string verify_to_json(const VerifyOutcome& outcome);

inline constexpr double kSimulationStep = 1e-4;  // s

struct SimulationOutcome {
  double impact_time = 0.0;
  JointState pre_impact;
  JointState post_impact;  // after the strike and leg relabel
  JointState initial;      // gait state at t = 0
  Vec5 q_deviation = Vec5::Zero();
  Vec5 qdot_deviation = Vec5::Zero();
  double max_deviation = 0.0;
  Vec2 impulse = Vec2::Zero();
  // Sparse trace of the integration, one row per trace_stride steps.
  std::vector<double> trace_time;
  std::vector<JointState> trace_state;
};

// Feed-forward RK4 of the single-support dynamics under the gait's
// inverse-dynamics torques (held at their t = T value afterwards) until the
// swing foot comes down ahead of the stance foot.
// Throws GaitError(kNoImpact) if that does not happen within 2T.
SimulationOutcome simulate_step(const PolynomialGait& gait, const RobotParams& robot,
                                double dt = kSimulationStep, int trace_stride = 50);
std::string simulation_to_json(const SimulationOutcome& outcome);
void write_simulation_artifacts(const std::filesystem::path& dir, const SimulationOutcome& outcome);

// Writes text to path through a sibling temporary and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace biped
