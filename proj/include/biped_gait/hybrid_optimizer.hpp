// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "biped_gait/gait_constraints.hpp"
#include "biped_gait/gait_polynomial.hpp"
#include "biped_gait/robot_model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace biped {

// Exterior quadratic penalty weights, one entry per stage.
struct PenaltyConfig {
  std::vector<double> equality_weights{1e6, 1e7, 1e8};
  std::vector<double> inequality_weights{1e6, 1e7, 1e8};
  double violation_threshold = 0.01;

  int stages() const { return static_cast<int>(equality_weights.size()); }
  void validate() const;
};

struct PenaltyWeights {
  double equality = 1.0;
  double inequality = 1.0;
};

struct GaConfig {
  int population = 300;
  double init_lower = -12.0;
  double init_upper = 12.0;
  int elite_count = 15;
  double crossover_fraction = 0.8;
  // Share of an island's members that emigrate every migration_interval
  // generations. Inert with a single island.
  double migration_fraction = 0.2;
  int migration_interval = 20;
  int islands = 1;
  int stall_generations = 50;
  double stall_tolerance = 1e-6;
  int max_evaluations = 10401;
  // Initial Gaussian mutation sigma as a share of the initial range; it decays
  // linearly by mutation_shrink over the generations the budget allows.
  double mutation_scale = 0.1;
  double mutation_shrink = 0.9;
  // Per-gene cap on that sigma as a multiple of the island's current spread
  // (standard deviation of the gene); 0 disables the cap.
  double spread_mutation = 0.5;
  double blend_alpha = 0.25;
  double gene_limit = 120.0;
  std::uint64_t seed = 20240611;
  int threads = 1;

  void validate() const;
};

struct RefineConfig {
  int max_iterations = 20;
  double violation_tolerance = 0.01;
  double fd_step = 1e-6;
  double step_tolerance = 1e-10;
  double initial_damping = 1e-5;
  int max_damping_trials = 12;

  void validate() const;
};

using ScalarObjective = std::function<double(const Eigen::VectorXd&)>;

struct GaResult {
  Eigen::VectorXd best;
  double best_value = 0.0;
  std::vector<double> history;  // best value after each generation, gen 0 first
  int evaluations = 0;
  int generations = 0;
};

GaResult ga_search(const ScalarObjective& objective, int dimension, const GaConfig& cfg);

// Sum-of-squares problem staged by penalty weight. F_stage(z) = |r(z, stage)|^2.
struct StagedLeastSquares {
  int stages = 1;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, int)> residuals;
  // Optional; drives the success flag.
  std::function<double(const Eigen::VectorXd&)> max_violation;
};

struct RefineResult {
  Eigen::VectorXd z;
  double initial_value = 0.0;  // under the last stage
  double value = 0.0;          // under the last stage
  std::vector<double> history;
  int iterations = 0;
  bool success = false;
  bool no_progress = false;
};

// Levenberg-Marquardt on the residuals with central-difference Jacobians.
// Returns the iterate with the lowest last-stage value.
RefineResult local_refine(const Eigen::VectorXd& z0, const StagedLeastSquares& problem,
                          const RefineConfig& cfg);

// The gait problem seen by both layers.
class GaitPenaltyProblem {
 public:
  GaitPenaltyProblem(RobotParams robot, GaitProblemConfig problem);

  PolynomialGait gait(const FreeParams& z) const;
  Eigen::VectorXd residuals(const FreeParams& z, const PenaltyWeights& w) const;
  double value(const FreeParams& z, const PenaltyWeights& w) const;
  ConstraintReport report(const FreeParams& z) const;

  const RobotParams& robot() const { return robot_; }
  const GaitProblemConfig& problem() const { return problem_; }

 private:
  RobotParams robot_;
  GaitProblemConfig problem_;
};

double penalized_objective(const FreeParams& z, const RobotParams& robot,
                           const GaitProblemConfig& problem, const PenaltyWeights& weights);

struct GaitReport {
  FreeParams best;
  PolynomialGait gait;
  double objective = 0.0;
  ConstraintReport constraints;
  std::vector<double> ga_history;
  std::vector<double> refine_history;
  int ga_evaluations = 0;
  int refine_iterations = 0;
  bool refine_no_progress = false;
  std::uint64_t seed = 0;
  double wall_clock_seconds = 0.0;

  bool feasible() const { return constraints.feasible; }
};

struct OptimizeOptions {
  bool run_ga = true;
  // Starting point for refinement when the GA layer is skipped.
  std::optional<FreeParams> warm_start;
};

FreeParams to_free_params(const Eigen::VectorXd& z);

GaitReport optimize_gait(const RobotParams& robot, const GaitProblemConfig& problem,
                         const GaConfig& ga, const RefineConfig& refine,
                         const PenaltyConfig& penalty, std::uint64_t seed,
                         const OptimizeOptions& options = {});

}  // namespace biped
