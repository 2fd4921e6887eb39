// SPDX-License-Identifier: Apache-2.0

#include "biped_gait/hybrid_optimizer.hpp"

#include <chrono>
#include <cmath>

namespace biped {

void PenaltyConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw GaitError(ErrorCode::kInvalidArgument, what);
  };
  require(!equality_weights.empty(), "penalty schedule is empty");
  require(equality_weights.size() == inequality_weights.size(),
          "equality and inequality schedules differ in length");
  for (std::size_t i = 0; i < equality_weights.size(); ++i) {
    require(equality_weights[i] > 0.0 && inequality_weights[i] > 0.0,
            "penalty weights must be positive");
    if (i > 0) {
      require(equality_weights[i] > equality_weights[i - 1] &&
                  inequality_weights[i] > inequality_weights[i - 1],
              "penalty schedules must be strictly increasing");
    }
  }
  require(violation_threshold > 0.0, "violation threshold must be positive");
}

FreeParams to_free_params(const Eigen::VectorXd& z) {
  if (z.size() != kFreeParams) {
    throw GaitError(ErrorCode::kInvalidArgument, "expected 15 free parameters");
  }
  FreeParams p;
  p.z = z;
  return p;
}

GaitPenaltyProblem::GaitPenaltyProblem(RobotParams robot, GaitProblemConfig problem)
    : robot_(std::move(robot)), problem_(std::move(problem)) {
  robot_.validate();
  problem_.validate();
}

PolynomialGait GaitPenaltyProblem::gait(const FreeParams& z) const {
  return assemble_gait(z, problem_.q_init, problem_.q_final, problem_.step_duration());
}

Eigen::VectorXd GaitPenaltyProblem::residuals(const FreeParams& z, const PenaltyWeights& w) const {
  if (!(w.equality > 0.0) || !(w.inequality > 0.0)) {
    throw GaitError(ErrorCode::kInvalidArgument, "penalty weights must be positive");
  }
  const ConstraintResiduals c = constraint_residuals(gait(z), robot_, problem_);
  const auto n_obj = static_cast<Eigen::Index>(c.objective_terms.size());
  const auto n_eq = static_cast<Eigen::Index>(c.equalities.size());
  const auto n_in = static_cast<Eigen::Index>(c.inequalities.size());
  Eigen::VectorXd r(n_obj + n_eq + n_in);
  for (Eigen::Index i = 0; i < n_obj; ++i) r[i] = c.objective_terms[static_cast<std::size_t>(i)];
  const double se = std::sqrt(w.equality);
  const double si = std::sqrt(w.inequality);
  for (Eigen::Index i = 0; i < n_eq; ++i) r[n_obj + i] = se * c.equalities[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i < n_in; ++i) {
    r[n_obj + n_eq + i] = si * c.inequalities[static_cast<std::size_t>(i)];
  }
  if (c.report[Constraint::kImpactInvariance] >= kInfeasibleSentinel) {
    // Unresolvable strike: the impact block carries the flat sentinel instead
    // of weighted residuals.
    const Eigen::Index first = n_obj + n_eq - kJoints;
    r.segment(first, kJoints).setZero();
    r[first] = std::sqrt(kInfeasibleSentinel);
  }
  return r;
}

double GaitPenaltyProblem::value(const FreeParams& z, const PenaltyWeights& w) const {
  return residuals(z, w).squaredNorm();
}

ConstraintReport GaitPenaltyProblem::report(const FreeParams& z) const {
  return constraint_residuals(gait(z), robot_, problem_).report;
}

double penalized_objective(const FreeParams& z, const RobotParams& robot,
                           const GaitProblemConfig& problem, const PenaltyWeights& weights) {
  return GaitPenaltyProblem(robot, problem).value(z, weights);
}

GaitReport optimize_gait(const RobotParams& robot, const GaitProblemConfig& problem,
                         const GaConfig& ga, const RefineConfig& refine,
                         const PenaltyConfig& penalty, std::uint64_t seed,
                         const OptimizeOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  ga.validate();
  refine.validate();
  penalty.validate();
  const GaitPenaltyProblem gp(robot, problem);

  auto weights = [&penalty](int stage) {
    return PenaltyWeights{penalty.equality_weights[static_cast<std::size_t>(stage)],
                          penalty.inequality_weights[static_cast<std::size_t>(stage)]};
  };

  GaitReport report;
  report.seed = seed;

  Eigen::VectorXd start;
  if (options.run_ga) {
    GaConfig cfg = ga;
    cfg.seed = seed;
    const PenaltyWeights w0 = weights(0);
    const GaResult g = ga_search(
        [&](const Eigen::VectorXd& z) { return gp.value(to_free_params(z), w0); }, kFreeParams, cfg);
    start = g.best;
    report.ga_history = g.history;
    report.ga_evaluations = g.evaluations;
  } else {
    if (!options.warm_start) {
      throw GaitError(ErrorCode::kInvalidArgument, "GA disabled without a warm start");
    }
    start = options.warm_start->z;
  }

  StagedLeastSquares ls;
  ls.stages = penalty.stages();
  ls.residuals = [&](const Eigen::VectorXd& z, int stage) {
    return gp.residuals(to_free_params(z), weights(stage));
  };
  ls.max_violation = [&](const Eigen::VectorXd& z) {
    return gp.report(to_free_params(z)).max_violation();
  };
  RefineConfig rcfg = refine;
  rcfg.violation_tolerance = penalty.violation_threshold;
  const RefineResult r = local_refine(start, ls, rcfg);

  report.best = to_free_params(r.z);
  report.refine_history = r.history;
  report.refine_iterations = r.iterations;
  report.refine_no_progress = r.no_progress;

  // Every reported number is recomputed from the stored z.
  report.gait = gp.gait(report.best);
  report.constraints = evaluate_constraints(report.gait, robot, problem);
  report.constraints.threshold = penalty.violation_threshold;
  report.constraints.feasible = report.constraints.max_violation() <= penalty.violation_threshold;
  report.objective = report.constraints.objective;
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace biped
