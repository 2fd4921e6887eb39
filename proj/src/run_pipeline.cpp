// SPDX-License-Identifier: Apache-2.0

#include "biped_gait/gait_app.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace biped {

using Json = nlohmann::ordered_json;

namespace {

std::atomic<int> g_log_level{static_cast<int>(LogLevel::kQuiet)};

Json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json gait_json(const PolynomialGait& gait) {
  Json c = Json::array();
  for (int k = 0; k < kJoints; ++k) {
    for (int i = 0; i < kCoeffsPerJoint; ++i) c.push_back(gait.alpha(k, i));
  }
  return {{"coefficients", c}, {"duration", gait.duration}};
}

Json constraints_json(const ConstraintReport& rep) {
  Json v;
  for (int c = 0; c < kConstraintCount; ++c) {
    v[std::string(constraint_name(static_cast<Constraint>(c)))] = rep.violation[static_cast<std::size_t>(c)];
  }
  return {{"feasible", rep.feasible},
          {"objective", rep.objective},
          {"max_violation", rep.max_violation()},
          {"threshold", rep.threshold},
          {"violations", v}};
}

class Csv {
 public:
  explicit Csv(const std::string& header) { out_ << header << '\n'; out_ << std::setprecision(12); }

  Csv& operator<<(double v) {
    sep();
    if (std::isfinite(v)) {
      out_ << v;
    } else {
      out_ << "nan";
    }
    return *this;
  }

  Csv& operator<<(int v) {
    sep();
    out_ << v;
    return *this;
  }

  void end_row() {
    out_ << '\n';
    first_ = true;
  }

  std::string str() const { return out_.str(); }

 private:
  void sep() {
    if (!first_) out_ << ',';
    first_ = false;
  }

  std::ostringstream out_;
  bool first_ = true;
};

}  // namespace

void set_log_level(LogLevel level) { g_log_level = static_cast<int>(level); }

LogLevel log_level() { return static_cast<LogLevel>(g_log_level.load()); }

void log_message(LogLevel level, std::string_view message) {
  if (static_cast<int>(level) > g_log_level.load() || level == LogLevel::kQuiet) return;
  std::cerr << "[biped-gait] " << message << '\n';
}

bool boundary_geometry_valid(const Vec5& q_init, const Vec5& q_final, const RobotParams& robot,
                             double step_length) {
  const Vec2 a = forward_kinematics(q_init, robot).swing_foot;
  const Vec2 b = forward_kinematics(q_final, robot).swing_foot;
  return std::abs(a.y()) <= kBoundaryHeightTolerance &&
         std::abs(b.y()) <= kBoundaryHeightTolerance &&
         std::abs(a.x() + step_length) <= kBoundaryStepTolerance &&
         std::abs(b.x() - step_length) <= kBoundaryStepTolerance;
}

BoundaryCheck check_boundaries(const RobotParams& robot, GaitProblemConfig& problem) {
  BoundaryCheck out;
  out.init_swing_foot = forward_kinematics(problem.q_init, robot).swing_foot;
  out.final_swing_foot = forward_kinematics(problem.q_final, robot).swing_foot;
  out.table_values_valid =
      boundary_geometry_valid(problem.q_init, problem.q_final, robot, problem.step_length);
  if (!out.table_values_valid) {
    const ChainGeometry g = forward_kinematics(problem.q_final, robot);
    const double trunk = relative_to_absolute(problem.q_final)[2];
    const double hip_height = g.hip.y();
    if (!(hip_height > 0.0)) {
      throw GaitError(ErrorCode::kInvalidArgument,
                      "boundary configuration puts the hip below the ground");
    }
    const Vec2 hip(0.5 * problem.step_length, hip_height);
    const Vec2 foot(problem.step_length, 0.0);
    problem.q_final = inverse_kinematics(hip, foot, trunk, robot).q;
    problem.q_init = RelabelMaps::standard().relabel * problem.q_final;
    out.regenerated = true;
    out.init_swing_foot = forward_kinematics(problem.q_init, robot).swing_foot;
    out.final_swing_foot = forward_kinematics(problem.q_final, robot).swing_foot;
    log_message(LogLevel::kInfo, "boundary configurations regenerated by inverse kinematics");
  }
  out.q_init = problem.q_init;
  out.q_final = problem.q_final;
  return out;
}

OptimizeOutcome run_optimize(const RunConfig& cfg) {
  cfg.validate();
  OptimizeOutcome out;
  GaitProblemConfig problem = cfg.problem;
  out.boundary = check_boundaries(cfg.robot, problem);
  GaConfig ga = cfg.ga;
  ga.seed = cfg.seed;
  RefineConfig refine = cfg.refine;
  refine.violation_tolerance = cfg.penalty.violation_threshold;
  problem.violation_threshold = cfg.penalty.violation_threshold;
  log_message(LogLevel::kInfo, "optimizing with seed " + std::to_string(cfg.seed));
  out.report = optimize_gait(cfg.robot, problem, ga, refine, cfg.penalty, cfg.seed);
  std::ostringstream msg;
  msg << "objective " << out.report.objective << ", max violation "
      << out.report.constraints.max_violation() << ", " << out.report.ga_evaluations
      << " GA evaluations, " << out.report.refine_iterations << " refinement iterations, "
      << out.report.wall_clock_seconds << " s";
  log_message(LogLevel::kInfo, msg.str());
  return out;
}

std::string report_to_json(const OptimizeOutcome& outcome, const RunConfig& cfg) {
  const GaitReport& r = outcome.report;
  const BoundaryCheck& b = outcome.boundary;
  Json root;
  root["status"] = r.feasible() ? "FEASIBLE" : "INFEASIBLE";
  root["seed"] = r.seed;
  root["objective"] = r.objective;
  root["constraints"] = constraints_json(r.constraints);
  root["gait"] = gait_json(r.gait);
  root["free_parameters"] = vec_json(r.best.z);
  root["boundary"] = {{"q_init", vec_json(b.q_init)},
                      {"q_final", vec_json(b.q_final)},
                      {"init_swing_foot", vec_json(b.init_swing_foot)},
                      {"final_swing_foot", vec_json(b.final_swing_foot)},
                      {"configured_values_valid", b.table_values_valid},
                      {"regenerated", b.regenerated}};
  root["ga"] = {{"evaluations", r.ga_evaluations}, {"history", r.ga_history}};
  root["refine"] = {{"iterations", r.refine_iterations},
                    {"no_progress", r.refine_no_progress},
                    {"history", r.refine_history}};
  root["config"] = Json::parse(run_config_to_json(cfg));
  return root.dump(2) + "\n";
}

void write_optimize_artifacts(const std::filesystem::path& dir, const OptimizeOutcome& outcome,
                              const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw GaitError(ErrorCode::kIoError, "cannot create '" + dir.string() + "'");

  const GaitReport& r = outcome.report;
  const GaitSamples s = sample_gait(r.gait, cfg.robot, cfg.problem.grid_size);

  Csv traj(
      "t,q1,q2,q3,q4,q5,dq1,dq2,dq3,dq4,dq5,ddq1,ddq2,ddq3,ddq4,ddq5,"
      "tau2,tau3,tau4,tau5,fx,fy,swing_x,swing_y");
  Csv phase("t,q1,dq1,q2,dq2,q3,dq3,q4,dq4,q5,dq5");
  Csv reaction("t,fx,fy,friction_ratio");
  Csv torque("t,tau2,tau3,tau4,tau5");
  Csv swing("t,x,y");
  for (std::size_t i = 0; i < s.time.size(); ++i) {
    const GaitSample& x = s.state[i];
    traj << s.time[i];
    for (int k = 0; k < kJoints; ++k) traj << x.q[k];
    for (int k = 0; k < kJoints; ++k) traj << x.qdot[k];
    for (int k = 0; k < kJoints; ++k) traj << x.qddot[k];
    for (int a = 0; a < kActuators; ++a) traj << s.torque[i][a];
    traj << s.reaction[i].x() << s.reaction[i].y() << s.swing_foot[i].x() << s.swing_foot[i].y();
    traj.end_row();

    phase << s.time[i];
    for (int k = 0; k < kJoints; ++k) phase << x.q[k] << x.qdot[k];
    phase.end_row();

    const double ratio = s.reaction[i].y() > 0.0 ? std::abs(s.reaction[i].x()) / s.reaction[i].y()
                                                 : std::numeric_limits<double>::quiet_NaN();
    reaction << s.time[i] << s.reaction[i].x() << s.reaction[i].y() << ratio;
    reaction.end_row();

    torque << s.time[i];
    for (int a = 0; a < kActuators; ++a) torque << s.torque[i][a];
    torque.end_row();

    swing << s.time[i] << s.swing_foot[i].x() << s.swing_foot[i].y();
    swing.end_row();
  }

  Csv stick(
      "frame,t,stance_foot_x,stance_foot_y,stance_knee_x,stance_knee_y,hip_x,hip_y,"
      "trunk_tip_x,trunk_tip_y,swing_knee_x,swing_knee_y,swing_foot_x,swing_foot_y");
  constexpr int kFrames = 26;
  for (int f = 0; f < kFrames; ++f) {
    const double t = f + 1 == kFrames ? r.gait.duration : r.gait.duration * f / (kFrames - 1);
    const ChainGeometry g = forward_kinematics(eval_gait(r.gait, t).q, cfg.robot);
    stick << f << t;
    for (const Vec2* p : {&g.stance_foot, &g.stance_knee, &g.hip, &g.trunk_tip, &g.swing_knee,
                          &g.swing_foot}) {
      stick << p->x() << p->y();
    }
    stick.end_row();
  }

  std::ostringstream history;
  for (std::size_t i = 0; i < r.ga_history.size(); ++i) {
    history << Json{{"layer", "ga"}, {"step", i}, {"best", r.ga_history[i]}}.dump() << '\n';
  }
  for (std::size_t i = 0; i < r.refine_history.size(); ++i) {
    history << Json{{"layer", "refine"}, {"step", i + 1}, {"best", r.refine_history[i]}}.dump()
            << '\n';
  }

  write_file_atomic(dir / "trajectory.csv", traj.str());
  write_file_atomic(dir / "phase_portraits.csv", phase.str());
  write_file_atomic(dir / "ground_reaction.csv", reaction.str());
  write_file_atomic(dir / "torques.csv", torque.str());
  write_file_atomic(dir / "swing_foot.csv", swing.str());
  write_file_atomic(dir / "stick_figure.csv", stick.str());
  write_file_atomic(dir / "history.jsonl", history.str());
  write_file_atomic(dir / "gait.json", gait_to_json(r.gait));
  // Last, so a present report means a complete run.
  write_file_atomic(dir / "report.json", report_to_json(outcome, cfg));
}

VerifyOutcome run_verify(const PolynomialGait& gait, const RunConfig& cfg) {
  cfg.validate();
  GaitProblemConfig problem = cfg.problem;
  problem.violation_threshold = cfg.penalty.violation_threshold;
  VerifyOutcome out;
  out.gait = gait;
  out.constraints = evaluate_constraints(gait, cfg.robot, problem);
  return out;
}

std::string verify_to_json(const VerifyOutcome& outcome) {
  Json root;
  root["status"] = outcome.constraints.feasible ? "FEASIBLE" : "INFEASIBLE";
  root["objective"] = outcome.constraints.objective;
  root["constraints"] = constraints_json(outcome.constraints);
  root["gait"] = gait_json(outcome.gait);
  return root.dump(2) + "\n";
}

}  // namespace biped
