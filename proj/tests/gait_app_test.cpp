// SPDX-License-Identifier: Apache-2.0

#include "biped_gait/gait_app.hpp"
#include "support/lagrange_oracle.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;
using biped::ErrorCode;
using biped::GaitError;
using biped::RunConfig;
using biped::Vec2;
using biped::Vec5;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const GaitError& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("biped_gait_app_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int line_count(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

RunConfig quick_config() {
  RunConfig cfg = biped::parse_run_config(
      R"({"ga": {"population": 40, "elite_count": 2, "max_evaluations": 400},
          "refine": {"max_iterations": 6}})");
  return cfg;
}

TEST(RunConfig, EmptyDocumentKeepsDefaults) {
  const RunConfig cfg = biped::parse_run_config("{}");
  EXPECT_EQ(biped::run_config_to_json(cfg), biped::run_config_to_json(RunConfig{}));
  EXPECT_EQ(cfg.seed, 20240611u);
  EXPECT_EQ(cfg.ga.population, 300);
  EXPECT_EQ(cfg.ga.max_evaluations, 10401);
  EXPECT_EQ(cfg.refine.max_iterations, 20);
  EXPECT_EQ(cfg.problem.grid_size, 51);
  EXPECT_DOUBLE_EQ(cfg.problem.torque_max, 150.0);
}

TEST(RunConfig, SerializationRoundTrips) {
  RunConfig cfg = biped::parse_run_config(
      R"({"run": {"seed": 42, "output_dir": "x"}, "problem": {"torque_max": 120.5},
          "penalty": {"equality_weights": [1, 10], "inequality_weights": [2, 20],
                      "violation_threshold": 0.05}})");
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.ga.seed, 42u);
  EXPECT_DOUBLE_EQ(cfg.problem.violation_threshold, 0.05);
  EXPECT_DOUBLE_EQ(cfg.refine.violation_tolerance, 0.05);
  const std::string text = biped::run_config_to_json(cfg);
  EXPECT_EQ(biped::run_config_to_json(biped::parse_run_config(text)), text);
}

TEST(RunConfig, RejectsMalformedInput) {
  EXPECT_EQ(code_of([] { biped::parse_run_config("{"); }), ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { biped::parse_run_config("[]"); }), ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { biped::parse_run_config(R"({"solver": {}})"); }), ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { biped::parse_run_config(R"({"ga": {"populaton": 10}})"); }),
            ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { biped::parse_run_config(R"({"ga": {"population": "many"}})"); }),
            ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { biped::parse_run_config(R"({"ga": {"population": 2.5}})"); }),
            ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { biped::parse_run_config(R"({"robot": {"mass": [1, 2]}})"); }),
            ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { biped::parse_run_config(R"({"run": {"seed": -1}})"); }),
            ErrorCode::kParseError);
}

TEST(RunConfig, RejectsInvalidValues) {
  EXPECT_EQ(code_of([] { biped::parse_run_config(R"({"ga": {"population": 10}})"); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { biped::parse_run_config(R"({"problem": {"velocity": 0}})"); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] {
              biped::parse_run_config(R"({"penalty": {"equality_weights": [10, 1]}})");
            }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { biped::parse_run_config(R"({"robot": {"gravity": -9.81}})"); }),
            ErrorCode::kInvalidArgument);
}

TEST(RunConfig, MissingFileIsAnIoError) {
  EXPECT_EQ(code_of([] { biped::load_run_config("/nonexistent/config.json"); }), ErrorCode::kIoError);
}

TEST(GaitFile, AcceptsAllThreeForms) {
  biped::PolynomialGait g;
  g.duration = 0.5;
  for (int k = 0; k < 5; ++k) {
    for (int i = 0; i < 5; ++i) g.alpha(k, i) = 0.1 * (k + 1) - 0.37 * i + 1e-3 * k * i;
  }
  const std::string json = biped::gait_to_json(g);
  EXPECT_EQ(biped::parse_gait(json).alpha, g.alpha);
  EXPECT_EQ(biped::parse_gait("{\"status\": \"X\", \"gait\": " + json + "}").alpha, g.alpha);
  std::ostringstream plain;
  plain.precision(17);
  for (int k = 0; k < 5; ++k) {
    for (int i = 0; i < 5; ++i) plain << g.alpha(k, i) << (i == 4 ? "\n" : " ");
  }
  plain << "0.5\n";
  const auto p = biped::parse_gait(plain.str());
  EXPECT_EQ(p.alpha, g.alpha);
  EXPECT_EQ(p.duration, 0.5);
}

TEST(GaitFile, RejectsBrokenGaits) {
  EXPECT_EQ(code_of([] { biped::parse_gait("1 2 3"); }), ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { biped::parse_gait("{\"coefficients\": [1, 2], \"duration\": 0.5}"); }),
            ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { biped::parse_gait("0 0 0 0 0 0 0 0 0 0 0 0 x"); }),
            ErrorCode::kParseError);
  std::string zeros;
  for (int i = 0; i < 25; ++i) zeros += "0 ";
  EXPECT_EQ(code_of([&] { biped::parse_gait(zeros + "-0.5"); }), ErrorCode::kParseError);
  EXPECT_NO_THROW(biped::parse_gait(zeros + "0.5"));
  EXPECT_EQ(code_of([] { biped::load_gait("/nonexistent/gait.json"); }), ErrorCode::kIoError);
}

TEST(Boundaries, ConfiguredValuesAreGeometricallyValid) {
  auto problem = biped::GaitProblemConfig::defaults();
  const auto robot = biped::RobotParams::rabbit();
  const auto check = biped::check_boundaries(robot, problem);
  EXPECT_TRUE(check.table_values_valid);
  EXPECT_FALSE(check.regenerated);
  EXPECT_EQ(check.q_final, biped::GaitProblemConfig::defaults().q_final);
  EXPECT_LE((oracle::swing_foot(problem.q_init, robot) - Vec2(-0.5, 0.0)).norm(), 1e-3);
  EXPECT_LE((oracle::swing_foot(problem.q_final, robot) - Vec2(0.5, 0.0)).norm(), 1e-3);
}

TEST(Boundaries, InvalidValuesAreRebuiltByInverseKinematics) {
  auto problem = biped::GaitProblemConfig::defaults();
  const auto robot = biped::RobotParams::rabbit();
  problem.q_final[0] += 0.2;
  const double trunk = oracle::chain_at(problem.q_final, robot).angle[2];
  const auto check = biped::check_boundaries(robot, problem);
  EXPECT_FALSE(check.table_values_valid);
  EXPECT_TRUE(check.regenerated);
  EXPECT_TRUE(biped::boundary_geometry_valid(problem.q_init, problem.q_final, robot, problem.step_length));
  EXPECT_LE((oracle::swing_foot(problem.q_final, robot) - Vec2(0.5, 0.0)).norm(), 1e-12);
  EXPECT_LE((oracle::swing_foot(problem.q_init, robot) - Vec2(-0.5, 0.0)).norm(), 1e-12);
  EXPECT_NEAR(oracle::chain_at(problem.q_final, robot).angle[2], trunk, 1e-12);
  const auto maps = biped::RelabelMaps::standard();
  EXPECT_LE((maps.relabel * problem.q_final - problem.q_init).norm(), 1e-15);
}

TEST(Verify, ZeroGaitViolatesTheBoundaries) {
  biped::PolynomialGait g;
  g.duration = 0.5;
  const auto v = biped::run_verify(g, RunConfig{});
  EXPECT_GT(v.constraints[biped::Constraint::kBoundary], 0.0);
  EXPECT_FALSE(v.constraints.feasible);
}

TEST(Verify, ReproducesTheOptimizerReport) {
  const RunConfig cfg = quick_config();
  const auto out = biped::run_optimize(cfg);
  const auto gait = biped::parse_gait(biped::report_to_json(out, cfg));
  const auto v = biped::run_verify(gait, cfg);
  for (int c = 0; c < biped::kConstraintCount; ++c) {
    EXPECT_NEAR(v.constraints.violation[c], out.report.constraints.violation[c], 1e-12);
  }
  EXPECT_NEAR(v.constraints.objective, out.report.objective, 1e-12 * out.report.objective);
  EXPECT_EQ(v.constraints.feasible, out.report.feasible());
}

TEST(Optimize, ZeroTorqueLimitIsInfeasible) {
  RunConfig cfg = quick_config();
  cfg.problem.torque_max = 0.0;
  const auto out = biped::run_optimize(cfg);
  EXPECT_FALSE(out.report.feasible());
  EXPECT_GT(out.report.constraints[biped::Constraint::kTorque], 0.0);
  const std::string json = biped::report_to_json(out, cfg);
  EXPECT_NE(json.find("\"INFEASIBLE\""), std::string::npos);
}

TEST(Optimize, ReportsAreByteIdenticalAcrossRuns) {
  const RunConfig cfg = quick_config();
  EXPECT_EQ(biped::report_to_json(biped::run_optimize(cfg), cfg),
            biped::report_to_json(biped::run_optimize(cfg), cfg));
}

TEST(Optimize, ArtifactsAreWrittenWithAllSeries) {
  const RunConfig cfg = quick_config();
  const auto out = biped::run_optimize(cfg);
  const fs::path dir = scratch("artifacts");
  biped::write_optimize_artifacts(dir, out, cfg);
  for (const char* f : {"trajectory.csv", "phase_portraits.csv", "ground_reaction.csv",
                        "torques.csv", "swing_foot.csv"}) {
    EXPECT_EQ(line_count(dir / f), 52) << f;
  }
  EXPECT_EQ(line_count(dir / "stick_figure.csv"), 27);
  EXPECT_EQ(slurp(dir / "report.json"), biped::report_to_json(out, cfg));
  EXPECT_TRUE(fs::exists(dir / "history.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "gait.json"));
  for (const auto& e : fs::directory_iterator(dir)) {
    EXPECT_NE(e.path().extension(), ".tmp") << e.path();
  }
  fs::remove_all(dir);
}

// Upright pose with the whole-body COM straight above the stance foot and the
// swing foot lifted: a static equilibrium of the single-support dynamics.
Vec5 balanced_pose(const biped::RobotParams& robot) {
  Vec5 q(0.0, 0.2, -0.3, 0.6, 1.0);
  double lo = -0.5, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    q[0] = 0.5 * (lo + hi);
    (oracle::com(q, robot).x() > 0.0 ? hi : lo) = q[0];
  }
  return q;
}

TEST(Simulate, StaticGaitNeverTouchesDown) {
  const auto robot = biped::RobotParams::rabbit();
  biped::PolynomialGait g;
  g.duration = 0.5;
  g.alpha.col(0) = balanced_pose(robot);
  ASSERT_GT(oracle::swing_foot(g.alpha.col(0), robot).y(), 0.05);
  EXPECT_EQ(code_of([&] { biped::simulate_step(g, robot); }), ErrorCode::kNoImpact);
}

TEST(Simulate, TouchdownStateFollowsTheStrikeAndRelabel) {
  const RunConfig cfg = quick_config();
  const auto out = biped::run_optimize(cfg);
  const auto robot = cfg.robot;
  biped::SimulationOutcome sim;
  try {
    sim = biped::simulate_step(out.report.gait, robot);
  } catch (const GaitError& e) {
    GTEST_SKIP() << "no touchdown for this gait: " << e.what();
  }
  EXPECT_GT(sim.impact_time, 0.0);
  EXPECT_LE(std::abs(oracle::swing_foot(sim.pre_impact.q, robot).y()), 1e-6);
  const auto strike = biped::impact_velocity_map_unchecked(sim.pre_impact.q, sim.pre_impact.qdot, robot);
  const auto maps = biped::RelabelMaps::standard();
  EXPECT_LE((sim.post_impact.q - maps.relabel * sim.pre_impact.q).norm(), 1e-14);
  EXPECT_LE((sim.post_impact.qdot - maps.relabel * strike.qdot_plus).norm(), 1e-12);
  EXPECT_LE((sim.q_deviation - (sim.post_impact.q - sim.initial.q)).norm(), 1e-14);
  EXPECT_LE((sim.qdot_deviation - (sim.post_impact.qdot - sim.initial.qdot)).norm(), 1e-14);
  const double dev = std::max(sim.q_deviation.cwiseAbs().maxCoeff(), sim.qdot_deviation.cwiseAbs().maxCoeff());
  EXPECT_DOUBLE_EQ(sim.max_deviation, dev);
}

TEST(Files, AtomicWriteLeavesOnlyTheTarget) {
  const fs::path dir = scratch("atomic");
  fs::create_directories(dir);
  biped::write_file_atomic(dir / "a.txt", "first");
  biped::write_file_atomic(dir / "a.txt", "second");
  EXPECT_EQ(slurp(dir / "a.txt"), "second");
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1);
  fs::remove_all(dir);
}

}  // namespace
