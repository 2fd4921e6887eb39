// SPDX-License-Identifier: Apache-2.0

#include "biped_gait/biped_gait.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitRuntime = 3;

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using ConfigPtr = std::unique_ptr<bg_config, Deleter<bg_config, bg_config_free>>;
using ResultPtr = std::unique_ptr<bg_result, Deleter<bg_result, bg_result_free>>;
using GaitPtr = std::unique_ptr<bg_gait, Deleter<bg_gait, bg_gait_free>>;
using SimulationPtr = std::unique_ptr<bg_simulation, Deleter<bg_simulation, bg_simulation_free>>;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string gait;
};

int report_error(const char* what, bg_status status, int exit_code) {
  std::fprintf(stderr, "error: %s: %s (%s)\n", what, bg_last_error(), bg_status_string(status));
  return exit_code;
}

void configure_logging() {
  const char* env = std::getenv("BIPED_GAIT_LOG");
  const std::string level = env ? env : "info";
  if (level == "quiet" || level == "0") {
    bg_set_log_level(BG_LOG_QUIET);
  } else if (level == "debug" || level == "2") {
    bg_set_log_level(BG_LOG_DEBUG);
  } else {
    bg_set_log_level(BG_LOG_INFO);
  }
}

template <typename Getter>
std::string fetch_text(Getter get) {
  size_t needed = 0;
  if (get(nullptr, 0, &needed) != BG_OK) return {};
  std::string text(needed, '\0');
  if (get(text.data(), text.size(), &needed) != BG_OK) return {};
  text.resize(needed - 1);
  return text;
}

// Config errors are usage errors.
int load_config(const Options& opt, ConfigPtr& out) {
  bg_config* raw = nullptr;
  const bg_status st = opt.config.empty() ? bg_config_default(&raw) : bg_config_load(opt.config.c_str(), &raw);
  if (st != BG_OK) return report_error("config", st, kExitUsage);
  out.reset(raw);
  if (opt.seed) bg_config_set_seed(out.get(), *opt.seed);
  if (!opt.out.empty()) {
    const bg_status s = bg_config_set_output_dir(out.get(), opt.out.c_str());
    if (s != BG_OK) return report_error("output directory", s, kExitUsage);
  }
  return kExitOk;
}

int load_gait(const Options& opt, GaitPtr& out) {
  bg_gait* raw = nullptr;
  const bg_status st = bg_gait_load(opt.gait.c_str(), &raw);
  if (st != BG_OK) return report_error("gait", st, kExitUsage);
  out.reset(raw);
  return kExitOk;
}

int run_optimize(const Options& opt) {
  ConfigPtr cfg;
  if (int rc = load_config(opt, cfg)) return rc;
  bg_result* raw = nullptr;
  const bg_status st = bg_optimize(cfg.get(), 1, &raw);
  if (st != BG_OK) return report_error("optimize", st, kExitRuntime);
  ResultPtr result(raw);
  int feasible = 0;
  double objective = 0.0;
  double violation = 0.0;
  bg_result_feasible(result.get(), &feasible);
  bg_result_objective(result.get(), &objective);
  bg_result_max_violation(result.get(), &violation);
  const std::string dir = fetch_text([&](char* b, size_t c, size_t* n) {
    return bg_config_output_dir(cfg.get(), b, c, n);
  });
  std::printf("%s objective=%.9g max_violation=%.9g report=%s/report.json\n",
              feasible ? "FEASIBLE" : "INFEASIBLE", objective, violation, dir.c_str());
  return feasible ? kExitOk : kExitInfeasible;
}

int run_verify(const Options& opt) {
  ConfigPtr cfg;
  if (int rc = load_config(opt, cfg)) return rc;
  GaitPtr gait;
  if (int rc = load_gait(opt, gait)) return rc;
  bg_result* raw = nullptr;
  const bg_status st = bg_verify(cfg.get(), gait.get(), &raw);
  if (st != BG_OK) return report_error("verify", st, kExitRuntime);
  ResultPtr result(raw);
  const std::string text = fetch_text([&](char* b, size_t c, size_t* n) {
    return bg_result_to_json(result.get(), b, c, n);
  });
  std::fputs(text.c_str(), stdout);
  if (!opt.out.empty()) {
    const bg_status w = bg_result_write(result.get(), opt.out.c_str());
    if (w != BG_OK) return report_error("write", w, kExitRuntime);
  }
  int feasible = 0;
  bg_result_feasible(result.get(), &feasible);
  return feasible ? kExitOk : kExitInfeasible;
}

int run_simulate(const Options& opt) {
  ConfigPtr cfg;
  if (int rc = load_config(opt, cfg)) return rc;
  GaitPtr gait;
  if (int rc = load_gait(opt, gait)) return rc;
  bg_simulation* raw = nullptr;
  const bg_status st = bg_simulate_step(cfg.get(), gait.get(), &raw);
  if (st != BG_OK) return report_error("simulate-step", st, kExitRuntime);
  SimulationPtr sim(raw);
  const std::string text = fetch_text([&](char* b, size_t c, size_t* n) {
    return bg_simulation_to_json(sim.get(), b, c, n);
  });
  std::fputs(text.c_str(), stdout);
  if (!opt.out.empty()) {
    const bg_status w = bg_simulation_write(sim.get(), opt.out.c_str());
    if (w != BG_OK) return report_error("write", w, kExitRuntime);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic gait generation for a planar five-link biped"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;

  auto* optimize = app.add_subcommand("optimize", "Run the hybrid optimization and write the report and series");
  optimize->add_option("--config", opt.config, "JSON run configuration")->check(CLI::ExistingFile);
  optimize->add_option("--seed", seed, "Random seed (overrides the config)");
  optimize->add_option("--out", opt.out, "Output directory (overrides the config)");

  auto* verify = app.add_subcommand("verify", "Evaluate constraints and objective of a stored gait");
  verify->add_option("--gait", opt.gait, "Gait file")->required()->check(CLI::ExistingFile);
  verify->add_option("--config", opt.config, "JSON run configuration")->check(CLI::ExistingFile);
  verify->add_option("--out", opt.out, "Directory for verify.json");

  auto* simulate = app.add_subcommand("simulate-step", "Integrate one step through touchdown");
  simulate->add_option("--gait", opt.gait, "Gait file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--config", opt.config, "JSON run configuration")->check(CLI::ExistingFile);
  simulate->add_option("--out", opt.out, "Directory for simulate_step.json and simulation.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  if (optimize->count("--seed") > 0) opt.seed = seed;
  configure_logging();

  if (*optimize) return run_optimize(opt);
  if (*verify) return run_verify(opt);
  return run_simulate(opt);
}
