// SPDX-License-Identifier: Apache-2.0

#include "biped_gait/biped_gait.h"

#include "biped_gait/gait_app.hpp"

#include <cstring>
#include <new>
#include <optional>
#include <string>

struct bg_config {
  biped::RunConfig cfg;
};

struct bg_result {
  biped::RunConfig cfg;
  std::optional<biped::OptimizeOutcome> optimize;
  std::optional<biped::VerifyOutcome> verify;

  const biped::ConstraintReport& constraints() const {
    return optimize ? optimize->report.constraints : verify->constraints;
  }
  const biped::PolynomialGait& gait() const {
    return optimize ? optimize->report.gait : verify->gait;
  }
};

struct bg_gait {
  biped::PolynomialGait gait;
};

struct bg_simulation {
  biped::SimulationOutcome outcome;
};

struct bg_model {
  biped::RobotParams robot;
};

namespace {

thread_local std::string t_last_error;

bg_status fail(bg_status status, const std::string& message) {
  t_last_error = message;
  return status;
}

bg_status null_argument() { return fail(BG_INVALID_ARGUMENT, "null argument"); }

// Runs body and converts exceptions into status codes at the boundary.
template <typename Body>
bg_status guarded(Body&& body) {
  try {
    t_last_error.clear();
    return body();
  } catch (const biped::GaitError& e) {
    return fail(static_cast<bg_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(BG_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(BG_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(BG_INTERNAL_ERROR, "unknown error");
  }
}

bg_status copy_out(const std::string& text, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (!buf) return BG_OK;
  if (cap < text.size() + 1) return fail(BG_OUT_OF_RANGE, "buffer too small");
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return BG_OK;
}

biped::Vec5 vec5(const double* v) { return Eigen::Map<const biped::Vec5>(v); }

void store(const biped::Vec5& v, double* out) {
  Eigen::Map<biped::Vec5> dst(out);
  dst = v;
}

}  // namespace

extern "C" {

const char* bg_last_error(void) { return t_last_error.c_str(); }

const char* bg_status_string(bg_status status) {
  if (status == BG_INTERNAL_ERROR) return "INTERNAL_ERROR";
  if (status < BG_OK || status > BG_IO_ERROR) return "UNKNOWN";
  return biped::to_string(static_cast<biped::ErrorCode>(status));
}

void bg_set_log_level(bg_log_level level) {
  biped::set_log_level(static_cast<biped::LogLevel>(level));
}

bg_status bg_config_default(bg_config** out) {
  if (!out) return null_argument();
  return guarded([&] {
    *out = new bg_config{};
    return BG_OK;
  });
}

bg_status bg_config_load(const char* path, bg_config** out) {
  if (!path || !out) return null_argument();
  return guarded([&] {
    *out = new bg_config{biped::load_run_config(path)};
    return BG_OK;
  });
}

bg_status bg_config_parse(const char* json_text, bg_config** out) {
  if (!json_text || !out) return null_argument();
  return guarded([&] {
    *out = new bg_config{biped::parse_run_config(json_text)};
    return BG_OK;
  });
}

void bg_config_free(bg_config* cfg) { delete cfg; }

bg_status bg_config_set_seed(bg_config* cfg, uint64_t seed) {
  if (!cfg) return null_argument();
  cfg->cfg.seed = seed;
  cfg->cfg.ga.seed = seed;
  return BG_OK;
}

bg_status bg_config_seed(const bg_config* cfg, uint64_t* seed) {
  if (!cfg || !seed) return null_argument();
  *seed = cfg->cfg.seed;
  return BG_OK;
}

bg_status bg_config_set_output_dir(bg_config* cfg, const char* dir) {
  if (!cfg || !dir) return null_argument();
  if (!*dir) return fail(BG_INVALID_ARGUMENT, "output directory is empty");
  return guarded([&] {
    cfg->cfg.output_dir = dir;
    return BG_OK;
  });
}

bg_status bg_config_output_dir(const bg_config* cfg, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return null_argument();
  return guarded([&] { return copy_out(cfg->cfg.output_dir, buf, cap, needed); });
}

bg_status bg_config_to_json(const bg_config* cfg, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return null_argument();
  return guarded([&] { return copy_out(biped::run_config_to_json(cfg->cfg), buf, cap, needed); });
}

bg_status bg_optimize(const bg_config* cfg, int write_artifacts, bg_result** out) {
  if (!cfg || !out) return null_argument();
  return guarded([&] {
    auto result = std::make_unique<bg_result>();
    result->cfg = cfg->cfg;
    result->optimize = biped::run_optimize(cfg->cfg);
    if (write_artifacts) {
      biped::write_optimize_artifacts(cfg->cfg.output_dir, *result->optimize, cfg->cfg);
    }
    *out = result.release();
    return BG_OK;
  });
}

bg_status bg_verify(const bg_config* cfg, const bg_gait* gait, bg_result** out) {
  if (!cfg || !gait || !out) return null_argument();
  return guarded([&] {
    auto result = std::make_unique<bg_result>();
    result->cfg = cfg->cfg;
    result->verify = biped::run_verify(gait->gait, cfg->cfg);
    *out = result.release();
    return BG_OK;
  });
}

void bg_result_free(bg_result* result) { delete result; }

bg_status bg_result_feasible(const bg_result* result, int* feasible) {
  if (!result || !feasible) return null_argument();
  *feasible = result->constraints().feasible ? 1 : 0;
  return BG_OK;
}

bg_status bg_result_objective(const bg_result* result, double* objective) {
  if (!result || !objective) return null_argument();
  *objective = result->constraints().objective;
  return BG_OK;
}

bg_status bg_result_max_violation(const bg_result* result, double* value) {
  if (!result || !value) return null_argument();
  *value = result->constraints().max_violation();
  return BG_OK;
}

bg_status bg_result_violation(const bg_result* result, int constraint, double* value) {
  if (!result || !value) return null_argument();
  if (constraint < 0 || constraint >= BG_CONSTRAINT_COUNT) {
    return fail(BG_OUT_OF_RANGE, "constraint index out of range");
  }
  *value = result->constraints().violation[static_cast<std::size_t>(constraint)];
  return BG_OK;
}

bg_status bg_result_gait(const bg_result* result, bg_gait** out) {
  if (!result || !out) return null_argument();
  return guarded([&] {
    *out = new bg_gait{result->gait()};
    return BG_OK;
  });
}

bg_status bg_result_ga_evaluations(const bg_result* result, int* evaluations) {
  if (!result || !evaluations) return null_argument();
  *evaluations = result->optimize ? result->optimize->report.ga_evaluations : 0;
  return BG_OK;
}

bg_status bg_result_refine_iterations(const bg_result* result, int* iterations) {
  if (!result || !iterations) return null_argument();
  *iterations = result->optimize ? result->optimize->report.refine_iterations : 0;
  return BG_OK;
}

bg_status bg_result_to_json(const bg_result* result, char* buf, size_t cap, size_t* needed) {
  if (!result) return null_argument();
  return guarded([&] {
    const std::string text = result->optimize ? biped::report_to_json(*result->optimize, result->cfg)
                                              : biped::verify_to_json(*result->verify);
    return copy_out(text, buf, cap, needed);
  });
}

bg_status bg_result_write(const bg_result* result, const char* dir) {
  if (!result || !dir) return null_argument();
  return guarded([&] {
    if (result->optimize) {
      biped::write_optimize_artifacts(dir, *result->optimize, result->cfg);
    } else {
      std::filesystem::create_directories(dir);
      biped::write_file_atomic(std::filesystem::path(dir) / "verify.json",
                               biped::verify_to_json(*result->verify));
    }
    return BG_OK;
  });
}

bg_status bg_gait_load(const char* path, bg_gait** out) {
  if (!path || !out) return null_argument();
  return guarded([&] {
    *out = new bg_gait{biped::load_gait(path)};
    return BG_OK;
  });
}

bg_status bg_gait_create(const double coefficients[25], double duration, bg_gait** out) {
  if (!coefficients || !out) return null_argument();
  return guarded([&] {
    biped::PolynomialGait g;
    if (!(duration > 0.0) || !std::isfinite(duration)) {
      throw biped::GaitError(biped::ErrorCode::kInvalidArgument, "gait duration must be positive");
    }
    g.duration = duration;
    for (int k = 0; k < biped::kJoints; ++k) {
      for (int i = 0; i < biped::kCoeffsPerJoint; ++i) {
        const double v = coefficients[k * biped::kCoeffsPerJoint + i];
        if (!std::isfinite(v)) {
          throw biped::GaitError(biped::ErrorCode::kInvalidArgument, "coefficients must be finite");
        }
        g.alpha(k, i) = v;
      }
    }
    *out = new bg_gait{g};
    return BG_OK;
  });
}

void bg_gait_free(bg_gait* gait) { delete gait; }

bg_status bg_gait_coefficients(const bg_gait* gait, double coefficients[25], double* duration) {
  if (!gait || !coefficients || !duration) return null_argument();
  for (int k = 0; k < biped::kJoints; ++k) {
    for (int i = 0; i < biped::kCoeffsPerJoint; ++i) {
      coefficients[k * biped::kCoeffsPerJoint + i] = gait->gait.alpha(k, i);
    }
  }
  *duration = gait->gait.duration;
  return BG_OK;
}

bg_status bg_gait_eval(const bg_gait* gait, double t, double q[5], double qdot[5], double qddot[5]) {
  if (!gait) return null_argument();
  return guarded([&] {
    const biped::GaitSample s = biped::eval_gait(gait->gait, t);
    if (q) store(s.q, q);
    if (qdot) store(s.qdot, qdot);
    if (qddot) store(s.qddot, qddot);
    return BG_OK;
  });
}

bg_status bg_simulate_step(const bg_config* cfg, const bg_gait* gait, bg_simulation** out) {
  if (!cfg || !gait || !out) return null_argument();
  return guarded([&] {
    *out = new bg_simulation{biped::simulate_step(gait->gait, cfg->cfg.robot)};
    return BG_OK;
  });
}

void bg_simulation_free(bg_simulation* sim) { delete sim; }

bg_status bg_simulation_impact_time(const bg_simulation* sim, double* t) {
  if (!sim || !t) return null_argument();
  *t = sim->outcome.impact_time;
  return BG_OK;
}

bg_status bg_simulation_post_impact(const bg_simulation* sim, double q[5], double qdot[5]) {
  if (!sim || !q || !qdot) return null_argument();
  store(sim->outcome.post_impact.q, q);
  store(sim->outcome.post_impact.qdot, qdot);
  return BG_OK;
}

bg_status bg_simulation_max_deviation(const bg_simulation* sim, double* deviation) {
  if (!sim || !deviation) return null_argument();
  *deviation = sim->outcome.max_deviation;
  return BG_OK;
}

bg_status bg_simulation_to_json(const bg_simulation* sim, char* buf, size_t cap, size_t* needed) {
  if (!sim) return null_argument();
  return guarded([&] { return copy_out(biped::simulation_to_json(sim->outcome), buf, cap, needed); });
}

bg_status bg_simulation_write(const bg_simulation* sim, const char* dir) {
  if (!sim || !dir) return null_argument();
  return guarded([&] {
    biped::write_simulation_artifacts(dir, sim->outcome);
    return BG_OK;
  });
}

bg_status bg_model_create(const bg_config* cfg, bg_model** out) {
  if (!out) return null_argument();
  return guarded([&] {
    biped::RobotParams robot = cfg ? cfg->cfg.robot : biped::RobotParams::rabbit();
    robot.validate();
    *out = new bg_model{robot};
    return BG_OK;
  });
}

void bg_model_free(bg_model* model) { delete model; }

bg_status bg_model_mass_matrix(const bg_model* model, const double q[5], double m[25]) {
  if (!model || !q || !m) return null_argument();
  return guarded([&] {
    using RowMajor = Eigen::Matrix<double, 5, 5, Eigen::RowMajor>;
    Eigen::Map<RowMajor> dst(m);
    dst = biped::mass_matrix(vec5(q), model->robot);
    return BG_OK;
  });
}

bg_status bg_model_bias(const bg_model* model, const double q[5], const double qdot[5],
                        double coriolis[25], double gravity[5]) {
  if (!model || !q || !qdot) return null_argument();
  return guarded([&] {
    using RowMajor = Eigen::Matrix<double, 5, 5, Eigen::RowMajor>;
    const biped::BiasTerms b = biped::bias_and_gravity(vec5(q), vec5(qdot), model->robot);
    if (coriolis) {
      Eigen::Map<RowMajor> dst(coriolis);
      dst = b.coriolis;
    }
    if (gravity) store(b.gravity, gravity);
    return BG_OK;
  });
}

bg_status bg_model_swing_foot(const bg_model* model, const double q[5], double position[2]) {
  if (!model || !q || !position) return null_argument();
  return guarded([&] {
    const biped::Vec2 p = biped::forward_kinematics(vec5(q), model->robot).swing_foot;
    position[0] = p.x();
    position[1] = p.y();
    return BG_OK;
  });
}

bg_status bg_model_impact(const bg_model* model, const double q[5], const double qdot_minus[5],
                          double qdot_plus[5], double impulse[2]) {
  if (!model || !q || !qdot_minus || !qdot_plus) return null_argument();
  return guarded([&] {
    const biped::ImpactOutcome hit = biped::impact_velocity_map(vec5(q), vec5(qdot_minus), model->robot);
    store(hit.qdot_plus, qdot_plus);
    if (impulse) {
      impulse[0] = hit.impulse.x();
      impulse[1] = hit.impulse.y();
    }
    return BG_OK;
  });
}

bg_status bg_model_relabel(const double q[5], double out[5]) {
  if (!q || !out) return null_argument();
  return guarded([&] {
    store(biped::RelabelMaps::standard().relabel * vec5(q), out);
    return BG_OK;
  });
}

}  // extern "C"
