/* SPDX-License-Identifier: Apache-2.0 */

#ifndef BIPED_GAIT_H
#define BIPED_GAIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BG_API __declspec(dllexport)
#else
#define BG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bg_status {
  BG_OK = 0,
  BG_INVALID_ARGUMENT = 1,
  BG_UNREACHABLE = 2,
  BG_SINGULAR = 3,
  BG_OUT_OF_RANGE = 4,
  BG_RANK_DEFICIENT = 5,
  BG_NO_PROGRESS = 6,
  BG_INFEASIBLE = 7,
  BG_NO_IMPACT = 8,
  BG_PARSE_ERROR = 9,
  BG_IO_ERROR = 10,
  BG_INTERNAL_ERROR = 99
} bg_status;

typedef enum bg_log_level { BG_LOG_QUIET = 0, BG_LOG_INFO = 1, BG_LOG_DEBUG = 2 } bg_log_level;

/* Constraint indices for bg_result_violation. */
enum {
  BG_CONSTRAINT_BOUNDARY = 0,
  BG_CONSTRAINT_KNEE,
  BG_CONSTRAINT_CLEARANCE,
  BG_CONSTRAINT_TORQUE,
  BG_CONSTRAINT_RATE,
  BG_CONSTRAINT_FRICTION,
  BG_CONSTRAINT_NORMAL_FORCE,
  BG_CONSTRAINT_ZERO_DYNAMICS,
  BG_CONSTRAINT_IMPACT_INVARIANCE,
  BG_CONSTRAINT_COUNT
};

typedef struct bg_config bg_config;         /* run configuration */
typedef struct bg_result bg_result;         /* optimize or verify outcome */
typedef struct bg_gait bg_gait;             /* polynomial gait */
typedef struct bg_simulation bg_simulation; /* simulate-step outcome */
typedef struct bg_model bg_model;           /* robot dynamics */

/* Message of the last failure on the calling thread; never NULL. */
BG_API const char* bg_last_error(void);
BG_API const char* bg_status_string(bg_status status);
BG_API void bg_set_log_level(bg_log_level level);

/* Configuration. */
BG_API bg_status bg_config_default(bg_config** out);
BG_API bg_status bg_config_load(const char* path, bg_config** out);
BG_API bg_status bg_config_parse(const char* json_text, bg_config** out);
BG_API void bg_config_free(bg_config* cfg);
BG_API bg_status bg_config_set_seed(bg_config* cfg, uint64_t seed);
BG_API bg_status bg_config_seed(const bg_config* cfg, uint64_t* seed);
BG_API bg_status bg_config_set_output_dir(bg_config* cfg, const char* dir);
/* Copies the NUL-terminated directory into buf when it fits; *needed gets the
 * full size including the terminator. */
BG_API bg_status bg_config_output_dir(const bg_config* cfg, char* buf, size_t cap, size_t* needed);
BG_API bg_status bg_config_to_json(const bg_config* cfg, char* buf, size_t cap, size_t* needed);

/* Optimization: runs the full pipeline. When write_artifacts is nonzero the
 * report and series files are written into the configured output directory. */
BG_API bg_status bg_optimize(const bg_config* cfg, int write_artifacts, bg_result** out);
/* Constraint evaluation of a given gait. */
BG_API bg_status bg_verify(const bg_config* cfg, const bg_gait* gait, bg_result** out);
BG_API void bg_result_free(bg_result* result);
BG_API bg_status bg_result_feasible(const bg_result* result, int* feasible);
BG_API bg_status bg_result_objective(const bg_result* result, double* objective);
BG_API bg_status bg_result_max_violation(const bg_result* result, double* value);
BG_API bg_status bg_result_violation(const bg_result* result, int constraint, double* value);
BG_API bg_status bg_result_gait(const bg_result* result, bg_gait** out);
BG_API bg_status bg_result_ga_evaluations(const bg_result* result, int* evaluations);
BG_API bg_status bg_result_refine_iterations(const bg_result* result, int* iterations);
/* Report document (optimize) or constraint report (verify) as JSON. */
BG_API bg_status bg_result_to_json(const bg_result* result, char* buf, size_t cap, size_t* needed);
BG_API bg_status bg_result_write(const bg_result* result, const char* dir);

/* Gaits: 25 coefficients, joint-major in ascending powers, plus duration. */
BG_API bg_status bg_gait_load(const char* path, bg_gait** out);
BG_API bg_status bg_gait_create(const double coefficients[25], double duration, bg_gait** out);
BG_API void bg_gait_free(bg_gait* gait);
BG_API bg_status bg_gait_coefficients(const bg_gait* gait, double coefficients[25], double* duration);
/* Joint angles, rates and accelerations at time t. */
BG_API bg_status bg_gait_eval(const bg_gait* gait, double t, double q[5], double qdot[5], double qddot[5]);

/* Single step under feed-forward torques, through touchdown and relabel. */
BG_API bg_status bg_simulate_step(const bg_config* cfg, const bg_gait* gait, bg_simulation** out);
BG_API void bg_simulation_free(bg_simulation* sim);
BG_API bg_status bg_simulation_impact_time(const bg_simulation* sim, double* t);
BG_API bg_status bg_simulation_post_impact(const bg_simulation* sim, double q[5], double qdot[5]);
BG_API bg_status bg_simulation_max_deviation(const bg_simulation* sim, double* deviation);
BG_API bg_status bg_simulation_to_json(const bg_simulation* sim, char* buf, size_t cap, size_t* needed);
BG_API bg_status bg_simulation_write(const bg_simulation* sim, const char* dir);

/* Dynamics of the configured robot. Matrices are row-major. */
BG_API bg_status bg_model_create(const bg_config* cfg, bg_model** out);
BG_API void bg_model_free(bg_model* model);
BG_API bg_status bg_model_mass_matrix(const bg_model* model, const double q[5], double m[25]);
BG_API bg_status bg_model_bias(const bg_model* model, const double q[5], const double qdot[5],
                               double coriolis[25], double gravity[5]);
BG_API bg_status bg_model_swing_foot(const bg_model* model, const double q[5], double position[2]);
BG_API bg_status bg_model_impact(const bg_model* model, const double q[5], const double qdot_minus[5],
                                 double qdot_plus[5], double impulse[2]);
BG_API bg_status bg_model_relabel(const double q[5], double out[5]);

#ifdef __cplusplus
}
#endif

#endif /* BIPED_GAIT_H */
