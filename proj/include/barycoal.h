/* Copyright 2026 The barycoal Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to barycoal. Objects are opaque handles released with the
 * matching _free function. Every fallible call returns a barycoal_status;
 * on failure barycoal_last_error() describes it until the next call on the
 * same thread. Strings returned through out-parameters are owned by the
 * caller and released with barycoal_string_free.
 */

#ifndef BARYCOAL_H_
#define BARYCOAL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(BARYCOAL_BUILDING_LIBRARY)
#define BARYCOAL_API __attribute__((visibility("default")))
#else
#define BARYCOAL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum barycoal_status {
  BARYCOAL_OK = 0,
  BARYCOAL_ERR_INVALID_ARGUMENT = 1,
  BARYCOAL_ERR_CONFIG = 2,
  BARYCOAL_ERR_STAGE = 3,
  BARYCOAL_ERR_INFEASIBLE = 4,
  BARYCOAL_ERR_PARSE = 5,
  BARYCOAL_ERR_IO = 6,
  BARYCOAL_ERR_INTERNAL = 7
} barycoal_status;

typedef enum barycoal_metric { BARYCOAL_METRIC_L1 = 0, BARYCOAL_METRIC_L2 = 1 } barycoal_metric;

typedef struct barycoal_measure barycoal_measure;
typedef struct barycoal_experiment barycoal_experiment;

typedef struct barycoal_evaluation {
  double w1_to_target;
  double w1_to_old;
  double frechet_score;
} barycoal_evaluation;

BARYCOAL_API const char* barycoal_version(void);
BARYCOAL_API const char* barycoal_status_name(barycoal_status status);
BARYCOAL_API const char* barycoal_last_error(void);
/* Name of the stage behind the last BARYCOAL_ERR_STAGE, or "". */
BARYCOAL_API const char* barycoal_last_error_stage(void);
BARYCOAL_API void barycoal_string_free(char* s);

/* ---- measures ---- */

/* points: n x dim row-major. weights may be NULL for uniform mass. */
BARYCOAL_API barycoal_status barycoal_measure_create(const double* points, size_t n, size_t dim,
                                                     const double* weights, barycoal_measure** out);
BARYCOAL_API barycoal_status barycoal_measure_read(const char* path, barycoal_measure** out);
BARYCOAL_API barycoal_status barycoal_measure_write(const barycoal_measure* m, const char* path);
BARYCOAL_API size_t barycoal_measure_size(const barycoal_measure* m);
BARYCOAL_API size_t barycoal_measure_dim(const barycoal_measure* m);
/* Copies size*dim coordinates and size weights; either buffer may be NULL. */
BARYCOAL_API barycoal_status barycoal_measure_copy(const barycoal_measure* m, double* points, double* weights);
BARYCOAL_API void barycoal_measure_free(barycoal_measure* m);

BARYCOAL_API barycoal_status barycoal_w1_distance(const barycoal_measure* a, const barycoal_measure* b,
                                                  barycoal_metric metric, double* out);

/* Solves the fixed-support barycenter problem in problem_path. The result
 * JSON goes to result_path when it is not NULL. */
BARYCOAL_API barycoal_status barycoal_oracle_run(const char* problem_path, const char* result_path,
                                                 double* objective);

/* ---- experiments ---- */

/* Loads a JSON config. BARYCOAL_SEED, when set, overrides its seed. */
BARYCOAL_API barycoal_status barycoal_experiment_load(const char* config_path, barycoal_experiment** out);
BARYCOAL_API barycoal_status barycoal_experiment_parse(const char* json_text, barycoal_experiment** out);
BARYCOAL_API barycoal_status barycoal_experiment_set_seed(barycoal_experiment* e, uint64_t seed);
BARYCOAL_API barycoal_status barycoal_experiment_set_output_dir(barycoal_experiment* e, const char* dir);
BARYCOAL_API uint64_t barycoal_experiment_seed(const barycoal_experiment* e);
BARYCOAL_API int barycoal_experiment_nodes(const barycoal_experiment* e);
/* Canonical JSON of the effective config. */
BARYCOAL_API barycoal_status barycoal_experiment_config_json(const barycoal_experiment* e, char** out);
BARYCOAL_API void barycoal_experiment_free(barycoal_experiment* e);

/* Stages read and write files under the experiment's output directory.
 * Metric rows for a single stage go to metrics_<stage>.csv. */
BARYCOAL_API barycoal_status barycoal_run_synth(const barycoal_experiment* e);
/* node < 0 pretrains every node. */
BARYCOAL_API barycoal_status barycoal_run_pretrain(const barycoal_experiment* e, int node);
BARYCOAL_API barycoal_status barycoal_run_coalesce(const barycoal_experiment* e);
BARYCOAL_API barycoal_status barycoal_run_adapt(const barycoal_experiment* e, int ternary);
/* name: "edge-only", "transfer" or "ensemble". */
BARYCOAL_API barycoal_status barycoal_run_baseline(const barycoal_experiment* e, const char* name);
/* The full pipeline; the manifest path is returned when out is not NULL. */
BARYCOAL_API barycoal_status barycoal_run_pipeline(const barycoal_experiment* e, char** manifest_path);

/* Scores a generator from a checkpoint file (network defaults to
 * "generator" when NULL) against the experiment's reference data. */
BARYCOAL_API barycoal_status barycoal_evaluate_checkpoint(const barycoal_experiment* e, const char* checkpoint_path,
                                                          const char* network, barycoal_evaluation* out);

#ifdef __cplusplus
}
#endif

#endif /* BARYCOAL_H_ */
