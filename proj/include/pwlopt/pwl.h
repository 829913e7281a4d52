/* Copyright 2026 The pwlopt Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface of libpwlopt. Every function returning pwl_status reports
 * failures through the status code; pwl_last_error() then holds a message
 * for the calling thread. Handles are opaque and owned by the caller.
 */
#ifndef PWLOPT_PWL_H_
#define PWLOPT_PWL_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PWL_API __declspec(dllexport)
#else
#define PWL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pwl_status {
  PWL_OK = 0,
  PWL_ERR_INVALID_ARGUMENT = 1,
  PWL_ERR_OUT_OF_RANGE = 2,
  PWL_ERR_PARSE = 3,
  PWL_ERR_IO = 4,
  PWL_ERR_INTERNAL = 5
} pwl_status;

PWL_API const char* pwl_last_error(void);
PWL_API const char* pwl_status_name(pwl_status status);
PWL_API const char* pwl_version(void);
/* Frees strings returned through char** out-parameters. */
PWL_API void pwl_string_free(char* text);

/* Endpoint flags are 0/1. */
typedef struct pwl_interval {
  double lo;
  double hi;
  int lo_closed;
  int hi_closed;
} pwl_interval;

typedef enum pwl_regime { PWL_FULL_INFO = 0, PWL_SEMI_BANDIT = 1, PWL_BANDIT = 2 } pwl_regime;
typedef enum pwl_backend { PWL_BACKEND_TREE = 0, PWL_BACKEND_FLAT = 1 } pwl_backend;

/* ---- random numbers ---- */
typedef struct pwl_rng pwl_rng;
PWL_API pwl_status pwl_rng_create(uint64_t seed, pwl_rng** out);
PWL_API void pwl_rng_destroy(pwl_rng* rng);
PWL_API double pwl_rng_uniform(pwl_rng* rng);
PWL_API uint64_t pwl_mix_seed(uint64_t master, uint64_t index);

/* ---- piecewise-constant weights on [lo, hi] ---- */
typedef struct pwl_weights pwl_weights;
PWL_API pwl_status pwl_weights_create(double lo, double hi, pwl_backend backend, pwl_weights** out);
PWL_API void pwl_weights_destroy(pwl_weights* w);
PWL_API pwl_status pwl_weights_update(pwl_weights* w, double a, double b, double factor);
PWL_API pwl_status pwl_weights_integrate(const pwl_weights* w, double a, double b, double* out);
PWL_API pwl_status pwl_weights_total(const pwl_weights* w, double* out);
PWL_API pwl_status pwl_weights_draw(const pwl_weights* w, pwl_rng* rng, double* out);
PWL_API pwl_status pwl_weights_piece_count(const pwl_weights* w, size_t* out);

/* ---- continuous Exp3-SET ---- */
typedef struct pwl_exp3 pwl_exp3;
PWL_API pwl_status pwl_exp3_create(double lo, double hi, double lambda, pwl_backend backend,
                                   pwl_exp3** out);
PWL_API void pwl_exp3_destroy(pwl_exp3* learner);
PWL_API pwl_status pwl_exp3_sample(const pwl_exp3* learner, pwl_rng* rng, double* rho);
PWL_API pwl_status pwl_exp3_probability(const pwl_exp3* learner, pwl_interval set, double* out);
/* Semi-bandit round: loss in [0, 1] on `set`, which must contain `played`.
 * `estimate` (nullable) receives loss / p(set). */
PWL_API pwl_status pwl_exp3_observe(pwl_exp3* learner, double played, pwl_interval set,
                                    double loss, double* estimate);
PWL_API pwl_status pwl_exp3_cumulative_loss(const pwl_exp3* learner, double* out);
PWL_API pwl_status pwl_recommended_lambda(int dim, double radius, double r, long long horizon,
                                          long long cells, double* out);

/* ---- discretized Exp3-SET over an r-net ---- */
PWL_API pwl_status pwl_recommended_params(pwl_regime regime, int dim, double radius,
                                          double lipschitz, long long horizon, long long cells,
                                          double* r, double* lambda);
/* Net of [lo, hi]^dim. With points == NULL only *count is set. */
PWL_API pwl_status pwl_rnet(double lo, double hi, double r, int dim, double* points,
                            size_t capacity, size_t* count);

/* Arms first .. last - 1, all with the same loss in [0, 1]. */
typedef struct pwl_arm_range {
  size_t first;
  size_t last;
  double loss;
} pwl_arm_range;

typedef struct pwl_discrete_exp3 pwl_discrete_exp3;
PWL_API pwl_status pwl_discrete_exp3_create(size_t arms, double lambda, pwl_backend backend,
                                            pwl_discrete_exp3** out);
PWL_API void pwl_discrete_exp3_destroy(pwl_discrete_exp3* learner);
PWL_API pwl_status pwl_discrete_exp3_sample(const pwl_discrete_exp3* learner, pwl_rng* rng,
                                            size_t* arm);
PWL_API pwl_status pwl_discrete_exp3_probability(const pwl_discrete_exp3* learner, size_t arm,
                                                 double* out);
PWL_API pwl_status pwl_discrete_exp3_observe(pwl_discrete_exp3* learner,
                                             const pwl_arm_range* ranges, size_t count,
                                             double loss_at_play, double* observed_probability);

/* ---- knapsack ---- */
typedef struct pwl_knapsack pwl_knapsack;
PWL_API pwl_status pwl_knapsack_create(const double* values, const double* sizes, size_t n,
                                       double capacity, pwl_knapsack** out);
PWL_API pwl_status pwl_knapsack_load(const char* path, pwl_knapsack** out);
PWL_API void pwl_knapsack_destroy(pwl_knapsack* inst);
PWL_API size_t pwl_knapsack_size(const pwl_knapsack* inst);
PWL_API double pwl_knapsack_capacity(const pwl_knapsack* inst);

typedef struct pwl_knapsack_result {
  pwl_interval feedback;
  double total_value;
  double loss;        /* C - value */
  double scaled_loss; /* (C - value) / C */
  size_t selected_count;
} pwl_knapsack_result;

/* Greedy run on [0, range]. `selected` (nullable) receives up to `capacity`
 * item indices in packing order. */
PWL_API pwl_status pwl_knapsack_greedy(const pwl_knapsack* inst, double rho, double range,
                                       pwl_knapsack_result* out, size_t* selected,
                                       size_t capacity);
/* With out == NULL only *count is set. */
PWL_API pwl_status pwl_knapsack_critical_values(const pwl_knapsack* inst, double range,
                                                double* out, size_t capacity, size_t* count);
/* Feedback interval from output-only bisection at accuracy eps. */
PWL_API pwl_status pwl_knapsack_search_feedback(const pwl_knapsack* inst, double rho,
                                                double range, double eps, pwl_interval* out,
                                                size_t* evaluations);

/* ---- clustering ---- */
typedef struct pwl_distances pwl_distances;
PWL_API pwl_status pwl_distances_create(const double* entries, size_t n, double bound,
                                        pwl_distances** out);
/* bound <= 0 takes the largest entry. */
PWL_API pwl_status pwl_distances_load(const char* path, double bound, pwl_distances** out);
PWL_API void pwl_distances_destroy(pwl_distances* d);
PWL_API size_t pwl_distances_size(const pwl_distances* d);

typedef struct pwl_merge {
  size_t left;
  size_t right;
} pwl_merge;

/* rho-linkage on [0, 1]. `merges` must hold n - 1 entries; node n + k is
 * the k-th merge. */
PWL_API pwl_status pwl_linkage(const pwl_distances* d, double rho, pwl_merge* merges,
                               size_t capacity, pwl_interval* feedback);
/* Cells of the feedback system, left to right. With out == NULL only
 * *count is set. */
PWL_API pwl_status pwl_linkage_cells(const pwl_distances* d, pwl_interval* out,
                                     size_t capacity, size_t* count);
PWL_API pwl_status pwl_tree_cost(size_t leaves, const pwl_merge* merges, const int* labels,
                                 size_t k, double* out);
/* Labels file: one token per line, mapped to 0, 1, ... by first appearance. */
PWL_API pwl_status pwl_labels_load(const char* path, int* out, size_t capacity, size_t* count);

/* ---- output-only feedback for any piecewise-unique algorithm ---- */
/* Writes a key identifying the algorithm's output at rho; returns 0 on
 * success. Equal keys mean equal outputs. */
typedef int (*pwl_output_fn)(void* context, double rho, uint64_t* key);
PWL_API pwl_status pwl_search_feedback(pwl_output_fn fn, void* context, double rho, double eps,
                                       double lo, double hi, pwl_interval* out,
                                       size_t* evaluations);

/* ---- dispersion ---- */
/* Rounds are given as offsets into `locations`: round i owns
 * locations[offsets[i] .. offsets[i + 1]), sorted. offsets has rounds + 1 entries. */
PWL_API pwl_status pwl_worst_ball_count(const double* locations, const size_t* offsets,
                                        size_t rounds, double eps, size_t* out);
PWL_API pwl_status pwl_knapsack_bound(double horizon, double eps, double items, double kappa,
                                      double capacity, double additive_constant, double* out);
PWL_API pwl_status pwl_clustering_bound(double horizon, double eps, double points, double kappa,
                                        double bound_b, double bound_m, double additive_constant,
                                        double proof_constant, double* statement,
                                        double* proof);

typedef struct pwl_density_check {
  char name[32];
  double max_density;
  double bound;
  double allowed;
  int pass;
} pwl_density_check;

PWL_API pwl_status pwl_validate_density_transforms(double kappa, double bound_m, double bound_b,
                                                   size_t samples, uint64_t seed,
                                                   pwl_density_check* out, size_t capacity,
                                                   size_t* count);

/* ---- experiments ---- */
typedef struct pwl_config pwl_config;
PWL_API pwl_status pwl_config_create(pwl_config** out);
PWL_API pwl_status pwl_config_parse(const char* toml, const char* source, pwl_config** out);
PWL_API pwl_status pwl_config_load(const char* path, pwl_config** out);
PWL_API void pwl_config_destroy(pwl_config* config);
/* Dotted key as in the config file ("env", "T", "knapsack.n", ...). */
PWL_API pwl_status pwl_config_set(pwl_config* config, const char* key, const char* value);
PWL_API pwl_status pwl_config_validate(const pwl_config* config);

/* Regret CSV and, when trace != NULL, the per-round trace CSV. */
PWL_API pwl_status pwl_experiment_run(const pwl_config* config, char** csv, char** trace);
PWL_API pwl_status pwl_dispersion_run(const pwl_config* config, char** csv);

#ifdef __cplusplus
}
#endif

#endif /* PWLOPT_PWL_H_ */
