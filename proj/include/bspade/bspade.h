/*
 * bspade C API: bi-photon spatial-mode demultiplexing (SPADE) estimation of
 * a transverse separation.
 *
 * Coordinates are adimensional (x_o = sqrt(2) x / sigma_s). Separations are
 * given as the per-arm shift d; the total separation is delta = 2d and all
 * Fisher information / CRLB values refer to delta.
 *
 * Every function returns a bspade_status. On failure the thread-local message
 * returned by bspade_last_error() describes the problem. Handles are opaque
 * and owned by the caller; release them with the matching _destroy call.
 */
#ifndef BSPADE_H
#define BSPADE_H

#include <stddef.h>
#include <stdint.h>

#if defined(BSPADE_BUILDING_LIBRARY)
#define BSPADE_API __attribute__((visibility("default")))
#else
#define BSPADE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bspade_status {
  BSPADE_OK = 0,
  BSPADE_ERR_INVALID_ARGUMENT = 1,
  BSPADE_ERR_DATA = 2,
  BSPADE_ERR_NUMERICAL = 3,
  BSPADE_ERR_INTERNAL = 4
} bspade_status;

typedef enum bspade_method {
  BSPADE_METHOD_SPADE = 0,
  BSPADE_METHOD_DIRECT_GAUSSIAN = 1,
  BSPADE_METHOD_DIRECT_SPDC = 2
} bspade_method;

typedef struct bspade_model bspade_model;
typedef struct bspade_calibration bspade_calibration;

typedef struct bspade_outcome {
  int k_signal;
  int l_signal;
  int k_idler;
  int l_idler;
} bspade_outcome;

typedef struct bspade_search {
  double lo;
  double hi;
  int grid_points;
  double tolerance;
} bspade_search;

typedef struct bspade_estimate {
  double d_hat;
  double delta_hat;
  double log_likelihood;
  double crlb_variance; /* on delta */
  int iterations;
  int converged;
  int bound_hit;
  int flat;
} bspade_estimate;

typedef struct bspade_mc_config {
  double gamma;
  int64_t photons;
  int trials;
  uint64_t seed;
  int max_k;
  int max_l;
  int pixels;
  double pixel_lo;
  double pixel_hi;
  bspade_search search;
  unsigned threads; /* 0: hardware concurrency */
} bspade_mc_config;

typedef struct bspade_mc_result {
  double mean;      /* of d_hat */
  double std_error; /* sample standard deviation of d_hat */
  double boundary_fraction;
  double flat_fraction;
  int trials;
} bspade_mc_result;

BSPADE_API const char* bspade_version(void);
BSPADE_API const char* bspade_last_error(void);
BSPADE_API const char* bspade_method_name(bspade_method method);

/* Source */
BSPADE_API bspade_status bspade_gamma_from_physical(double pump_waist_m, double crystal_length_m,
                                                    double pump_wavelength_m, double* gamma);
BSPADE_API bspade_status bspade_schmidt_number(double gamma, double* k);
BSPADE_API bspade_status bspade_schmidt_coeff(int m, int n, double gamma, double* c);
BSPADE_API bspade_status bspade_adimensional_shift(double physical_shift_m, double schmidt_waist_m, double* d);

/* Fisher information and bounds */
BSPADE_API bspade_status bspade_fi_total_1d(double gamma, double* fi);
BSPADE_API bspade_status bspade_fi_total_2d(double gamma, double* total, double* up, double* down);
BSPADE_API bspade_status bspade_crlb(double schmidt_number, double n_photons, double* variance);

/* Coincidence model over the square space k <= max_k, l <= max_l. */
BSPADE_API bspade_status bspade_model_create(double gamma, int max_k, int max_l, int renormalize,
                                             bspade_model** model);
BSPADE_API void bspade_model_destroy(bspade_model* model);
BSPADE_API size_t bspade_model_outcomes(const bspade_model* model);
BSPADE_API bspade_status bspade_model_outcome(const bspade_model* model, size_t index, bspade_outcome* outcome);
BSPADE_API bspade_status bspade_model_index_of(const bspade_model* model, const bspade_outcome* outcome,
                                               size_t* index);
BSPADE_API bspade_status bspade_model_probabilities(const bspade_model* model, double d, double* out, size_t len);
/* Probabilities after the calibration map (alpha P + beta, floored, renormalized). */
BSPADE_API bspade_status bspade_model_calibrated_probabilities(const bspade_model* model,
                                                               const bspade_calibration* calibration, double d,
                                                               double* out, size_t len);
BSPADE_API bspade_status bspade_model_fisher(const bspade_model* model, double d, double* fi);

/* Calibration: counts is row-major, n_datasets rows of bspade_model_outcomes
 * entries, with separations[i] the known d of row i. */
BSPADE_API bspade_status bspade_calibration_fit(const bspade_model* model, const double* separations,
                                                const int64_t* counts, size_t n_datasets,
                                                bspade_calibration** calibration, size_t* n_rank_deficient);
BSPADE_API bspade_status bspade_calibration_create(const double* alpha, const double* beta, size_t n,
                                                   bspade_calibration** calibration);
BSPADE_API void bspade_calibration_destroy(bspade_calibration* calibration);
BSPADE_API size_t bspade_calibration_size(const bspade_calibration* calibration);
BSPADE_API bspade_status bspade_calibration_get(const bspade_calibration* calibration, size_t index, double* alpha,
                                                double* beta);

/* Estimation; calibration may be NULL. */
BSPADE_API void bspade_search_default(bspade_search* search);
BSPADE_API bspade_status bspade_estimate_separation(const bspade_model* model, const bspade_calibration* calibration,
                                                    const int64_t* counts, size_t len, const bspade_search* search,
                                                    bspade_estimate* result);

/* Sampling and Monte Carlo */
BSPADE_API bspade_status bspade_sample_counts(const double* probs, size_t len, int64_t n, uint64_t seed,
                                              int64_t* out);
BSPADE_API uint64_t bspade_derive_seed(uint64_t master, uint64_t index);
BSPADE_API void bspade_mc_config_default(bspade_mc_config* config);
BSPADE_API bspade_status bspade_mc_standard_error(bspade_method method, const bspade_mc_config* config, double d,
                                                  bspade_mc_result* result);

#ifdef __cplusplus
}
#endif

#endif /* BSPADE_H */
