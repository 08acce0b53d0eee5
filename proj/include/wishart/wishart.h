/* SPDX-License-Identifier: Apache-2.0 */
#ifndef WISHART_WISHART_H
#define WISHART_WISHART_H

/*
 * C interface to the heteroskedastic Wishart concentration library.
 *
 * Conventions:
 *   - Every fallible call returns wc_status; on failure wc_last_error()
 *     holds a message for the calling thread until its next failing call.
 *   - Objects are opaque handles released with the matching *_free.
 *   - Strings returned through char** are owned by the caller and released
 *     with wc_string_free.
 *   - Matrices are dense row-major arrays of double.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(WC_BUILDING_LIBRARY)
#define WC_API __attribute__((visibility("default")))
#else
#define WC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wc_status {
  WC_OK = 0,
  WC_ERR_INVALID = 1,   /* parameter or contract violation */
  WC_ERR_SIZE = 2,      /* enumeration or range guard exceeded */
  WC_ERR_NUMERICAL = 3, /* eigensolver or other numerical failure */
  WC_ERR_IO = 4,
  WC_ERR_INTERNAL = 5
} wc_status;

typedef struct wc_profile wc_profile;
typedef struct wc_model wc_model;
typedef struct wc_bound_report wc_bound_report;
typedef struct wc_run_output wc_run_output;

typedef struct wc_summary {
  double sigma_C;
  double sigma_R;
  double sigma_star;
  double p1;
  double p2;
} wc_summary;

typedef struct wc_moment_tail {
  double moment_bound;
  double tail_threshold;
  double tail_prob;
} wc_moment_tail;

typedef struct wc_clustering_result {
  double upper_rate;
  double snr_threshold;
} wc_clustering_result;

typedef struct wc_oracle_result {
  double lhs;
  double rhs;
  int holds;
  uint64_t cycles_enumerated;
} wc_oracle_result;

typedef struct wc_estimate {
  double mean;
  double std_err;
  size_t n_reps;
  double q05;
  double q25;
  double q50;
  double q75;
  double q95;
} wc_estimate;

WC_API const char* wc_version(void);
WC_API const char* wc_last_error(void);
WC_API void wc_string_free(char* s);
/* Formula constant table printed by the command-line --version. */
WC_API wc_status wc_constants_table(char** out);

/* Profiles */
WC_API wc_status wc_profile_create(size_t p1, size_t p2, const double* sigma, wc_profile** out);
WC_API wc_status wc_profile_homoskedastic_rows(const double* sigmas, size_t p1, size_t p2, wc_profile** out);
WC_API wc_status wc_profile_homoskedastic_columns(const double* sigmas, size_t p2, size_t p1, wc_profile** out);
/* variant: "single_column", "block" or "block_diagonal". */
WC_API wc_status wc_profile_lower_bound(const char* variant, double sigma_star, double sigma_C, double sigma_R,
                                        size_t p1, size_t p2, wc_profile** out);
WC_API wc_status wc_profile_random_uniform(size_t p1, size_t p2, double low, double high, uint64_t seed,
                                           uint64_t index, wc_profile** out);
WC_API wc_status wc_profile_from_json(const char* json, wc_profile** out);
WC_API wc_status wc_profile_to_json(const wc_profile* profile, char** out);
WC_API wc_status wc_profile_dims(const wc_profile* profile, size_t* p1, size_t* p2);
WC_API wc_status wc_profile_copy_sigma(const wc_profile* profile, double* out, size_t len);
WC_API wc_status wc_profile_summarize(const wc_profile* profile, wc_summary* out);
WC_API void wc_profile_free(wc_profile* profile);

/* Noise models: {"model": "...", "params": {...}} */
WC_API wc_status wc_model_from_json(const char* json, wc_model** out);
WC_API wc_status wc_model_gaussian(wc_model** out);
WC_API wc_status wc_model_kappa(const wc_model* model, double* out, int* defined);
WC_API void wc_model_free(wc_model* model);

/* Sampling and spectral routines. `out` holds p1 * p2 (sample) or p * p values. */
WC_API wc_status wc_sample(const wc_profile* profile, const wc_model* model, uint64_t seed, uint64_t replicate,
                           double* out, size_t len);
WC_API wc_status wc_centered_gram(const double* z, const wc_profile* profile, const wc_model* model, double* out,
                                  size_t len);
WC_API wc_status wc_spectral_norm(const double* a, size_t p, double tol, double* out);
WC_API wc_status wc_trace_power(const double* a, size_t p, unsigned q, double* out);

/* Bounds */
WC_API wc_status wc_gaussian_upper_bound(const wc_summary* s, double eps1, double eps2, wc_bound_report** out);
WC_API wc_status wc_baseline_bounds(const wc_summary* s, wc_bound_report** symmetrization,
                                    wc_bound_report** matrix_sum);
WC_API wc_status wc_structured_rates(const wc_profile* profile, int columns, wc_bound_report** out);
WC_API wc_status wc_lower_bound_rate(const wc_summary* s, wc_bound_report** out);
WC_API wc_status wc_moment_and_tail(const wc_summary* s, double b, double x, double c, wc_moment_tail* out);
WC_API wc_status wc_clustering_rates(double mu_norm, double n, double sigma_star, double sigma_tilde,
                                     wc_clustering_result* out);
WC_API double wc_bound_report_value(const wc_bound_report* report);
WC_API wc_status wc_bound_report_to_json(const wc_bound_report* report, char** out);
WC_API void wc_bound_report_free(wc_bound_report* report);

/* Moment oracle */
WC_API wc_status wc_gaussian_moment(unsigned alpha, unsigned beta, double* out);
WC_API wc_status wc_heavy_tail_moment(unsigned alpha, unsigned beta, double b, double* out);
WC_API wc_status wc_exact_trace_moment(const wc_profile* profile, unsigned q, double* out);
WC_API wc_status wc_exact_deleted_diagonal_trace_moment(const wc_profile* profile, unsigned q, double* out);
WC_API wc_status wc_check_gaussian_comparison(const wc_profile* profile, unsigned q, wc_oracle_result* out);
WC_API wc_status wc_check_variance_contraction(const wc_profile* profile, unsigned q, wc_oracle_result* out);
WC_API wc_status wc_check_diagonal_deletion(const wc_profile* profile, unsigned q, wc_oracle_result* out);
WC_API wc_status wc_check_paired_moment(const unsigned x[5], wc_oracle_result* out);

/* Experiments */
WC_API wc_status wc_estimate_concentration(const wc_profile* profile, const wc_model* model, size_t n_reps,
                                           uint64_t seed, unsigned threads, wc_estimate* out);
WC_API wc_status wc_misclassification(const int* l, const int* l_hat, size_t n, double* out);

/* Config-driven runs: subcommand is one of profile, bound, simulate, oracle,
 * sweep, cluster; config_json follows the schema documented in the README. */
WC_API wc_status wc_run(const char* subcommand, const char* config_json, unsigned threads, wc_run_output** out);
WC_API const char* wc_run_output_summary(const wc_run_output* output);
WC_API const char* wc_run_output_csv(const wc_run_output* output);
WC_API void wc_run_output_free(wc_run_output* output);

#ifdef __cplusplus
}
#endif

#endif /* WISHART_WISHART_H */
