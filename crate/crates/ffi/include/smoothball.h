#ifndef SMOOTHBALL_H
#define SMOOTHBALL_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SbStatus {
  SB_STATUS_OK = 0,
  SB_STATUS_NULL_POINTER = 1,
  SB_STATUS_INVALID_ARGUMENT = 2,
  SB_STATUS_NUMERIC = 3,
  SB_STATUS_CAPACITY = 4,
  SB_STATUS_CERTIFICATE = 5,
  SB_STATUS_PROPERTY = 6,
  SB_STATUS_UNSUPPORTED = 7,
  SB_STATUS_IO = 8,
  SB_STATUS_PANIC = 9,
} SbStatus;

/**
 * Spectral measure.
 */
typedef struct SbModel SbModel;

/**
 * Path generator bound to a model and an equally spaced grid on `[0, t_max]`.
 */
typedef struct SbSampler SbSampler;

/**
 * One small-ball estimate.
 */
typedef struct SbEstimate {
  double r;
  uint64_t hits;
  uint64_t n_samples;
  double p_hat;
  double ci_low;
  double ci_high;
  /**
   * `+inf` without hits.
   */
  double phi_hat;
  double phi_lo;
  double phi_hi;
} SbEstimate;

/**
 * Minorant lower bound on `φ(r)`.
 */
typedef struct SbLowerBound {
  double r;
  double l_used;
  double sigma2;
  double phi_lower;
  bool valid;
} SbLowerBound;

/**
 * Certified properties of the product function `G`.
 */
typedef struct SbGCertificate {
  double c;
  double theta_g;
  double max_abs;
  double c_g;
  double decay_exponent;
  bool bounded_by_one;
  bool below_exp_growth;
} SbGCertificate;

/**
 * Rate fit `φ ≈ A|log r|^γ (log|log r|)^β`.
 */
typedef struct SbRateFit {
  double a;
  double gamma;
  double beta;
  double rss;
  uint64_t n_points;
  /**
   * No fit was made: too few points, too narrow a range, or collinear data.
   */
  bool refused;
} SbRateFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *sb_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sb_version(void);

/**
 * Creates a model. `kind` is one of `continuous`, `discrete`, `bandlimited`,
 * `log-power`, `truncated`, `band-minorant`, `dirichlet-minorant`; pass NaN for
 * unused parameters.
 *
 * # Safety
 * `kind` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SbStatus sb_model_new(const char *kind,
                           double nu,
                           double alpha,
                           double cutoff,
                           struct SbModel **out_model);

/**
 * # Safety
 * `model` must come from `sb_model_new` and not be used afterwards.
 */
void sb_model_free(struct SbModel *model);

/**
 * Covariance `R(t)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SbStatus sb_model_covariance(const struct SbModel *model, double t, double *out_value);

/**
 * Total mass `R(0)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SbStatus sb_model_total_mass(const struct SbModel *model, double *out_value);

/**
 * Creates a sampler. For the discrete family a nonnegative `truncation_k`
 * fixes the Fourier truncation; a negative value chooses it from the default
 * tail tolerance.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SbStatus sb_sampler_new(const struct SbModel *model,
                             double t_max,
                             size_t n_points,
                             int64_t truncation_k,
                             struct SbSampler **out_sampler);

/**
 * # Safety
 * `sampler` must come from `sb_sampler_new` and not be used afterwards.
 */
void sb_sampler_free(struct SbSampler *sampler);

/**
 * Number of grid points of the sampler.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SbStatus sb_sampler_len(const struct SbSampler *sampler, size_t *out_len);

/**
 * Writes path `index` of stream `seed` into `values[0..len]`; `len` must equal
 * the number of grid points.
 *
 * # Safety
 * `values` must hold `len` doubles.
 */
enum SbStatus sb_sampler_path(const struct SbSampler *sampler,
                              uint64_t seed,
                              uint64_t index,
                              double *values,
                              size_t len);

/**
 * Monte Carlo estimates of `P(‖X‖ ≤ r)` for each radius. `norm` is 0 for the
 * sup norm and 1 for the L2 norm.
 *
 * # Safety
 * `radii` and `out_estimates` must hold `n_radii` elements.
 */
enum SbStatus sb_smallball_estimate(const struct SbSampler *sampler,
                                    uint32_t norm,
                                    const double *radii,
                                    size_t n_radii,
                                    size_t n_samples,
                                    uint64_t seed,
                                    struct SbEstimate *out_estimates);

/**
 * Exact `P(‖X̃_ν‖_{L2} ≤ r)` for the periodic process truncated at `k`.
 *
 * # Safety
 * `out_p` must be valid.
 */
enum SbStatus sb_exact_l2(double nu, size_t k, double r, double *out_p);

/**
 * `log P(‖X̃_ν‖_{L2} ≤ r)`, accurate deep in the tail.
 *
 * # Safety
 * `out_log_p` must be valid.
 */
enum SbStatus sb_log_exact_l2(double nu, size_t k, double r, double *out_log_p);

/**
 * Best minorant bound. `discrete` selects the spectrum, `period_one` the
 * period-1 convention instead of the 2π one, `rigorous` the grid-count variant.
 *
 * # Safety
 * `out_bound` must be valid.
 */
enum SbStatus sb_tsirelson_bound_opt(double nu,
                                     bool discrete,
                                     double r,
                                     bool period_one,
                                     bool rigorous,
                                     struct SbLowerBound *out_bound);

/**
 * `ν/(π(ν+1)^{1+1/ν})`.
 *
 * # Safety
 * `out_value` must be valid.
 */
enum SbStatus sb_asymptotic_constant(double nu, double *out_value);

/**
 * Lower and upper bounds on the sup-norm entropy of the periodic RKHS ball
 * truncated at `k` frequencies.
 *
 * # Safety
 * Out-pointers must be valid.
 */
enum SbStatus sb_entropy_bracket(double nu,
                                 size_t k,
                                 double epsilon,
                                 double *out_lower,
                                 double *out_upper);

/**
 * # Safety
 * `out_cert` must be valid.
 */
enum SbStatus sb_g_certify(double gamma,
                           double t0,
                           double t_max,
                           double step,
                           struct SbGCertificate *out_cert);

/**
 * Fits `n` points; `beta` is fixed unless it is NaN.
 *
 * # Safety
 * `r` and `phi` must hold `n` doubles.
 */
enum SbStatus sb_fit(const double *r,
                     const double *phi,
                     size_t n,
                     double beta,
                     struct SbRateFit *out_fit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMOOTHBALL_H */
