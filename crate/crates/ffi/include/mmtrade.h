#ifndef MMTRADE_H
#define MMTRADE_H

/* Generated by cbindgen at build time. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the nonzero values match the CLI exit codes where they overlap.
 */
typedef enum MmStatus {
  MM_STATUS_OK = 0,
  MM_STATUS_INVALID_PARAMETER = 1,
  MM_STATUS_SOLVER_FAILURE = 2,
  MM_STATUS_IO = 3,
  MM_STATUS_NULL_POINTER = 4,
  MM_STATUS_PANIC = 5,
} MmStatus;

typedef enum MmOrientation {
  MM_ORIENTATION_BUYER = 0,
  MM_ORIENTATION_SELLER = 1,
} MmOrientation;

/**
 * Opaque handle to a log-price distribution.
 */
typedef struct MmDistribution MmDistribution;

typedef struct MmFixedPoint {
  double a_max;
  double rho_at_max;
  double residual;
  size_t iterations;
  bool converged;
  /**
   * True when the solver finished on the bracketing fallback.
   */
  bool used_bisection;
} MmFixedPoint;

typedef struct MmInfoReport {
  double p;
  double a;
  double s;
  double i;
  double h;
  double mean;
  double s_rel_a;
  double s_rel_mean;
  double i_scaled_a;
  double i_scaled_mean;
  double h_rel_a;
  double h_rel_mean;
} MmInfoReport;

/**
 * Reference closed-form curves, evaluated verbatim.
 */
typedef struct MmFigureCurves {
  double s_rel_a;
  double s_rel_mean;
  double i_scaled_a;
  double i_scaled_mean;
  double h_rel_a;
  double h_rel_mean;
} MmFigureCurves;

typedef struct MmCycleStats {
  uint64_t n_cycles;
  double mean_tau;
  double mean_return;
  double intensity_estimate;
  double se_return;
  double se_tau;
  double se_intensity;
  double acceptance_fraction;
  double se_acceptance;
  double wald_residual;
  double se_wald;
  double wald_var_residual;
  double se_wald_var;
} MmCycleStats;

typedef struct MmEquilibrium {
  double price;
  double supply;
  double demand;
  /**
   * Set when the curves never meet within tolerance; the message is
   * available from `mm_last_error_message`.
   */
  bool has_warning;
} MmEquilibrium;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL if none.
 */
const char *mm_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mm_version(void);

/**
 * Gaussian law of the log-price.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum MmStatus mm_gaussian_new(double mean, double sigma, struct MmDistribution **out);

/**
 * Uniform law on `[lo, hi]`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum MmStatus mm_uniform_new(double lo, double hi, struct MmDistribution **out);

/**
 * Max-entropy subjective law with withdrawal price `a` and temperature `t`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum MmStatus mm_maxent_new(double a, double t, struct MmDistribution **out);

/**
 * Piecewise-uniform law from `n_edges` bin edges and `n_edges - 1` masses.
 *
 * # Safety
 * `edges` and `masses` must point to arrays of the stated lengths; `out`
 * must be valid for a pointer write.
 */
enum MmStatus mm_tabulated_new(const double *edges,
                               size_t n_edges,
                               const double *masses,
                               size_t n_masses,
                               struct MmDistribution **out);

/**
 * Piecewise-uniform law from a CSV file with header `edge,mass`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid for a
 * pointer write.
 */
enum MmStatus mm_tabulated_from_csv(const char *path, struct MmDistribution **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `dist` must come from one of the constructors and not be freed twice.
 */
void mm_distribution_free(struct MmDistribution *dist);

/**
 * # Safety
 * `dist` must be a live handle; `out` must be valid for writes.
 */
enum MmStatus mm_density(const struct MmDistribution *dist, double x, double *out);

/**
 * # Safety
 * `dist` must be a live handle; `out` must be valid for writes.
 */
enum MmStatus mm_cdf(const struct MmDistribution *dist, double x, double *out);

/**
 * Quantile at probability `u` in `[0, 1]`.
 *
 * # Safety
 * `dist` must be a live handle; `out` must be valid for writes.
 */
enum MmStatus mm_quantile(const struct MmDistribution *dist, double u, double *out);

/**
 * Cycle profit `ρ(a)`.
 *
 * # Safety
 * `dist` must be a live handle; `out` must be valid for writes.
 */
enum MmStatus mm_cycle_profit(const struct MmDistribution *dist,
                              double a,
                              double theta,
                              enum MmOrientation orientation,
                              double *out);

/**
 * Profit intensity `ρ(a)/θ`.
 *
 * # Safety
 * `dist` must be a live handle; `out` must be valid for writes.
 */
enum MmStatus mm_profit_intensity(const struct MmDistribution *dist,
                                  double a,
                                  double theta,
                                  enum MmOrientation orientation,
                                  double *out);

/**
 * Expected cycle length `E(τ)`.
 *
 * # Safety
 * `dist` must be a live handle; `out` must be valid for writes.
 */
enum MmStatus mm_expected_cycle_length(const struct MmDistribution *dist,
                                       double a,
                                       double theta,
                                       enum MmOrientation orientation,
                                       double *out);

/**
 * Probability that a quotation is not accepted.
 *
 * # Safety
 * `dist` must be a live handle; `out` must be valid for writes.
 */
enum MmStatus mm_non_transaction_prob(const struct MmDistribution *dist,
                                      double a,
                                      enum MmOrientation orientation,
                                      double *out);

/**
 * Solves `ρ(a) = a` for the optimal withdrawal price.
 *
 * # Safety
 * `dist` must be a live handle; `out` must be valid for writes.
 */
enum MmStatus mm_solve_fixed_point(const struct MmDistribution *dist,
                                   double theta,
                                   enum MmOrientation orientation,
                                   double tol,
                                   size_t max_iter,
                                   struct MmFixedPoint *out);

/**
 * The golden transaction probability `(√5 − 1)/2`.
 */
double mm_golden_optimum(void);

/**
 * The optimal transaction probability of the max-entropy seller at
 * withdrawal price `a`, found by root finding.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum MmStatus mm_golden_optimum_numeric(double a, double *out);

/**
 * Information measures (by quadrature) of the max-entropy law `(a, t)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum MmStatus mm_info_report(double a, double t, struct MmInfoReport *out);

/**
 * Reference curves at transaction probability `p` in `(0, 1)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum MmStatus mm_figure_curves(double p, struct MmFigureCurves *out);

/**
 * Seeded Monte Carlo run of `n_cycles` trading cycles. Results are
 * reproducible for a given `(seed, shards)` pair.
 *
 * # Safety
 * `dist` must be a live handle; `out` must be valid for writes.
 */
enum MmStatus mm_simulate(const struct MmDistribution *dist,
                          double a,
                          double theta,
                          enum MmOrientation orientation,
                          uint64_t n_cycles,
                          uint64_t seed,
                          size_t shards,
                          struct MmCycleStats *out);

/**
 * Logarithm of the cross ratio for buying with money `v` at log-price
 * `p_buy` and selling with money `w` at log-price `p_sell`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum MmStatus mm_log_cross_ratio(double v, double p_buy, double w, double p_sell, double *out);

/**
 * Price where supply meets demand. `demand` may be NULL to reuse `supply`.
 *
 * # Safety
 * `supply` must be a live handle, `demand` a live handle or NULL; `out`
 * must be valid for writes.
 */
enum MmStatus mm_equilibrium_price(const struct MmDistribution *supply,
                                   const struct MmDistribution *demand,
                                   struct MmEquilibrium *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MMTRADE_H */
