#ifndef DIHEDRAL_H
#define DIHEDRAL_H

/* Generated by cbindgen from crates/dihedral-ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  DH_STATUS_OK = 0,
  DH_STATUS_NULL_POINTER = 1,
  DH_STATUS_INVALID_ARGUMENT = 2,
  DH_STATUS_PARSE = 3,
  DH_STATUS_INVALID_MODEL = 4,
  DH_STATUS_DIMENSION_MISMATCH = 5,
  /**
   * A numerical precondition failed (singular covariance, eigenvalue
   * tie, condition (a)/(b)).
   */
  DH_STATUS_NUMERICAL = 6,
  DH_STATUS_BUFFER_TOO_SMALL = 7,
  DH_STATUS_PANIC = 8,
} DhStatus;

/**
 * Step distribution on G_d with f64 weights.
 */
typedef struct DhDistribution DhDistribution;

/**
 * Validated finite-state Markov model.
 */
typedef struct DhModel DhModel;

/**
 * Library version as a static NUL-terminated string.
 */
const char *dh_version(void);

/**
 * Copies the last error message of this thread into `buf` (truncated,
 * always NUL-terminated when `len > 0`). Returns the full message length.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null.
 */
size_t dh_last_error(char *buf, size_t len);

/**
 * Parses a distribution JSON document (`{"dim", "atoms": [{flip, trans, w}]}`).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
DhStatus dh_distribution_from_json(const char *json, DhDistribution **out);

/**
 * The bundled distribution `nu1`.
 *
 * # Safety
 * `out` must be writable.
 */
DhStatus dh_distribution_nu1(DhDistribution **out);

/**
 * # Safety
 * `d` must come from this library and not be used afterwards.
 */
void dh_distribution_free(DhDistribution *d);

/**
 * # Safety
 * `d` must be a live handle or null (returns 0).
 */
size_t dh_distribution_dim(const DhDistribution *d);

/**
 * `P(S_n = (flip, trans))` for the i.i.d. walk.
 *
 * # Safety
 * `d` live; `trans` valid for `dim` values; `out` writable.
 */
DhStatus dh_rw_nstep_prob(const DhDistribution *d,
                          size_t n,
                          int64_t flip,
                          const int64_t *trans,
                          size_t dim,
                          double *out);

/**
 * `max |n^{d/2} P(S_n = (ε, r)) − Φ(r/√n)|` over `|r|_∞ ≤ radius`.
 *
 * # Safety
 * `d` live; `out` writable.
 */
DhStatus dh_rw_lclt_deviation(const DhDistribution *d, size_t n, int64_t radius, double *out);

/**
 * Fractions of `trials` sampled paths that return to e by each horizon.
 *
 * # Safety
 * `d` live; `horizons` valid for `count` values; `out` valid for `count`.
 */
DhStatus dh_rw_return_fraction(const DhDistribution *d,
                               const size_t *horizons,
                               size_t count,
                               size_t trials,
                               uint64_t seed,
                               double *out);

/**
 * Parses and validates a model JSON document.
 *
 * # Safety
 * `json` NUL-terminated; `out` writable.
 */
DhStatus dh_model_from_json(const char *json, DhModel **out);

/**
 * A bundled model by name: gm-bern, gm-markov, gm-period2, gm-d2, gm-d3.
 *
 * # Safety
 * `name` NUL-terminated; `out` writable.
 */
DhStatus dh_model_fixture(const char *name, DhModel **out);

/**
 * # Safety
 * `m` must come from this library and not be used afterwards.
 */
void dh_model_free(DhModel *m);

/**
 * # Safety
 * `m` live or null (returns 0).
 */
size_t dh_model_dim(const DhModel *m);

/**
 * # Safety
 * `m` live or null (returns 0).
 */
size_t dh_model_states(const DhModel *m);

/**
 * `μ(ψ_n = (flip, trans))` by Fourier inversion.
 *
 * # Safety
 * `m` live; `trans` valid for `dim` values; `out` writable.
 */
DhStatus dh_gm_nstep_prob(const DhModel *m,
                          size_t n,
                          int64_t flip,
                          const int64_t *trans,
                          size_t dim,
                          double *out);

/**
 * Limit covariance Σ₁², written row-major into `out` (`d·d` values).
 *
 * # Safety
 * `m` live; `out` valid for `len` values.
 */
DhStatus dh_gm_sigma1_sq(const DhModel *m, double *out, size_t len);

/**
 * First-return law `f[0..=n_max]` (`f[0] = 0`) by the exact taboo DP.
 *
 * # Safety
 * `m` live; `out` valid for `len ≥ n_max + 1` values.
 */
DhStatus dh_gm_first_return(const DhModel *m, size_t n_max, double *out, size_t len);

#endif  /* DIHEDRAL_H */
