#ifndef RECORDLAB_H
#define RECORDLAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  RL_STATUS_OK = 0,
  RL_STATUS_NULL_POINTER = 1,
  RL_STATUS_INVALID_ARGUMENT = 2,
  RL_STATUS_DIMENSION_MISMATCH = 3,
  RL_STATUS_NOT_PHYSICAL = 4,
  RL_STATUS_VERDICT_FAILED = 5,
  RL_STATUS_CONFIG = 6,
  RL_STATUS_IO = 7,
  RL_STATUS_PANIC = 8,
} RlStatus;

typedef struct RlDensity RlDensity;

typedef struct RlPovm RlPovm;

typedef struct RlUnitary RlUnitary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *rl_last_error(void);

/**
 * Builds a density operator from a `2·n·n` interleaved row-major matrix,
 * `n` being the product of `dims`.
 *
 * # Safety
 * `data` must point to `2·n·n` doubles, `dims` to `ndims` sizes and `out`
 * to writable storage for one handle.
 */
RlStatus rl_density_new(const double *data, const size_t *dims, size_t ndims, RlDensity **out);

/**
 * Random density operator of the given rank.
 *
 * # Safety
 * `out` must point to writable storage for one handle.
 */
RlStatus rl_random_density(size_t dim, size_t rank, uint64_t seed, RlDensity **out);

/**
 * # Safety
 * `rho` must be null or a handle from this library that was not freed.
 */
void rl_density_free(RlDensity *rho);

/**
 * Total dimension, 0 for a null handle.
 *
 * # Safety
 * `rho` must be null or a live handle.
 */
size_t rl_density_dim(const RlDensity *rho);

/**
 * Copies the matrix into `out` (`2·n·n` doubles, interleaved row-major).
 *
 * # Safety
 * `rho` must be a live handle and `out` must hold `len` doubles.
 */
RlStatus rl_density_matrix(const RlDensity *rho, double *out, size_t len);

/**
 * Reduced state on the factors listed in `keep`, in ascending order.
 *
 * # Safety
 * `rho` must be a live handle, `keep` must point to `nkeep` indices and
 * `out` to writable storage for one handle.
 */
RlStatus rl_partial_trace(const RlDensity *rho, const size_t *keep, size_t nkeep, RlDensity **out);

/**
 * `Tr(ρσ)`.
 *
 * # Safety
 * `rho` and `sigma` must be live handles, `out` writable.
 */
RlStatus rl_hs_inner(const RlDensity *rho, const RlDensity *sigma, double *out);

/**
 * Writes the canonical purification of `rho` (`d·d` amplitudes on
 * `S ⊗ S′`, interleaved) into `out`.
 *
 * # Safety
 * `rho` must be a live handle and `out` must hold `len` doubles.
 */
RlStatus rl_purify(const RlDensity *rho, double *out, size_t len);

/**
 * `UρU†`.
 *
 * # Safety
 * `rho` and `u` must be live handles, `out` writable.
 */
RlStatus rl_density_evolve(const RlDensity *rho, const RlUnitary *u, RlDensity **out);

/**
 * Builds a unitary from a `2·n·n` interleaved row-major matrix.
 *
 * # Safety
 * As for [`rl_density_new`].
 */
RlStatus rl_unitary_new(const double *data, const size_t *dims, size_t ndims, RlUnitary **out);

/**
 * Haar-random unitary.
 *
 * # Safety
 * `out` must point to writable storage for one handle.
 */
RlStatus rl_random_unitary(size_t dim, uint64_t seed, RlUnitary **out);

/**
 * # Safety
 * `u` must be null or a handle from this library that was not freed.
 */
void rl_unitary_free(RlUnitary *u);

/**
 * Sequential measurement: first in `y_basis`, then evolve by `evolution`,
 * then measure in `z_basis`. Each basis is `d` vectors of `d` interleaved
 * amplitudes, one vector after the other.
 *
 * # Safety
 * `y_basis` and `z_basis` must hold `2·d·d` doubles for `d` the dimension of
 * `evolution`, a live handle; `out` must be writable.
 */
RlStatus rl_povm_new(const double *y_basis,
                     const double *z_basis,
                     const RlUnitary *evolution,
                     RlPovm **out);

/**
 * Oscillator preset on `levels` levels with phase-space rotation `theta`.
 *
 * # Safety
 * `out` must point to writable storage for one handle.
 */
RlStatus rl_povm_oscillator(size_t levels, double theta, RlPovm **out);

/**
 * # Safety
 * `m` must be null or a handle from this library that was not freed.
 */
void rl_povm_free(RlPovm *m);

/**
 * Writes `p(k,l)` at index `k·d + l` (`d²` doubles).
 *
 * # Safety
 * `m` and `rho0` must be live handles and `out` must hold `len` doubles.
 */
RlStatus rl_povm_probabilities(const RlPovm *m, const RlDensity *rho0, double *out, size_t len);

/**
 * `max |Σ F(k,l) − 1|`.
 *
 * # Safety
 * `m` must be a live handle, `out` writable.
 */
RlStatus rl_povm_identity_residual(const RlPovm *m, double *out);

/**
 * Runs one scenario given as JSON text, writes its report under
 * `outdir/<name>/` and hands back the report JSON in `report` (free it with
 * [`rl_string_free`]). Returns [`RlStatus::VerdictFailed`] with a report
 * when some verdict fails.
 *
 * # Safety
 * `config_json` and `outdir` must be NUL-terminated strings; `report` must
 * be null or writable.
 */
RlStatus rl_run_scenario(const char *config_json, const char *outdir, char **report);

/**
 * # Safety
 * `s` must be null or a string returned by this library that was not freed.
 */
void rl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RECORDLAB_H */
