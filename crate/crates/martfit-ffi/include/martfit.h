#ifndef MARTFIT_H
#define MARTFIT_H

/* Generated by cbindgen from the martfit-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every API function.
 */
typedef enum MartfitStatus {
  MartfitStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  MartfitStatus_NullArgument = 1,
  /**
   * Input text was not valid UTF-8.
   */
  MartfitStatus_Utf8 = 2,
  /**
   * Input text failed to parse.
   */
  MartfitStatus_ParseError = 3,
  /**
   * Marginal, slice or surface invariants violated.
   */
  MartfitStatus_Invalid = 4,
  /**
   * Argument outside its mathematical domain.
   */
  MartfitStatus_Domain = 5,
  /**
   * Marginals not in convex order.
   */
  MartfitStatus_ConvexOrder = 6,
  /**
   * Internal consistency failure.
   */
  MartfitStatus_Internal = 7,
} MartfitStatus;

/**
 * An interpolated call surface (opaque).
 */
typedef struct MartfitChain MartfitChain;

/**
 * A path sampler with prebuilt per-interval barriers (opaque).
 */
typedef struct MartfitSampler MartfitSampler;

/**
 * A validated-on-construction family of marginals (opaque).
 */
typedef struct MartfitSurface MartfitSurface;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread; valid until the next
 * failing call on the same thread.
 */
const char *martfit_last_error_message(void);

/**
 * Parse a marginal text document (`marginal <t>` / `atom <x> <w>` blocks)
 * into a surface handle. The handle owns its data; release it with
 * `martfit_surface_free`.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum MartfitStatus martfit_surface_parse(const char *text, struct MartfitSurface **out);

/**
 * # Safety
 * `surface` must come from `martfit_surface_parse` and not be used after.
 */
void martfit_surface_free(struct MartfitSurface *surface);

/**
 * `Ok` iff the surface satisfies the convex-order membership conditions;
 * `Invalid` with a descriptive message otherwise.
 *
 * # Safety
 * `surface` must be a live handle.
 */
enum MartfitStatus martfit_surface_validate(const struct MartfitSurface *surface);

/**
 * Number of grid times.
 *
 * # Safety
 * `surface` and `out` must be valid.
 */
enum MartfitStatus martfit_surface_num_times(const struct MartfitSurface *surface, size_t *out);

/**
 * Copy the grid times into `buf` (capacity `cap`); `written` receives the
 * count, which is never more than `cap`.
 *
 * # Safety
 * `buf` must point to at least `cap` doubles.
 */
enum MartfitStatus martfit_surface_times(const struct MartfitSurface *surface,
                                         double *buf,
                                         size_t cap,
                                         size_t *written);

/**
 * Build the extremal interpolation of a valid surface.
 *
 * # Safety
 * `surface` must be a live handle; `out` valid.
 */
enum MartfitStatus martfit_chain_new(const struct MartfitSurface *surface,
                                     struct MartfitChain **out);

/**
 * # Safety
 * `chain` must come from `martfit_chain_new` and not be used after.
 */
void martfit_chain_free(struct MartfitChain *chain);

/**
 * Interpolated call value `C(t, x)`.
 *
 * # Safety
 * `chain` must be a live handle; `out` valid.
 */
enum MartfitStatus martfit_chain_eval(const struct MartfitChain *chain,
                                      double t,
                                      double x,
                                      double *out);

/**
 * Distance between two interpolated surfaces within additive `tol`.
 *
 * # Safety
 * Both handles must be live; `out` valid.
 */
enum MartfitStatus martfit_metric(const struct MartfitChain *a,
                                  const struct MartfitChain *b,
                                  double tol,
                                  double *out);

/**
 * Build the path sampler (per-interval embedding barriers).
 *
 * # Safety
 * `surface` must be a live handle; `out` valid.
 */
enum MartfitStatus martfit_sampler_new(const struct MartfitSurface *surface,
                                       struct MartfitSampler **out);

/**
 * # Safety
 * `sampler` must come from `martfit_sampler_new` and not be used after.
 */
void martfit_sampler_free(struct MartfitSampler *sampler);

/**
 * Simulate `n_paths` paths at `n_times` query times; `out` receives the
 * row-major `n_paths x n_times` value matrix. Deterministic in `seed`.
 *
 * # Safety
 * `times` must point to `n_times` doubles and `out` to
 * `n_paths * n_times` doubles.
 */
enum MartfitStatus martfit_sampler_simulate(const struct MartfitSampler *sampler,
                                            size_t n_paths,
                                            uint64_t seed,
                                            const double *times,
                                            size_t n_times,
                                            double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MARTFIT_H */
