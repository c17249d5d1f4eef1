#ifndef LEGENDRE_GABOR_H
#define LEGENDRE_GABOR_H

/* Generated by cbindgen from legendre-gabor-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Column normalization of the frame.
 */
typedef enum LgfConvention {
  LGF_CONVENTION_PAPER = 0,
  LGF_CONVENTION_UNIT = 1,
} LgfConvention;

/**
 * Status code returned by every call.
 */
typedef enum LgfStatus {
  LGF_STATUS_OK = 0,
  LGF_STATUS_NULL_ARGUMENT = 1,
  LGF_STATUS_INVALID_ARGUMENT = 2,
  LGF_STATUS_NOT_PRIME = 3,
  LGF_STATUS_BUDGET_EXCEEDED = 4,
  LGF_STATUS_COMPUTATION_FAILED = 5,
} LgfStatus;

/**
 * Opaque handle over the precomputed tables for one prime.
 */
typedef struct LgfContext LgfContext;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Allocate a context for the odd prime p. The handle must be released with
 * lgf_context_free.
 *
 * # Safety
 * `out` must be a valid pointer to a `LgfContext*` slot.
 */
enum LgfStatus lgf_context_new(uint64_t p, struct LgfContext **out);

/**
 * Release a context created by lgf_context_new. Null is a no-op.
 *
 * # Safety
 * `ctx` must be null or a handle returned by lgf_context_new that has not
 * been freed already.
 */
void lgf_context_free(struct LgfContext *ctx);

/**
 * The prime the context was built for.
 *
 * # Safety
 * `ctx` must be a live handle and `out` a valid u64 slot.
 */
enum LgfStatus lgf_context_prime(const struct LgfContext *ctx, uint64_t *out);

/**
 * Deterministic primality test for any 64-bit integer.
 *
 * # Safety
 * `out` must be a valid bool slot.
 */
enum LgfStatus lgf_is_prime(uint64_t m, bool *out);

/**
 * Legendre symbol (k/p) in {-1, 0, +1}.
 *
 * # Safety
 * `ctx` must be a live handle and `out` a valid i32 slot.
 */
enum LgfStatus lgf_legendre_symbol(const struct LgfContext *ctx, uint64_t k, int32_t *out);

/**
 * Gauss sum G = sum_k chi[k] e^{2 pi i k / p}, split into real and
 * imaginary parts.
 *
 * # Safety
 * `ctx` must be a live handle; `out_re` and `out_im` must be valid f64
 * slots.
 */
enum LgfStatus lgf_gauss_sum(const struct LgfContext *ctx, double *out_re, double *out_im);

/**
 * Frame coherence by the O(p^3) difference-class scan.
 *
 * # Safety
 * `ctx` must be a live handle and `out` a valid f64 slot.
 */
enum LgfStatus lgf_coherence(const struct LgfContext *ctx,
                             enum LgfConvention convention,
                             double *out);

/**
 * |sin(pi length shift / p) / sin(pi shift / p)| with the limit value at
 * shift = 0 mod p.
 *
 * # Safety
 * `out` must be a valid f64 slot.
 */
enum LgfStatus lgf_dirichlet_kernel_mag(uint64_t p, uint64_t length, int64_t shift, double *out);

/**
 * sum over s != 0, -n of the two Dirichlet kernel magnitudes for blocks of
 * the given lengths.
 *
 * # Safety
 * `out` must be a valid f64 slot.
 */
enum LgfStatus lgf_sine_sum(uint64_t p, uint64_t n, uint64_t m1len, uint64_t m2len, double *out);

/**
 * The p sqrt(m1len m2len) bound on the same sum.
 *
 * # Safety
 * `out` must be a valid f64 slot.
 */
enum LgfStatus lgf_trivial_bound(uint64_t p,
                                 uint64_t n,
                                 uint64_t m1len,
                                 uint64_t m2len,
                                 double *out);

/**
 * Realize theorem-mode parameters from the scaling exponents: n near
 * p^{1/2+delta}, an even m1len near p^{1/2-sigma}, and m2len an even
 * multiple of m1len within sqrt(p).
 *
 * # Safety
 * The three out pointers must be valid u64 slots.
 */
enum LgfStatus lgf_theta_realize(uint64_t p,
                                 double sigma,
                                 double delta,
                                 uint64_t *out_n,
                                 uint64_t *out_m1len,
                                 uint64_t *out_m2len);

/**
 * Least-squares fit of ln(value) against ln(p) over at least five points.
 *
 * # Safety
 * `primes` and `values` must point to `len` readable elements; the out
 * pointers must be valid f64 slots.
 */
enum LgfStatus lgf_scaling_fit(const uint64_t *primes,
                               const double *values,
                               uintptr_t len,
                               double *out_exponent,
                               double *out_log_k,
                               double *out_r2);

/**
 * Sampled flat-RIP constant over random disjoint consecutive-block pairs,
 * with the relaxed |<sum,sum>|/k normalization and the frame coherence.
 *
 * # Safety
 * `ctx` must be a live handle; the out pointers must be valid f64 slots.
 */
enum LgfStatus lgf_flat_rip_delta(const struct LgfContext *ctx,
                                  uint64_t k,
                                  uint64_t trials,
                                  enum LgfConvention convention,
                                  uint64_t seed,
                                  double *out_delta,
                                  double *out_relaxed,
                                  double *out_mu);

/**
 * The order transfer (2 s k, 44 s delta ln k); the log is natural.
 *
 * # Safety
 * `out_order` and `out_delta` must be valid slots.
 */
enum LgfStatus lgf_rip_order_from_flat(uint64_t k,
                                       double delta,
                                       uint64_t s,
                                       uint64_t *out_order,
                                       double *out_delta);

/**
 * Orthogonal matching pursuit on a length-p measurement (unit-norm frame).
 * The four output arrays must hold `max_support` entries; `out_count`
 * receives how many were written.
 *
 * # Safety
 * `b_re`/`b_im` must point to `b_len` readable f64; the output arrays must
 * hold `max_support` writable elements; the scalar out pointers must be
 * valid slots.
 */
enum LgfStatus lgf_omp_recover(const struct LgfContext *ctx,
                               const double *b_re,
                               const double *b_im,
                               uintptr_t b_len,
                               uintptr_t max_support,
                               uint64_t *out_l,
                               uint64_t *out_j,
                               double *out_re,
                               double *out_im,
                               uintptr_t *out_count,
                               double *out_residual);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LEGENDRE_GABOR_H */
