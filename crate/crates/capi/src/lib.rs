//! C ABI over the legendre-gabor library. Contexts are opaque handles,
//! every call returns a status code, and results come back through out
//! pointers. The header is generated into include/legendre_gabor.h at build
//! time.

#![deny(unsafe_op_in_unsafe_fn)]

use legendre_gabor::field::{self, FieldContext};
use legendre_gabor::flatrip::{flat_rip_delta, rip_order_from_flat, PairSampler};
use legendre_gabor::gabor::{coherence, CoherenceMode, NormConvention};
use legendre_gabor::recovery::omp;
use legendre_gabor::theorem::{
    dirichlet_kernel_mag, scaling_fit, sine_sum_exact, trivial_bound, ConsecutiveBlock,
    ThetaParams,
};
use num_complex::Complex64;
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status code returned by every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LgfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    NotPrime = 3,
    BudgetExceeded = 4,
    ComputationFailed = 5,
}

/// Column normalization of the frame.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LgfConvention {
    Paper = 0,
    Unit = 1,
}

impl From<LgfConvention> for NormConvention {
    fn from(c: LgfConvention) -> Self {
        match c {
            LgfConvention::Paper => NormConvention::PaperSqrtP,
            LgfConvention::Unit => NormConvention::UnitNorm,
        }
    }
}

/// Opaque handle over the precomputed tables for one prime.
pub struct LgfContext {
    inner: FieldContext,
}

fn guard<F: FnOnce() -> LgfStatus>(f: F) -> LgfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => LgfStatus::ComputationFailed,
    }
}

/// Allocate a context for the odd prime p. The handle must be released with
/// lgf_context_free.
///
/// # Safety
/// `out` must be a valid pointer to a `LgfContext*` slot.
#[no_mangle]
pub unsafe extern "C" fn lgf_context_new(p: u64, out: *mut *mut LgfContext) -> LgfStatus {
    if out.is_null() {
        return LgfStatus::NullArgument;
    }
    guard(|| match FieldContext::new(p) {
        Ok(inner) => {
            let handle = Box::into_raw(Box::new(LgfContext { inner }));
            unsafe { *out = handle };
            LgfStatus::Ok
        }
        Err(field::FieldError::NotOddPrime(_)) => LgfStatus::NotPrime,
        Err(field::FieldError::BudgetExceeded(..)) => LgfStatus::BudgetExceeded,
    })
}

/// Release a context created by lgf_context_new. Null is a no-op.
///
/// # Safety
/// `ctx` must be null or a handle returned by lgf_context_new that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn lgf_context_free(ctx: *mut LgfContext) {
    if !ctx.is_null() {
        drop(unsafe { Box::from_raw(ctx) });
    }
}

/// The prime the context was built for.
///
/// # Safety
/// `ctx` must be a live handle and `out` a valid u64 slot.
#[no_mangle]
pub unsafe extern "C" fn lgf_context_prime(ctx: *const LgfContext, out: *mut u64) -> LgfStatus {
    if ctx.is_null() || out.is_null() {
        return LgfStatus::NullArgument;
    }
    unsafe { *out = (*ctx).inner.p() };
    LgfStatus::Ok
}

/// Deterministic primality test for any 64-bit integer.
///
/// # Safety
/// `out` must be a valid bool slot.
#[no_mangle]
pub unsafe extern "C" fn lgf_is_prime(m: u64, out: *mut bool) -> LgfStatus {
    if out.is_null() {
        return LgfStatus::NullArgument;
    }
    unsafe { *out = field::is_prime(m) };
    LgfStatus::Ok
}

/// Legendre symbol (k/p) in {-1, 0, +1}.
///
/// # Safety
/// `ctx` must be a live handle and `out` a valid i32 slot.
#[no_mangle]
pub unsafe extern "C" fn lgf_legendre_symbol(
    ctx: *const LgfContext,
    k: u64,
    out: *mut i32,
) -> LgfStatus {
    if ctx.is_null() || out.is_null() {
        return LgfStatus::NullArgument;
    }
    let ctx = unsafe { &(*ctx).inner };
    unsafe { *out = ctx.chi_at(k % ctx.p()) as i32 };
    LgfStatus::Ok
}

/// Gauss sum G = sum_k chi[k] e^{2 pi i k / p}, split into real and
/// imaginary parts.
///
/// # Safety
/// `ctx` must be a live handle; `out_re` and `out_im` must be valid f64
/// slots.
#[no_mangle]
pub unsafe extern "C" fn lgf_gauss_sum(
    ctx: *const LgfContext,
    out_re: *mut f64,
    out_im: *mut f64,
) -> LgfStatus {
    if ctx.is_null() || out_re.is_null() || out_im.is_null() {
        return LgfStatus::NullArgument;
    }
    guard(|| {
        let g = unsafe { &(*ctx).inner }.gauss_sum();
        unsafe {
            *out_re = g.re;
            *out_im = g.im;
        }
        LgfStatus::Ok
    })
}

/// Frame coherence by the O(p^3) difference-class scan.
///
/// # Safety
/// `ctx` must be a live handle and `out` a valid f64 slot.
#[no_mangle]
pub unsafe extern "C" fn lgf_coherence(
    ctx: *const LgfContext,
    convention: LgfConvention,
    out: *mut f64,
) -> LgfStatus {
    if ctx.is_null() || out.is_null() {
        return LgfStatus::NullArgument;
    }
    guard(|| {
        let ctx = unsafe { &(*ctx).inner };
        match coherence(ctx, convention.into(), CoherenceMode::ShiftClass) {
            Ok(mu) => {
                unsafe { *out = mu };
                LgfStatus::Ok
            }
            Err(_) => LgfStatus::ComputationFailed,
        }
    })
}

/// |sin(pi length shift / p) / sin(pi shift / p)| with the limit value at
/// shift = 0 mod p.
///
/// # Safety
/// `out` must be a valid f64 slot.
#[no_mangle]
pub unsafe extern "C" fn lgf_dirichlet_kernel_mag(
    p: u64,
    length: u64,
    shift: i64,
    out: *mut f64,
) -> LgfStatus {
    if out.is_null() {
        return LgfStatus::NullArgument;
    }
    if p < 3 || length == 0 || length > p {
        return LgfStatus::InvalidArgument;
    }
    unsafe { *out = dirichlet_kernel_mag(p, &ConsecutiveBlock::new(0, length), shift) };
    LgfStatus::Ok
}

/// sum over s != 0, -n of the two Dirichlet kernel magnitudes for blocks of
/// the given lengths.
///
/// # Safety
/// `out` must be a valid f64 slot.
#[no_mangle]
pub unsafe extern "C" fn lgf_sine_sum(
    p: u64,
    n: u64,
    m1len: u64,
    m2len: u64,
    out: *mut f64,
) -> LgfStatus {
    if out.is_null() {
        return LgfStatus::NullArgument;
    }
    guard(|| match ThetaParams::free(p, n, m1len, m2len) {
        Ok(params) => {
            unsafe { *out = sine_sum_exact(&params) };
            LgfStatus::Ok
        }
        Err(legendre_gabor::theorem::TheoremError::NotPrime(_)) => LgfStatus::NotPrime,
        Err(_) => LgfStatus::InvalidArgument,
    })
}

/// The p sqrt(m1len m2len) bound on the same sum.
///
/// # Safety
/// `out` must be a valid f64 slot.
#[no_mangle]
pub unsafe extern "C" fn lgf_trivial_bound(
    p: u64,
    n: u64,
    m1len: u64,
    m2len: u64,
    out: *mut f64,
) -> LgfStatus {
    if out.is_null() {
        return LgfStatus::NullArgument;
    }
    match ThetaParams::free(p, n, m1len, m2len) {
        Ok(params) => {
            unsafe { *out = trivial_bound(&params) };
            LgfStatus::Ok
        }
        Err(legendre_gabor::theorem::TheoremError::NotPrime(_)) => LgfStatus::NotPrime,
        Err(_) => LgfStatus::InvalidArgument,
    }
}

/// Realize theorem-mode parameters from the scaling exponents: n near
/// p^{1/2+delta}, an even m1len near p^{1/2-sigma}, and m2len an even
/// multiple of m1len within sqrt(p).
///
/// # Safety
/// The three out pointers must be valid u64 slots.
#[no_mangle]
pub unsafe extern "C" fn lgf_theta_realize(
    p: u64,
    sigma: f64,
    delta: f64,
    out_n: *mut u64,
    out_m1len: *mut u64,
    out_m2len: *mut u64,
) -> LgfStatus {
    if out_n.is_null() || out_m1len.is_null() || out_m2len.is_null() {
        return LgfStatus::NullArgument;
    }
    guard(|| match ThetaParams::realize(p, sigma, delta, 0.1) {
        Ok(params) => {
            unsafe {
                *out_n = params.n;
                *out_m1len = params.m1len;
                *out_m2len = params.m2len;
            }
            LgfStatus::Ok
        }
        Err(legendre_gabor::theorem::TheoremError::NotPrime(_)) => LgfStatus::NotPrime,
        Err(_) => LgfStatus::InvalidArgument,
    })
}

/// Least-squares fit of ln(value) against ln(p) over at least five points.
///
/// # Safety
/// `primes` and `values` must point to `len` readable elements; the out
/// pointers must be valid f64 slots.
#[no_mangle]
pub unsafe extern "C" fn lgf_scaling_fit(
    primes: *const u64,
    values: *const f64,
    len: usize,
    out_exponent: *mut f64,
    out_log_k: *mut f64,
    out_r2: *mut f64,
) -> LgfStatus {
    if primes.is_null() || values.is_null() || out_exponent.is_null() || out_log_k.is_null()
        || out_r2.is_null()
    {
        return LgfStatus::NullArgument;
    }
    let ps = unsafe { std::slice::from_raw_parts(primes, len) };
    let vs = unsafe { std::slice::from_raw_parts(values, len) };
    let points: Vec<(u64, f64)> = ps.iter().copied().zip(vs.iter().copied()).collect();
    match scaling_fit(&points) {
        Ok(fit) => {
            unsafe {
                *out_exponent = fit.exponent;
                *out_log_k = fit.log_k;
                *out_r2 = fit.r2;
            }
            LgfStatus::Ok
        }
        Err(_) => LgfStatus::InvalidArgument,
    }
}

/// Sampled flat-RIP constant over random disjoint consecutive-block pairs,
/// with the relaxed |<sum,sum>|/k normalization and the frame coherence.
///
/// # Safety
/// `ctx` must be a live handle; the out pointers must be valid f64 slots.
#[no_mangle]
pub unsafe extern "C" fn lgf_flat_rip_delta(
    ctx: *const LgfContext,
    k: u64,
    trials: u64,
    convention: LgfConvention,
    seed: u64,
    out_delta: *mut f64,
    out_relaxed: *mut f64,
    out_mu: *mut f64,
) -> LgfStatus {
    if ctx.is_null() || out_delta.is_null() || out_relaxed.is_null() || out_mu.is_null() {
        return LgfStatus::NullArgument;
    }
    guard(|| {
        let ctx = unsafe { &(*ctx).inner };
        match flat_rip_delta(
            ctx,
            k,
            PairSampler::ConsecutiveBlocks,
            trials,
            convention.into(),
            seed,
        ) {
            Ok(report) => {
                unsafe {
                    *out_delta = report.delta;
                    *out_relaxed = report.relaxed_delta.unwrap_or(report.delta);
                    *out_mu = report.mu;
                }
                LgfStatus::Ok
            }
            Err(_) => LgfStatus::InvalidArgument,
        }
    })
}

/// The order transfer (2 s k, 44 s delta ln k); the log is natural.
///
/// # Safety
/// `out_order` and `out_delta` must be valid slots.
#[no_mangle]
pub unsafe extern "C" fn lgf_rip_order_from_flat(
    k: u64,
    delta: f64,
    s: u64,
    out_order: *mut u64,
    out_delta: *mut f64,
) -> LgfStatus {
    if out_order.is_null() || out_delta.is_null() {
        return LgfStatus::NullArgument;
    }
    match rip_order_from_flat(k, delta, s) {
        Ok((order, d)) => {
            unsafe {
                *out_order = order;
                *out_delta = d;
            }
            LgfStatus::Ok
        }
        Err(_) => LgfStatus::InvalidArgument,
    }
}

/// Orthogonal matching pursuit on a length-p measurement (unit-norm frame).
/// The four output arrays must hold `max_support` entries; `out_count`
/// receives how many were written.
///
/// # Safety
/// `b_re`/`b_im` must point to `b_len` readable f64; the output arrays must
/// hold `max_support` writable elements; the scalar out pointers must be
/// valid slots.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn lgf_omp_recover(
    ctx: *const LgfContext,
    b_re: *const f64,
    b_im: *const f64,
    b_len: usize,
    max_support: usize,
    out_l: *mut u64,
    out_j: *mut u64,
    out_re: *mut f64,
    out_im: *mut f64,
    out_count: *mut usize,
    out_residual: *mut f64,
) -> LgfStatus {
    if ctx.is_null()
        || b_re.is_null()
        || b_im.is_null()
        || out_l.is_null()
        || out_j.is_null()
        || out_re.is_null()
        || out_im.is_null()
        || out_count.is_null()
        || out_residual.is_null()
    {
        return LgfStatus::NullArgument;
    }
    guard(|| {
        let ctx = unsafe { &(*ctx).inner };
        if b_len != ctx.p() as usize {
            return LgfStatus::InvalidArgument;
        }
        let re = unsafe { std::slice::from_raw_parts(b_re, b_len) };
        let im = unsafe { std::slice::from_raw_parts(b_im, b_len) };
        let b: Vec<Complex64> = re
            .iter()
            .zip(im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        match omp(ctx, &b, max_support, NormConvention::UnitNorm) {
            Ok(result) => {
                let count = result.support.len().min(max_support);
                for (slot, (idx, value)) in result
                    .support
                    .iter()
                    .zip(&result.values)
                    .take(count)
                    .enumerate()
                {
                    unsafe {
                        *out_l.add(slot) = idx.l;
                        *out_j.add(slot) = idx.j;
                        *out_re.add(slot) = value.re;
                        *out_im.add(slot) = value.im;
                    }
                }
                unsafe {
                    *out_count = count;
                    *out_residual = result.residual_norm;
                }
                LgfStatus::Ok
            }
            Err(_) => LgfStatus::InvalidArgument,
        }
    })
}
