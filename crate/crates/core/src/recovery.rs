//! Sparse recovery against the Legendre Gabor frame: measurement, orthogonal
//! matching pursuit, iterative soft thresholding, and the seeded experiment
//! harness.

use crate::field::FieldContext;
use crate::gabor::{
    accumulate_scaled_vector, gram_submatrix, GaborError, NormConvention, TimeFreqIndex,
    GRAM_SUPPORT_CAP,
};
use crate::linalg::{cholesky_solve, KahanComplex, KahanSum};
use crate::seeding::task_rng;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RecoveryError {
    #[error("index ({0}, {1}) is out of range for p = {2}")]
    InvalidIndex(u64, u64, u64),
    #[error("support has a repeated index")]
    DuplicateIndex,
    #[error("operation requires the unit-norm convention")]
    ConventionMismatch,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error(transparent)]
    Gabor(#[from] GaborError),
}

/// A sparse coefficient vector over the p^2 time-frequency indices.
#[derive(Debug, Clone)]
pub struct SparseSignal {
    pub support: Vec<TimeFreqIndex>,
    pub values: Vec<Complex64>,
}

impl SparseSignal {
    pub fn new(
        support: Vec<TimeFreqIndex>,
        values: Vec<Complex64>,
    ) -> Result<Self, RecoveryError> {
        assert_eq!(support.len(), values.len());
        let mut sorted = support.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(RecoveryError::DuplicateIndex);
        }
        Ok(SparseSignal { support, values })
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub support: Vec<TimeFreqIndex>,
    pub values: Vec<Complex64>,
    /// Filled by the experiment harness, which knows the ground truth.
    pub exact_support_match: Option<bool>,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl RecoveryResult {
    pub fn support_set(&self) -> BTreeSet<TimeFreqIndex> {
        self.support.iter().copied().collect()
    }
}

/// b = sum over the support of value * u_{l,j}.
pub fn measure(
    ctx: &FieldContext,
    signal: &SparseSignal,
    conv: NormConvention,
) -> Result<Vec<Complex64>, RecoveryError> {
    let p = ctx.p();
    let mut b = vec![Complex64::new(0.0, 0.0); p as usize];
    for (idx, &value) in signal.support.iter().zip(&signal.values) {
        if idx.l >= p || idx.j >= p {
            return Err(RecoveryError::InvalidIndex(idx.l, idx.j, p));
        }
        accumulate_scaled_vector(ctx, *idx, conv, value, &mut b);
    }
    Ok(b)
}

/// <r, u_{l,j}> for all p^2 columns; one O(p) inner product per column,
/// parallel over time shifts with an order-preserving collect.
fn correlations(ctx: &FieldContext, r: &[Complex64], conv: NormConvention) -> Vec<Vec<Complex64>> {
    let p = ctx.p();
    let scale = conv.scale(p);
    (0..p)
        .into_par_iter()
        .map(|l| {
            let windowed: Vec<Complex64> = (0..p)
                .map(|k| r[k as usize] * (ctx.chi(k as i64 - l as i64) as f64))
                .collect();
            (0..p)
                .map(|j| {
                    let mut acc = KahanComplex::new();
                    for (k, w) in windowed.iter().enumerate() {
                        if w.re != 0.0 || w.im != 0.0 {
                            // conj(e^{-2 pi i k j / p})
                            acc.add(w * ctx.root_prod(k as u64, j).conj());
                        }
                    }
                    acc.value() * scale
                })
                .collect()
        })
        .collect()
}

/// Largest-correlation index outside `taken`, ties broken toward the
/// smallest (l, j) by the scan order.
fn argmax_correlation(
    corr: &[Vec<Complex64>],
    taken: &BTreeSet<TimeFreqIndex>,
) -> (TimeFreqIndex, f64) {
    let mut best = (TimeFreqIndex::new(0, 0), -1.0);
    for (l, row) in corr.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let idx = TimeFreqIndex::new(l as u64, j as u64);
            if taken.contains(&idx) {
                continue;
            }
            let m = v.norm();
            if m > best.1 {
                best = (idx, m);
            }
        }
    }
    (best.0, best.1.max(0.0))
}

fn norm2(v: &[Complex64]) -> f64 {
    let mut acc = KahanSum::new();
    for e in v {
        acc.add(e.norm_sqr());
    }
    acc.value().sqrt()
}

/// Least squares of b onto the span of the support columns; None when the
/// Gram matrix is numerically singular.
fn least_squares_on_support(
    ctx: &FieldContext,
    b: &[Complex64],
    support: &[TimeFreqIndex],
    conv: NormConvention,
) -> Result<Option<Vec<Complex64>>, RecoveryError> {
    // Normal equations sum_j <u_j, u_i> c_j = <b, u_i>: the matrix is the
    // entrywise conjugate of the Gram convention G[a][b] = <u_a, u_b>.
    let mut g = gram_submatrix(ctx, support, conv)?;
    for a in 0..g.n() {
        for bb in 0..g.n() {
            let v = g.get(a, bb).conj();
            g.set(a, bb, v);
        }
    }
    let p = ctx.p();
    let scale = conv.scale(p);
    let rhs: Vec<Complex64> = support
        .iter()
        .map(|idx| {
            let mut acc = KahanComplex::new();
            for k in 0..p {
                let chi = ctx.chi(k as i64 - idx.l as i64) as f64;
                if chi != 0.0 {
                    acc.add(b[k as usize] * ctx.root_prod(k, idx.j).conj() * (chi * scale));
                }
            }
            acc.value()
        })
        .collect();
    Ok(cholesky_solve(&g, &rhs))
}

/// Least squares of b onto the span of the support columns.
pub fn debias_on_support(
    ctx: &FieldContext,
    b: &[Complex64],
    support: &[TimeFreqIndex],
    conv: NormConvention,
) -> Result<Vec<Complex64>, RecoveryError> {
    Ok(least_squares_on_support(ctx, b, support, conv)?
        .unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); support.len()]))
}

/// Standard orthogonal matching pursuit for up to k columns, unit-norm only.
pub fn omp(
    ctx: &FieldContext,
    b: &[Complex64],
    k: usize,
    conv: NormConvention,
) -> Result<RecoveryResult, RecoveryError> {
    if conv != NormConvention::UnitNorm {
        return Err(RecoveryError::ConventionMismatch);
    }
    if k > GRAM_SUPPORT_CAP {
        return Err(RecoveryError::Gabor(GaborError::SupportTooLarge(
            k,
            GRAM_SUPPORT_CAP,
        )));
    }
    let p = ctx.p() as usize;
    assert_eq!(b.len(), p);
    let b_norm = norm2(b);
    let tol = 1e-12 * b_norm.max(1.0);
    let mut support: Vec<TimeFreqIndex> = Vec::new();
    let mut taken: BTreeSet<TimeFreqIndex> = BTreeSet::new();
    let mut values: Vec<Complex64> = Vec::new();
    let mut residual = b.to_vec();
    let mut iterations = 0;
    while iterations < k {
        let r_norm = norm2(&residual);
        if r_norm <= tol {
            break;
        }
        let corr = correlations(ctx, &residual, conv);
        let (pick, strength) = argmax_correlation(&corr, &taken);
        if strength <= tol {
            break;
        }
        support.push(pick);
        taken.insert(pick);
        match least_squares_on_support(ctx, b, &support, conv)? {
            Some(solved) => values = solved,
            None => {
                // Singular Gram: the new column adds nothing resolvable.
                support.pop();
                break;
            }
        }
        iterations += 1;
        residual = b.to_vec();
        for (idx, &v) in support.iter().zip(&values) {
            accumulate_scaled_vector(ctx, *idx, conv, -v, &mut residual);
        }
    }
    Ok(RecoveryResult {
        residual_norm: norm2(&residual),
        support,
        values,
        exact_support_match: None,
        iterations,
    })
}

/// ||A||^2 by power iteration on A A*; for this frame A A* is a multiple of
/// the identity, so the iteration settles immediately.
pub fn frame_operator_norm_sq(ctx: &FieldContext, conv: NormConvention) -> f64 {
    let p = ctx.p();
    let mut v: Vec<Complex64> =
        vec![Complex64::new(1.0 / (p as f64).sqrt(), 0.0); p as usize];
    let mut lambda = 0.0;
    for _ in 0..8 {
        // y = A (A* v)
        let corr = correlations(ctx, &v, conv);
        let mut y = vec![Complex64::new(0.0, 0.0); p as usize];
        for (l, row) in corr.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c.norm_sqr() > 0.0 {
                    accumulate_scaled_vector(
                        ctx,
                        TimeFreqIndex::new(l as u64, j as u64),
                        conv,
                        c,
                        &mut y,
                    );
                }
            }
        }
        lambda = norm2(&y) / norm2(&v);
        let scale = 1.0 / norm2(&y);
        v = y.into_iter().map(|e| e * scale).collect();
    }
    lambda
}

fn soft_threshold(z: Complex64, t: f64) -> Complex64 {
    let m = z.norm();
    if m <= t {
        Complex64::new(0.0, 0.0)
    } else {
        z * ((m - t) / m)
    }
}

/// Iterative soft thresholding on 1/2 ||Ax - b||^2 + lambda ||x||_1.
/// The objective is checked to be nonincreasing every step.
pub fn ista_l1(
    ctx: &FieldContext,
    b: &[Complex64],
    lambda: f64,
    iterations: usize,
    conv: NormConvention,
) -> Result<RecoveryResult, RecoveryError> {
    if lambda <= 0.0 {
        return Err(RecoveryError::NonPositive("lambda"));
    }
    let p = ctx.p();
    assert_eq!(b.len(), p as usize);
    let lipschitz = frame_operator_norm_sq(ctx, conv);
    let step = 1.0 / lipschitz;
    let dim = (p * p) as usize;
    let mut x = vec![Complex64::new(0.0, 0.0); dim];
    let mut ax = vec![Complex64::new(0.0, 0.0); p as usize];

    let objective = |ax: &[Complex64], x: &[Complex64]| -> f64 {
        let mut fit = KahanSum::new();
        for (a, bb) in ax.iter().zip(b) {
            fit.add((a - bb).norm_sqr());
        }
        let mut l1 = KahanSum::new();
        for e in x {
            l1.add(e.norm());
        }
        0.5 * fit.value() + lambda * l1.value()
    };

    let mut prev_obj = objective(&ax, &x);
    let mut done = 0;
    for _ in 0..iterations {
        // gradient = A*(Ax - b)
        let resid: Vec<Complex64> = ax.iter().zip(b).map(|(a, bb)| a - bb).collect();
        let grad = correlations(ctx, &resid, conv);
        for (l, row) in grad.iter().enumerate() {
            for (j, &gval) in row.iter().enumerate() {
                let slot = l * p as usize + j;
                x[slot] = soft_threshold(x[slot] - gval * step, step * lambda);
            }
        }
        // Refresh Ax from the nonzero entries.
        ax.iter_mut().for_each(|e| *e = Complex64::new(0.0, 0.0));
        for (slot, &v) in x.iter().enumerate() {
            if v.re != 0.0 || v.im != 0.0 {
                let idx = TimeFreqIndex::new((slot / p as usize) as u64, (slot % p as usize) as u64);
                accumulate_scaled_vector(ctx, idx, conv, v, &mut ax);
            }
        }
        let obj = objective(&ax, &x);
        assert!(
            obj <= prev_obj * (1.0 + 1e-9) + 1e-12,
            "ISTA objective increased: {prev_obj} -> {obj}"
        );
        done += 1;
        let converged = (prev_obj - obj).abs() <= 1e-14 * prev_obj.max(1.0);
        prev_obj = obj;
        if converged {
            break;
        }
    }

    let mut support = Vec::new();
    let mut values = Vec::new();
    for (slot, &v) in x.iter().enumerate() {
        if v.re != 0.0 || v.im != 0.0 {
            support.push(TimeFreqIndex::new(
                (slot / p as usize) as u64,
                (slot % p as usize) as u64,
            ));
            values.push(v);
        }
    }
    let resid_norm = {
        let mut acc = KahanSum::new();
        for (a, bb) in ax.iter().zip(b) {
            acc.add((a - bb).norm_sqr());
        }
        acc.value().sqrt()
    };
    Ok(RecoveryResult {
        support,
        values,
        exact_support_match: None,
        residual_norm: resid_norm,
        iterations: done,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Omp,
    Ista { lambda: f64, iterations: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessRate {
    pub k: usize,
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
}

/// Draw a k-sparse signal with a uniform support and unit-modulus
/// random-phase coefficients.
pub fn random_signal(p: u64, k: usize, rng: &mut impl Rng) -> SparseSignal {
    let mut support = BTreeSet::new();
    while support.len() < k {
        support.insert(TimeFreqIndex::new(rng.gen_range(0..p), rng.gen_range(0..p)));
    }
    let support: Vec<TimeFreqIndex> = support.into_iter().collect();
    let values = support
        .iter()
        .map(|_| {
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(1.0, theta)
        })
        .collect();
    SparseSignal { support, values }
}

/// Exact-support success rates over seeded trials, per sparsity level.
/// Trial (k_index, t) uses the counter k_index * 2^32 + t, so results do not
/// depend on scheduling.
pub fn recovery_experiment(
    ctx: &FieldContext,
    ks: &[usize],
    trials: u64,
    seed: u64,
    method: Method,
    conv: NormConvention,
) -> Result<Vec<SuccessRate>, RecoveryError> {
    let p = ctx.p();
    let mut out = Vec::with_capacity(ks.len());
    for (k_index, &k) in ks.iter().enumerate() {
        let successes: u64 = (0..trials)
            .into_par_iter()
            .map(|t| {
                let counter = ((k_index as u64) << 32) | t;
                let mut rng = task_rng(seed, counter);
                let truth = random_signal(p, k, &mut rng);
                let b = measure(ctx, &truth, conv).expect("valid random signal");
                let recovered: BTreeSet<TimeFreqIndex> = match method {
                    Method::Omp => omp(ctx, &b, k, conv).expect("omp").support_set(),
                    Method::Ista { lambda, iterations } => {
                        let res = ista_l1(ctx, &b, lambda, iterations, conv).expect("ista");
                        top_k_support(&res, k)
                    }
                };
                let truth_set: BTreeSet<TimeFreqIndex> = truth.support.iter().copied().collect();
                u64::from(recovered == truth_set)
            })
            .sum();
        out.push(SuccessRate {
            k,
            trials,
            successes,
            rate: successes as f64 / trials.max(1) as f64,
        });
    }
    Ok(out)
}

/// The k largest-magnitude recovered coefficients.
pub fn top_k_support(result: &RecoveryResult, k: usize) -> BTreeSet<TimeFreqIndex> {
    let mut pairs: Vec<(f64, TimeFreqIndex)> = result
        .support
        .iter()
        .zip(&result.values)
        .map(|(&idx, v)| (v.norm(), idx))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    pairs.into_iter().take(k).map(|(_, idx)| idx).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor::gabor_vector;

    #[test]
    fn measure_zero_signal() {
        let ctx = FieldContext::new(7).unwrap();
        let sig = SparseSignal::new(vec![], vec![]).unwrap();
        let b = measure(&ctx, &sig, NormConvention::UnitNorm).unwrap();
        assert!(b.iter().all(|e| e.norm() == 0.0));
    }

    #[test]
    fn measure_single_spike_is_column() {
        let ctx = FieldContext::new(11).unwrap();
        let idx = TimeFreqIndex::new(3, 8);
        let sig = SparseSignal::new(vec![idx], vec![Complex64::new(1.0, 0.0)]).unwrap();
        let b = measure(&ctx, &sig, NormConvention::UnitNorm).unwrap();
        let u = gabor_vector(&ctx, idx, NormConvention::UnitNorm);
        for (a, e) in b.iter().zip(u.entries()) {
            assert!((a - e).norm() < 1e-15);
        }
    }

    #[test]
    fn measure_is_linear() {
        let ctx = FieldContext::new(11).unwrap();
        let i1 = TimeFreqIndex::new(1, 2);
        let i2 = TimeFreqIndex::new(5, 9);
        let v1 = Complex64::new(0.3, -1.1);
        let v2 = Complex64::new(-0.7, 0.2);
        let sum = measure(
            &ctx,
            &SparseSignal::new(vec![i1, i2], vec![v1, v2]).unwrap(),
            NormConvention::UnitNorm,
        )
        .unwrap();
        let a = measure(
            &ctx,
            &SparseSignal::new(vec![i1], vec![v1]).unwrap(),
            NormConvention::UnitNorm,
        )
        .unwrap();
        let b = measure(
            &ctx,
            &SparseSignal::new(vec![i2], vec![v2]).unwrap(),
            NormConvention::UnitNorm,
        )
        .unwrap();
        for k in 0..11 {
            assert!((sum[k] - (a[k] + b[k])).norm() < 1e-12);
        }
    }

    #[test]
    fn measure_rejects_bad_index() {
        let ctx = FieldContext::new(7).unwrap();
        let sig =
            SparseSignal::new(vec![TimeFreqIndex::new(9, 0)], vec![Complex64::new(1.0, 0.0)])
                .unwrap();
        assert_eq!(
            measure(&ctx, &sig, NormConvention::UnitNorm).unwrap_err(),
            RecoveryError::InvalidIndex(9, 0, 7)
        );
    }

    #[test]
    fn omp_recovers_single_column_exactly() {
        let ctx = FieldContext::new(13).unwrap();
        let idx = TimeFreqIndex::new(4, 11);
        let u = gabor_vector(&ctx, idx, NormConvention::UnitNorm);
        let res = omp(&ctx, u.entries(), 1, NormConvention::UnitNorm).unwrap();
        assert_eq!(res.support, vec![idx]);
        assert!(res.residual_norm <= 1e-10);
        assert!((res.values[0] - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn omp_on_zero_returns_empty() {
        let ctx = FieldContext::new(13).unwrap();
        let b = vec![Complex64::new(0.0, 0.0); 13];
        let res = omp(&ctx, &b, 4, NormConvention::UnitNorm).unwrap();
        assert!(res.support.is_empty());
        assert_eq!(res.residual_norm, 0.0);
        assert_eq!(res.iterations, 0);
    }

    #[test]
    fn omp_requires_unit_norm() {
        let ctx = FieldContext::new(13).unwrap();
        let b = vec![Complex64::new(0.0, 0.0); 13];
        assert_eq!(
            omp(&ctx, &b, 2, NormConvention::PaperSqrtP).unwrap_err(),
            RecoveryError::ConventionMismatch
        );
    }

    #[test]
    fn omp_residuals_strictly_decrease() {
        // p = 97 keeps k = 3 well inside the reliable-recovery regime.
        let ctx = FieldContext::new(97).unwrap();
        let mut rng = task_rng(17, 0);
        let truth = random_signal(97, 3, &mut rng);
        let b = measure(&ctx, &truth, NormConvention::UnitNorm).unwrap();
        // Re-run OMP through increasing iteration caps and watch the final
        // residuals shrink to zero.
        let mut last = f64::INFINITY;
        for k in 1..=3 {
            let res = omp(&ctx, &b, k, NormConvention::UnitNorm).unwrap();
            assert!(
                res.residual_norm < last - 1e-12 || res.residual_norm <= 1e-10,
                "k = {k}: {} !< {last}",
                res.residual_norm
            );
            last = res.residual_norm;
        }
        assert!(last <= 1e-10, "exact recovery expected, residual {last}");
    }

    #[test]
    fn ista_zero_rhs_stays_zero() {
        let ctx = FieldContext::new(13).unwrap();
        let b = vec![Complex64::new(0.0, 0.0); 13];
        let res = ista_l1(&ctx, &b, 0.1, 20, NormConvention::UnitNorm).unwrap();
        assert!(res.support.is_empty());
        assert_eq!(res.residual_norm, 0.0);
    }

    #[test]
    fn ista_large_lambda_kills_everything() {
        let ctx = FieldContext::new(13).unwrap();
        let mut rng = task_rng(18, 0);
        let truth = random_signal(13, 2, &mut rng);
        let b = measure(&ctx, &truth, NormConvention::UnitNorm).unwrap();
        let corr = correlations(&ctx, &b, NormConvention::UnitNorm);
        let max_corr = corr
            .iter()
            .flat_map(|row| row.iter().map(|v| v.norm()))
            .fold(0f64, f64::max);
        let res = ista_l1(&ctx, &b, max_corr * 1.01, 30, NormConvention::UnitNorm).unwrap();
        assert!(res.support.is_empty());
    }

    #[test]
    fn ista_rejects_nonpositive_lambda() {
        let ctx = FieldContext::new(13).unwrap();
        let b = vec![Complex64::new(0.0, 0.0); 13];
        assert_eq!(
            ista_l1(&ctx, &b, 0.0, 5, NormConvention::UnitNorm).unwrap_err(),
            RecoveryError::NonPositive("lambda")
        );
    }

    #[test]
    fn frame_operator_norm_matches_tight_frame_constant() {
        // A A* = c^2 p (p-1) I: p under UnitNorm, p-1 under PaperSqrtP.
        let ctx = FieldContext::new(17).unwrap();
        let unit = frame_operator_norm_sq(&ctx, NormConvention::UnitNorm);
        assert!((unit - 17.0).abs() < 1e-9, "{unit}");
        let paper = frame_operator_norm_sq(&ctx, NormConvention::PaperSqrtP);
        assert!((paper - 16.0).abs() < 1e-9, "{paper}");
    }

    #[test]
    fn experiment_k0_always_succeeds() {
        let ctx = FieldContext::new(13).unwrap();
        let rates =
            recovery_experiment(&ctx, &[0], 5, 1, Method::Omp, NormConvention::UnitNorm).unwrap();
        assert_eq!(rates[0].rate, 1.0);
    }

    #[test]
    fn experiment_dense_signal_never_recovers() {
        let ctx = FieldContext::new(31).unwrap();
        let rates =
            recovery_experiment(&ctx, &[31], 5, 2, Method::Omp, NormConvention::UnitNorm)
                .unwrap();
        assert_eq!(rates[0].rate, 0.0);
    }

    #[test]
    fn experiment_small_sparsity_succeeds_at_p31() {
        let ctx = FieldContext::new(31).unwrap();
        let rates =
            recovery_experiment(&ctx, &[1, 2], 20, 3, Method::Omp, NormConvention::UnitNorm)
                .unwrap();
        assert_eq!(rates[0].rate, 1.0, "k=1 should always recover");
        assert!(rates[1].rate >= 0.9, "k=2 rate {}", rates[1].rate);
    }

    #[test]
    fn ista_recovers_small_support_with_debias() {
        let ctx = FieldContext::new(31).unwrap();
        let mut rng = task_rng(21, 0);
        let truth = random_signal(31, 2, &mut rng);
        let b = measure(&ctx, &truth, NormConvention::UnitNorm).unwrap();
        let res = ista_l1(&ctx, &b, 0.05, 400, NormConvention::UnitNorm).unwrap();
        let top = top_k_support(&res, 2);
        let truth_set: BTreeSet<TimeFreqIndex> = truth.support.iter().copied().collect();
        assert_eq!(top, truth_set);
        let support: Vec<TimeFreqIndex> = top.into_iter().collect();
        let coeffs = debias_on_support(&ctx, &b, &support, NormConvention::UnitNorm).unwrap();
        for (idx, c) in support.iter().zip(&coeffs) {
            let pos = truth.support.iter().position(|t| t == idx).unwrap();
            assert!((c - truth.values[pos]).norm() <= 1e-6);
        }
    }
}
