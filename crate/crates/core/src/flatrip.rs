//! Index sets over (Z/pZ)^2, pair-sum inner products by two independent
//! routes, the flat-RIP to RIP order transfer, and sampled RIP estimates.

use crate::field::FieldContext;
use crate::gabor::{
    accumulate_scaled_vector, coherence, gram_submatrix, CoherenceMode, GaborError, NormConvention,
    TimeFreqIndex, GRAM_SUPPORT_CAP,
};
use crate::linalg::{hermitian_extreme_eigenvalues, KahanComplex, LinalgError};
use crate::seeding::task_rng;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FlatRipError {
    #[error("omega sets must be disjoint")]
    NotDisjoint,
    #[error("flat-RIP order {0} exceeds sqrt(p) = {1}")]
    OrderTooLarge(u64, u64),
    #[error("inputs must be positive")]
    NonPositiveInput,
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Gabor(#[from] GaborError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A finite set of time-frequency shifts with its fiber decomposition:
/// fibers[j] lists the l with (l, j) in the set, and the projection is the
/// sorted list of occupied frequencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaSet {
    pairs: BTreeSet<TimeFreqIndex>,
    fibers: BTreeMap<u64, Vec<u64>>,
}

impl OmegaSet {
    pub fn from_pairs(pairs: impl IntoIterator<Item = TimeFreqIndex>) -> Self {
        let pairs: BTreeSet<TimeFreqIndex> = pairs.into_iter().collect();
        let mut fibers: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for idx in &pairs {
            fibers.entry(idx.j).or_default().push(idx.l);
        }
        // BTreeSet iteration orders by (l, j); re-sort each fiber by l.
        for ls in fibers.values_mut() {
            ls.sort_unstable();
        }
        OmegaSet { pairs, fibers }
    }

    /// Build from consecutive blocks (j, start, length), wrapping mod p.
    pub fn from_blocks(p: u64, blocks: &[(u64, u64, u64)]) -> Self {
        Self::from_pairs(blocks.iter().flat_map(|&(j, start, len)| {
            (0..len).map(move |i| TimeFreqIndex::new((start + i) % p, j % p))
        }))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = TimeFreqIndex> + '_ {
        self.pairs.iter().copied()
    }

    /// pi_2(Omega): sorted occupied frequencies.
    pub fn projection(&self) -> Vec<u64> {
        self.fibers.keys().copied().collect()
    }

    /// Omega(j): sorted time shifts in fiber j.
    pub fn fiber(&self, j: u64) -> &[u64] {
        self.fibers.get(&j).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn is_disjoint(&self, other: &OmegaSet) -> bool {
        self.pairs.is_disjoint(&other.pairs)
    }

    pub fn fits_sqrt_cap(&self, p: u64) -> bool {
        (self.len() as u64).pow(2) <= p
    }
}

/// Sparsity/flat-RIP estimate report. Sampling can only under-estimate a
/// maximum, so `delta` is a lower bound on the true constant.
#[derive(Debug, Clone, PartialEq)]
pub struct RipReport {
    pub order: u64,
    pub delta: f64,
    /// |<sum, sum>| / k normalization, when the flat-RIP route produced it.
    pub relaxed_delta: Option<f64>,
    pub mu: f64,
    pub trials: u64,
    pub convention: NormConvention,
    pub sampled_lower_bound: bool,
}

/// <sum_{Omega1} u, sum_{Omega2} u> by accumulating both sum vectors.
pub fn pair_sum_inner_product_direct(
    ctx: &FieldContext,
    omega1: &OmegaSet,
    omega2: &OmegaSet,
    conv: NormConvention,
) -> Result<Complex64, FlatRipError> {
    if !omega1.is_disjoint(omega2) {
        return Err(FlatRipError::NotDisjoint);
    }
    if omega1.is_empty() || omega2.is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let p = ctx.p() as usize;
    let one = Complex64::new(1.0, 0.0);
    let mut u = vec![Complex64::new(0.0, 0.0); p];
    for idx in omega1.pairs() {
        accumulate_scaled_vector(ctx, idx, conv, one, &mut u);
    }
    let mut v = vec![Complex64::new(0.0, 0.0); p];
    for idx in omega2.pairs() {
        accumulate_scaled_vector(ctx, idx, conv, one, &mut v);
    }
    let mut acc = KahanComplex::new();
    for (a, b) in u.iter().zip(&v) {
        acc.add(a * b.conj());
    }
    Ok(acc.value())
}

/// The same inner product through the frequency-side identity: per fiber pair
/// (n1, n2) with n = n1 - n2,
///   sum_{s != 0, -n} chi[s] chi[s+n] D_{Omega1(n1)}(s) conj(D_{Omega2(n2)}(s+n))
/// where D_M(t) = sum_{m in M} e^{2 pi i m t / p}. The Gauss constant enters
/// as chi[-1]/eps_p^2, which is unity for every p; it is carried explicitly
/// so the route stays an independent check of the bookkeeping.
pub fn pair_sum_inner_product_spectral(
    ctx: &FieldContext,
    omega1: &OmegaSet,
    omega2: &OmegaSet,
    conv: NormConvention,
) -> Result<Complex64, FlatRipError> {
    if !omega1.is_disjoint(omega2) {
        return Err(FlatRipError::NotDisjoint);
    }
    if omega1.is_empty() || omega2.is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let p = ctx.p();
    let eps = ctx.gauss_epsilon();
    let phase = Complex64::new(ctx.chi(-1) as f64, 0.0) / (eps * eps);

    // D_M(t) tables over all t, one per occupied fiber.
    let d_table = |omega: &OmegaSet| -> BTreeMap<u64, Vec<Complex64>> {
        omega
            .projection()
            .into_iter()
            .map(|j| {
                let fiber = omega.fiber(j);
                let col = (0..p)
                    .map(|t| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for &m in fiber {
                            acc += ctx.root_prod(m, t).conj();
                        }
                        acc
                    })
                    .collect();
                (j, col)
            })
            .collect()
    };
    let d1 = d_table(omega1);
    let d2 = d_table(omega2);

    let mut acc = KahanComplex::new();
    for (&n1, col1) in &d1 {
        for (&n2, col2) in &d2 {
            let n = (n1 + p - n2) % p;
            let mut fiber_acc = KahanComplex::new();
            for s in 0..p {
                let chi = (ctx.chi_at(s) * ctx.chi_at((s + n) % p)) as f64;
                if chi == 0.0 {
                    continue;
                }
                let t = ((s + n) % p) as usize;
                fiber_acc.add(col1[s as usize] * col2[t].conj() * chi);
            }
            acc.add(fiber_acc.value());
        }
    }
    let scale = conv.scale(p);
    Ok(acc.value() * phase * (scale * scale))
}

/// How flat-RIP trial pairs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSampler {
    /// Each Omega is one to three consecutive-block fibers with random
    /// frequencies, starts, and sizes summing to k; pairs are resampled
    /// until disjoint.
    ConsecutiveBlocks,
    /// Every disjoint singleton pair; reduces flat RIP to coherence at k = 1.
    ExhaustiveSingletons,
}

fn sample_consecutive_omega(p: u64, k: u64, rng: &mut impl Rng) -> OmegaSet {
    let max_fibers = k.min(3);
    let nf = rng.gen_range(1..=max_fibers);
    let mut sizes = Vec::with_capacity(nf as usize);
    let mut remaining = k;
    for i in 0..nf {
        let left = nf - 1 - i;
        let size = if left == 0 {
            remaining
        } else {
            rng.gen_range(1..=remaining - left)
        };
        sizes.push(size);
        remaining -= size;
    }
    let mut js = BTreeSet::new();
    while js.len() < nf as usize {
        js.insert(rng.gen_range(0..p));
    }
    let blocks: Vec<(u64, u64, u64)> = js
        .into_iter()
        .zip(sizes)
        .map(|(j, len)| (j, rng.gen_range(0..p), len))
        .collect();
    OmegaSet::from_blocks(p, &blocks)
}

/// Sampled flat-RIP constant: max over disjoint pairs of
/// |<sum, sum>| / sqrt(|Omega1| |Omega2|), with the relaxed |<sum, sum>| / k
/// normalization reported alongside.
pub fn flat_rip_delta(
    ctx: &FieldContext,
    k: u64,
    sampler: PairSampler,
    trials: u64,
    conv: NormConvention,
    seed: u64,
) -> Result<RipReport, FlatRipError> {
    let p = ctx.p();
    let sqrt_p = (p as f64).sqrt().floor() as u64;
    if k == 0 {
        return Err(FlatRipError::NonPositiveInput);
    }
    if k > sqrt_p {
        return Err(FlatRipError::OrderTooLarge(k, sqrt_p));
    }
    let (delta, relaxed, trials_run) = match sampler {
        PairSampler::ExhaustiveSingletons => {
            let indices: Vec<TimeFreqIndex> = (0..p)
                .flat_map(|l| (0..p).map(move |j| TimeFreqIndex::new(l, j)))
                .collect();
            let worst = (0..indices.len())
                .into_par_iter()
                .map(|a| {
                    let mut local = 0f64;
                    for b in a + 1..indices.len() {
                        let o1 = OmegaSet::from_pairs([indices[a]]);
                        let o2 = OmegaSet::from_pairs([indices[b]]);
                        let ip = pair_sum_inner_product_direct(ctx, &o1, &o2, conv).unwrap();
                        local = local.max(ip.norm());
                    }
                    local
                })
                .collect::<Vec<f64>>()
                .into_iter()
                .fold(0f64, f64::max);
            let pairs = (indices.len() * (indices.len() - 1) / 2) as u64;
            (worst, worst, pairs)
        }
        PairSampler::ConsecutiveBlocks => {
            if trials == 0 {
                return Err(FlatRipError::NoTrials);
            }
            let per_trial: Vec<(f64, f64)> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = task_rng(seed, t);
                    let o1 = sample_consecutive_omega(p, k, &mut rng);
                    let o2 = loop {
                        let cand = sample_consecutive_omega(p, k, &mut rng);
                        if cand.is_disjoint(&o1) {
                            break cand;
                        }
                    };
                    let ip = pair_sum_inner_product_direct(ctx, &o1, &o2, conv)
                        .expect("sampler produced disjoint sets");
                    let norm = ip.norm();
                    let geo = ((o1.len() * o2.len()) as f64).sqrt();
                    (norm / geo, norm / k as f64)
                })
                .collect();
            let delta = per_trial.iter().map(|&(d, _)| d).fold(0f64, f64::max);
            let relaxed = per_trial.iter().map(|&(_, r)| r).fold(0f64, f64::max);
            (delta, relaxed, trials)
        }
    };
    let mu = coherence(ctx, conv, CoherenceMode::ShiftClass)?;
    Ok(RipReport {
        order: k,
        delta,
        relaxed_delta: Some(relaxed),
        mu,
        trials: trials_run,
        convention: conv,
        sampled_lower_bound: true,
    })
}

/// Order transfer: flat RIP of order k with constant delta (relaxed form)
/// plus mu <= 1/k yields RIP of order (2 s k, 44 s delta ln k). The log is
/// natural; callers surface that choice in their output.
pub fn rip_order_from_flat(k: u64, delta: f64, s: u64) -> Result<(u64, f64), FlatRipError> {
    if k == 0 || s == 0 || delta < 0.0 {
        return Err(FlatRipError::NonPositiveInput);
    }
    Ok((2 * s * k, 44.0 * s as f64 * delta * (k as f64).ln()))
}

/// Whether the order-transfer hypotheses hold for these inputs.
pub fn transfer_hypotheses_met(k: u64, mu: f64) -> (bool, bool) {
    (k >= 1 << 10, mu <= 1.0 / k as f64)
}

/// Sampled RIP constant of order `s_order`: max over uniformly drawn
/// supports of the Gram spectrum's deviation from 1.
pub fn rip_delta_sampled(
    ctx: &FieldContext,
    s_order: usize,
    trials: u64,
    conv: NormConvention,
    seed: u64,
) -> Result<RipReport, FlatRipError> {
    if s_order == 0 || trials == 0 {
        return Err(FlatRipError::NonPositiveInput);
    }
    if s_order > GRAM_SUPPORT_CAP {
        return Err(FlatRipError::Gabor(GaborError::SupportTooLarge(
            s_order,
            GRAM_SUPPORT_CAP,
        )));
    }
    let p = ctx.p();
    let delta = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = task_rng(seed, t);
            let mut support = BTreeSet::new();
            while support.len() < s_order {
                support.insert(TimeFreqIndex::new(rng.gen_range(0..p), rng.gen_range(0..p)));
            }
            let support: Vec<TimeFreqIndex> = support.into_iter().collect();
            let g = gram_submatrix(ctx, &support, conv).expect("distinct support");
            let (lo, hi) = hermitian_extreme_eigenvalues(&g).expect("gram is hermitian");
            (hi - 1.0).max(1.0 - lo)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0f64, f64::max);
    let mu = coherence(ctx, conv, CoherenceMode::ShiftClass)?;
    Ok(RipReport {
        order: s_order as u64,
        delta,
        relaxed_delta: None,
        mu,
        trials,
        convention: conv,
        sampled_lower_bound: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor::gabor_vector;

    #[test]
    fn omega_fibers_consistent_with_pairs() {
        let pairs = [
            TimeFreqIndex::new(3, 1),
            TimeFreqIndex::new(0, 1),
            TimeFreqIndex::new(2, 4),
        ];
        let o = OmegaSet::from_pairs(pairs);
        assert_eq!(o.len(), 3);
        assert_eq!(o.projection(), vec![1, 4]);
        assert_eq!(o.fiber(1), &[0, 3]);
        assert_eq!(o.fiber(4), &[2]);
        assert_eq!(o.fiber(2), &[] as &[u64]);
        // Rebuild from pairs and compare.
        let rebuilt = OmegaSet::from_pairs(o.pairs());
        assert_eq!(o, rebuilt);
    }

    #[test]
    fn omega_blocks_wrap() {
        let o = OmegaSet::from_blocks(7, &[(2, 5, 4)]);
        assert_eq!(o.fiber(2), &[0, 1, 5, 6]);
        assert!(o.fits_sqrt_cap(49));
        assert!(!o.fits_sqrt_cap(11));
    }

    #[test]
    fn direct_empty_is_zero() {
        let ctx = FieldContext::new(7).unwrap();
        let o1 = OmegaSet::from_pairs([TimeFreqIndex::new(0, 0)]);
        let o2 = OmegaSet::from_pairs([]);
        let v = pair_sum_inner_product_direct(&ctx, &o1, &o2, NormConvention::PaperSqrtP).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn direct_singletons_match_character_sum() {
        let ctx = FieldContext::new(7).unwrap();
        let o1 = OmegaSet::from_pairs([TimeFreqIndex::new(0, 0)]);
        let o2 = OmegaSet::from_pairs([TimeFreqIndex::new(1, 0)]);
        let v = pair_sum_inner_product_direct(&ctx, &o1, &o2, NormConvention::PaperSqrtP).unwrap();
        let mut oracle = 0i64;
        for k in 0..7i64 {
            oracle += (ctx.chi(k) * ctx.chi(k - 1)) as i64;
        }
        assert!((v - Complex64::new(oracle as f64 / 7.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn overlapping_sets_are_rejected() {
        let ctx = FieldContext::new(7).unwrap();
        let o = OmegaSet::from_pairs([TimeFreqIndex::new(2, 3)]);
        assert_eq!(
            pair_sum_inner_product_direct(&ctx, &o, &o, NormConvention::UnitNorm).unwrap_err(),
            FlatRipError::NotDisjoint
        );
        assert_eq!(
            pair_sum_inner_product_spectral(&ctx, &o, &o, NormConvention::UnitNorm).unwrap_err(),
            FlatRipError::NotDisjoint
        );
    }

    #[test]
    fn spectral_matches_direct_on_singletons() {
        let ctx = FieldContext::new(7).unwrap();
        let o1 = OmegaSet::from_pairs([TimeFreqIndex::new(0, 0)]);
        let o2 = OmegaSet::from_pairs([TimeFreqIndex::new(1, 3)]);
        for conv in [NormConvention::PaperSqrtP, NormConvention::UnitNorm] {
            let d = pair_sum_inner_product_direct(&ctx, &o1, &o2, conv).unwrap();
            let s = pair_sum_inner_product_spectral(&ctx, &o1, &o2, conv).unwrap();
            assert!((d - s).norm() <= 1e-12, "{d} vs {s}");
        }
    }

    #[test]
    fn spectral_matches_direct_on_random_consecutive_sets() {
        let ctx = FieldContext::new(31).unwrap();
        for t in 0..10 {
            let mut rng = task_rng(99, t);
            let o1 = sample_consecutive_omega(31, 5, &mut rng);
            let o2 = loop {
                let cand = sample_consecutive_omega(31, 5, &mut rng);
                if cand.is_disjoint(&o1) {
                    break cand;
                }
            };
            let d =
                pair_sum_inner_product_direct(&ctx, &o1, &o2, NormConvention::PaperSqrtP).unwrap();
            let s = pair_sum_inner_product_spectral(&ctx, &o1, &o2, NormConvention::PaperSqrtP)
                .unwrap();
            let scale = d.norm().max(1e-12);
            assert!((d - s).norm() / scale <= 1e-8, "trial {t}: {d} vs {s}");
        }
    }

    #[test]
    fn flat_rip_exhaustive_singletons_equals_coherence() {
        for p in [5u64, 7, 11, 13] {
            let ctx = FieldContext::new(p).unwrap();
            let conv = NormConvention::UnitNorm;
            let report =
                flat_rip_delta(&ctx, 1, PairSampler::ExhaustiveSingletons, 0, conv, 0).unwrap();
            let mu = coherence(&ctx, conv, CoherenceMode::Brute).unwrap();
            assert!((report.delta - mu).abs() <= 1e-12, "p = {p}");
            let pairs = p * p;
            assert_eq!(report.trials, pairs * (pairs - 1) / 2);
        }
    }

    #[test]
    fn flat_rip_sampled_reproducible() {
        let ctx = FieldContext::new(101).unwrap();
        let a = flat_rip_delta(
            &ctx,
            10,
            PairSampler::ConsecutiveBlocks,
            200,
            NormConvention::UnitNorm,
            7,
        )
        .unwrap();
        let b = flat_rip_delta(
            &ctx,
            10,
            PairSampler::ConsecutiveBlocks,
            200,
            NormConvention::UnitNorm,
            7,
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(a.delta >= 0.0 && a.delta.is_finite());
        assert!(a.relaxed_delta.unwrap() <= a.delta + 1e-15);
        assert_eq!(a.trials, 200);
    }

    #[test]
    fn flat_rip_order_cap() {
        let ctx = FieldContext::new(31).unwrap();
        assert_eq!(
            flat_rip_delta(
                &ctx,
                6,
                PairSampler::ConsecutiveBlocks,
                10,
                NormConvention::UnitNorm,
                0
            )
            .unwrap_err(),
            FlatRipError::OrderTooLarge(6, 5)
        );
    }

    #[test]
    fn rip_order_arithmetic() {
        let (order, delta) = rip_order_from_flat(1024, 0.01, 1).unwrap();
        assert_eq!(order, 2048);
        assert!((delta - 44.0 * 0.01 * 1024f64.ln()).abs() < 1e-12);
        let (order, delta) = rip_order_from_flat(1024, 0.0, 3).unwrap();
        assert_eq!(order, 6144);
        assert_eq!(delta, 0.0);
        let (order, _) = rip_order_from_flat(1024, 0.5, 2).unwrap();
        assert_eq!(order, 4096);
        assert_eq!(
            rip_order_from_flat(0, 0.1, 1).unwrap_err(),
            FlatRipError::NonPositiveInput
        );
    }

    #[test]
    fn rip_delta_singletons() {
        let ctx = FieldContext::new(13).unwrap();
        let unit = rip_delta_sampled(&ctx, 1, 20, NormConvention::UnitNorm, 3).unwrap();
        assert!(unit.delta.abs() <= 1e-12);
        let paper = rip_delta_sampled(&ctx, 1, 20, NormConvention::PaperSqrtP, 3).unwrap();
        assert!((paper.delta - 1.0 / 13.0).abs() <= 1e-12);
        assert!(unit.sampled_lower_bound);
    }

    #[test]
    fn rip_delta_pairs_exhaustive_p5_equals_coherence() {
        let ctx = FieldContext::new(5).unwrap();
        let conv = NormConvention::UnitNorm;
        let indices: Vec<TimeFreqIndex> = (0..5)
            .flat_map(|l| (0..5).map(move |j| TimeFreqIndex::new(l, j)))
            .collect();
        let mut worst = 0f64;
        for a in 0..indices.len() {
            for b in a + 1..indices.len() {
                let g = gram_submatrix(&ctx, &[indices[a], indices[b]], conv).unwrap();
                let (lo, hi) = hermitian_extreme_eigenvalues(&g).unwrap();
                worst = worst.max((hi - 1.0).max(1.0 - lo));
                // 2x2 spectrum is 1 +- |mu_pair|.
                let mu_pair = g.get(0, 1).norm();
                assert!((hi - (1.0 + mu_pair)).abs() < 1e-12);
                assert!((lo - (1.0 - mu_pair)).abs() < 1e-12);
            }
        }
        let mu = coherence(&ctx, conv, CoherenceMode::Brute).unwrap();
        assert!((worst - mu).abs() <= 1e-12);
    }

    #[test]
    fn rip_delta_monotone_in_trials() {
        let ctx = FieldContext::new(31).unwrap();
        let a = rip_delta_sampled(&ctx, 4, 30, NormConvention::UnitNorm, 11).unwrap();
        let b = rip_delta_sampled(&ctx, 4, 60, NormConvention::UnitNorm, 11).unwrap();
        assert!(a.delta <= b.delta + 1e-15);
    }

    #[test]
    fn sampled_grams_are_positive_semidefinite() {
        let ctx = FieldContext::new(17).unwrap();
        for t in 0..10u64 {
            let mut rng = task_rng(5, t);
            let mut support = BTreeSet::new();
            while support.len() < 6 {
                support.insert(TimeFreqIndex::new(rng.gen_range(0..17), rng.gen_range(0..17)));
            }
            let support: Vec<TimeFreqIndex> = support.into_iter().collect();
            let conv = NormConvention::UnitNorm;
            let g = gram_submatrix(&ctx, &support, conv).unwrap();
            let (lo, hi) = hermitian_extreme_eigenvalues(&g).unwrap();
            let max_col = gabor_vector(&ctx, support[0], conv).norm().powi(2);
            assert!(lo >= -1e-10);
            assert!(hi <= 6.0 * max_col + 1e-10);
        }
    }
}
