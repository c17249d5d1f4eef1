//! The sine-ratio sum over consecutive blocks, its piecewise-linear bound
//! machinery, the four-region split of that bound, per-interval main-term
//! residuals, and log-log scaling fits against p^{3/2 - alpha}.

use crate::field::{is_prime, next_prime_at_least, FieldContext};
use crate::linalg::{KahanComplex, KahanSum};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TheoremError {
    #[error("{0} is not an odd prime")]
    NotPrime(u64),
    #[error("p = {0} is too small to realize theorem-mode block sizes")]
    PTooSmall(u64),
    #[error("sigma must lie in [0, 1/2) and delta in (0, 1/2)")]
    BadExponents,
    #[error("delta must exceed sigma")]
    DeltaNotAboveSigma,
    #[error("epsilon must lie in (0, delta - sigma)")]
    BadEpsilon,
    #[error("lengths must satisfy 1 <= m1len <= m2len <= p")]
    BadLengths,
    #[error("n must be a residue in [0, p)")]
    BadModulation,
    #[error("block length {0} does not match the configured length {1}")]
    LengthMismatch(u64, u64),
    #[error("operation requires theorem-mode parameters")]
    NotTheoremMode,
    #[error("index must be nonzero (got {0})")]
    ZeroIndex(i64),
    #[error("y-interval center ytilde vanishes at j = {0}")]
    ZeroYtilde(i64),
    #[error("scaling fit needs at least 5 points")]
    InsufficientPoints,
    #[error("scaling fit values must be positive")]
    NonPositiveValue,
    #[error("scaling fit primes must be distinct")]
    DuplicatePrime,
}

/// A block of consecutive residues {start, start+1, ..., start+length-1} mod p.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConsecutiveBlock {
    pub start: u64,
    pub length: u64,
}

impl ConsecutiveBlock {
    pub fn new(start: u64, length: u64) -> Self {
        ConsecutiveBlock { start, length }
    }

    pub fn members(&self, p: u64) -> impl Iterator<Item = u64> + '_ {
        let start = self.start;
        (0..self.length).map(move |i| (start + i) % p)
    }
}

/// Scaling parameters of the block-sum estimate: n ~ p^{1/2+delta},
/// |M1| ~ p^{1/2-sigma}, alpha = sigma + (delta - sigma)/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaParams {
    pub p: u64,
    pub n: u64,
    pub m1len: u64,
    pub m2len: u64,
    pub sigma: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub theorem_mode: bool,
}

impl ThetaParams {
    /// Realize theorem-grade parameters from (p, sigma, delta):
    /// n is the nearest nonzero residue to p^{1/2+delta}, m1len the nearest
    /// even integer to p^{1/2-sigma}, and m2len the largest even multiple of
    /// m1len that stays within floor(sqrt(p)). When no even multiplier fits,
    /// m1len shrinks to floor(sqrt(p))/2 rounded to even (still within a
    /// factor 2 of the target).
    pub fn realize(p: u64, sigma: f64, delta: f64, epsilon: f64) -> Result<Self, TheoremError> {
        if p < 3 || !is_prime(p) {
            return Err(TheoremError::NotPrime(p));
        }
        if !(0.0..0.5).contains(&sigma) || !(0.0..0.5).contains(&delta) || delta == 0.0 {
            return Err(TheoremError::BadExponents);
        }
        if delta <= sigma {
            return Err(TheoremError::DeltaNotAboveSigma);
        }
        let pf = p as f64;
        let sqrt_p = (pf.sqrt()).floor() as u64;
        if sqrt_p < 4 {
            return Err(TheoremError::PTooSmall(p));
        }
        let n = (pf.powf(0.5 + delta)).round().max(1.0) as u64;
        let n = n.clamp(1, p - 1);
        let even_round = |x: f64| -> u64 { ((x / 2.0).round() as u64).max(1) * 2 };
        let mut m1len = even_round(pf.powf(0.5 - sigma));
        let mut mult = (sqrt_p / m1len) & !1;
        if mult < 2 {
            m1len = ((sqrt_p / 2) & !1).max(2);
            mult = 2;
        }
        if m1len * mult > sqrt_p {
            return Err(TheoremError::PTooSmall(p));
        }
        Ok(ThetaParams {
            p,
            n,
            m1len,
            m2len: m1len * mult,
            sigma,
            delta,
            epsilon,
            theorem_mode: true,
        })
    }

    /// Free-mode parameters with explicit n and block lengths; only basic
    /// range checks apply and no scaling hypotheses are assumed.
    pub fn free(p: u64, n: u64, m1len: u64, m2len: u64) -> Result<Self, TheoremError> {
        if p < 3 || !is_prime(p) {
            return Err(TheoremError::NotPrime(p));
        }
        if n >= p {
            return Err(TheoremError::BadModulation);
        }
        if m1len == 0 || m1len > m2len || m2len > p {
            return Err(TheoremError::BadLengths);
        }
        Ok(ThetaParams {
            p,
            n,
            m1len,
            m2len,
            sigma: 0.0,
            delta: 0.0,
            epsilon: 0.0,
            theorem_mode: false,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.sigma + (self.delta - self.sigma) / 2.0
    }
}

fn floor_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

fn ceil_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    a.div_euclid(b) + if a.rem_euclid(b) != 0 { 1 } else { 0 }
}

/// The x/y interval grid of the block-sum proof: x-interval i spans
/// [p i / m1len, p (i+1) / m1len) and y-interval j spans
/// [p j / m2len - n, p (j+1) / m2len - n).
#[derive(Debug, Clone, Copy)]
pub struct IntervalGrid {
    p: i128,
    n: i128,
    m1: i128,
    m2: i128,
}

impl IntervalGrid {
    pub fn new(params: &ThetaParams) -> Self {
        IntervalGrid {
            p: params.p as i128,
            n: params.n as i128,
            m1: params.m1len as i128,
            m2: params.m2len as i128,
        }
    }

    /// Index of the x-interval containing s.
    pub fn x_index(&self, s: i64) -> i64 {
        floor_div(self.m1 * s as i128, self.p) as i64
    }

    /// Index of the y-interval containing s.
    pub fn y_index(&self, s: i64) -> i64 {
        floor_div(self.m2 * (s as i128 + self.n), self.p) as i64
    }

    /// ytilde(j) = p j / m2len - n, the left endpoint of y-interval j.
    pub fn ytilde(&self, j: i64) -> f64 {
        (self.p * j as i128 - self.n * self.m2) as f64 / self.m2 as f64
    }

    /// t = n m2len / p, the fractional center offset of the y-grid.
    pub fn t(&self) -> f64 {
        (self.n * self.m2) as f64 / self.p as f64
    }

    /// The x-interval index that owns y-interval j, i.e. the unique i with
    /// j in [i m2/m1 + m2 n/p, (i+1) m2/m1 + m2 n/p).
    pub fn x_of_y(&self, j: i64) -> i64 {
        floor_div((j as i128 * self.p - self.n * self.m2) * self.m1, self.m2 * self.p) as i64
    }

    /// All y-interval indices owned by x-interval i (half-open window).
    pub fn y_range(&self, i: i64) -> (i64, i64) {
        let num_lo = i as i128 * self.m2 * self.p + self.n * self.m1 * self.m2;
        let num_hi = (i as i128 + 1) * self.m2 * self.p + self.n * self.m1 * self.m2;
        let den = self.m1 * self.p;
        let lo = ceil_div(num_lo, den);
        let hi = ceil_div(num_hi, den) - 1;
        (lo as i64, hi as i64)
    }

    /// Integer points s with y_index(s) = j, as an inclusive range.
    pub fn y_interval_points(&self, j: i64) -> (i64, i64) {
        let lo = ceil_div(self.p * j as i128, self.m2) - self.n;
        let hi = floor_div(self.p * (j as i128 + 1) - 1, self.m2) - self.n;
        (lo as i64, hi as i64)
    }
}

/// The piecewise-linear bound evaluators. With c = pi the ratio
/// p1u p2u / (p1l p2l) dominates the sine-ratio product pointwise
/// (|sin pi x| <= pi ||x|| and |sin pi x| >= 2 ||x||); c = 2 reproduces the
/// constants of the source decomposition but does not dominate pointwise.
#[derive(Debug, Clone, Copy)]
pub struct PiecewiseBound {
    p: i128,
    n: i128,
    m1: i128,
    m2: i128,
    pub c: f64,
}

impl PiecewiseBound {
    pub fn new(params: &ThetaParams, c: f64) -> Self {
        PiecewiseBound {
            p: params.p as i128,
            n: params.n as i128,
            m1: params.m1len as i128,
            m2: params.m2len as i128,
            c,
        }
    }

    /// ||a/p|| computed exactly in integers before the final division.
    fn dist(&self, a: i128) -> f64 {
        let r = a.rem_euclid(self.p);
        r.min(self.p - r) as f64 / self.p as f64
    }

    pub fn p1u(&self, s: i64) -> f64 {
        self.c * self.dist(self.m1 * s as i128)
    }

    pub fn p1l(&self, s: i64) -> f64 {
        self.dist(s as i128)
    }

    pub fn p2u(&self, s: i64) -> f64 {
        self.c * self.dist(self.m2 * (s as i128 + self.n))
    }

    pub fn p2l(&self, s: i64) -> f64 {
        self.dist(s as i128 + self.n)
    }

    pub fn summand(&self, s: i64) -> f64 {
        self.p1u(s) * self.p2u(s) / (self.p1l(s) * self.p2l(s))
    }
}

/// |sin(pi length t / p) / sin(pi t / p)| with the limit value `length` at
/// t = 0 mod p. Independent of the block's start.
pub fn dirichlet_kernel_mag(p: u64, block: &ConsecutiveBlock, tshift: i64) -> f64 {
    kernel_mag(p, block.length, tshift)
}

pub(crate) fn kernel_mag(p: u64, length: u64, tshift: i64) -> f64 {
    let r = tshift.rem_euclid(p as i64) as u64;
    if r == 0 {
        return length as f64;
    }
    // Reduce length * r mod p so both sine arguments stay in [0, pi).
    let a = ((length as u128 * r as u128) % p as u128) as u64;
    let num = (PI * a as f64 / p as f64).sin().abs();
    let den = (PI * r as f64 / p as f64).sin();
    num / den
}

/// sum over s != 0, -n of |D_{m1len}(s)| |D_{m2len}(s+n)| (Dirichlet kernel
/// magnitudes), the quantity bounded by O(p^{3/2 - alpha}).
pub fn sine_sum_exact(params: &ThetaParams) -> f64 {
    let p = params.p;
    let n_res = params.n % p;
    let excluded = (p - n_res) % p;
    let mut acc = KahanSum::new();
    for s in 1..p {
        if s == excluded {
            continue;
        }
        acc.add(
            kernel_mag(p, params.m1len, s as i64) * kernel_mag(p, params.m2len, (s + n_res) as i64),
        );
    }
    acc.value()
}

/// The Hoelder/Fejer bound p sqrt(m1len m2len) on the sine-ratio sum.
pub fn trivial_bound(params: &ThetaParams) -> f64 {
    params.p as f64 * ((params.m1len * params.m2len) as f64).sqrt()
}

fn chi_prefix(ctx: &FieldContext) -> Vec<i64> {
    let p = ctx.p() as usize;
    let mut prefix = vec![0i64; 2 * p + 1];
    for t in 0..2 * p {
        prefix[t + 1] = prefix[t] + ctx.chi_at((t % p) as u64) as i64;
    }
    prefix
}

/// sum_k sum_{m1 in M1} sum_{m2 in M2} chi[k+m1-m2] chi[k]
/// e^{2 pi i k n / p} e^{-2 pi i m2 n / p}, evaluated by factoring the m1 sum
/// through prefix sums of chi: O(p (m1len + m2len)) instead of the naive
/// triple loop.
pub fn gabor_triple_sum(
    ctx: &FieldContext,
    params: &ThetaParams,
    block1: &ConsecutiveBlock,
    block2: &ConsecutiveBlock,
) -> Result<Complex64, TheoremError> {
    if block1.length != params.m1len {
        return Err(TheoremError::LengthMismatch(block1.length, params.m1len));
    }
    if block2.length != params.m2len {
        return Err(TheoremError::LengthMismatch(block2.length, params.m2len));
    }
    let p = ctx.p();
    let n = params.n % p;
    let prefix = chi_prefix(ctx);
    // g(x) = sum_{m1 in M1} chi[x + m1]
    let g = |x: u64| -> f64 {
        let a = ((x + block1.start) % p) as usize;
        (prefix[a + block1.length as usize] - prefix[a]) as f64
    };
    let mut outer = KahanComplex::new();
    for m2 in block2.members(p) {
        let mut inner = KahanComplex::new();
        for k in 0..p {
            let chi_k = ctx.chi_at(k) as f64;
            if chi_k == 0.0 {
                continue;
            }
            // e^{+2 pi i k n / p}
            let w = ctx.root_prod(k, n).conj();
            inner.add(w * (chi_k * g((k + p - m2 % p) % p)));
        }
        // e^{-2 pi i m2 n / p}
        outer.add(ctx.root_prod(m2, n) * inner.value());
    }
    Ok(outer.value())
}

/// sum_{m1 in M1} sum_{m2 in M2} chi[k + m1 - m2] e^{2 pi i m2 n / p} for a
/// fixed k, with the trivial bound m1len * m2len.
pub fn fixed_k_double_sum(
    ctx: &FieldContext,
    params: &ThetaParams,
    k: u64,
    block1: &ConsecutiveBlock,
    block2: &ConsecutiveBlock,
) -> Complex64 {
    let p = ctx.p();
    let n = params.n % p;
    let prefix = chi_prefix(ctx);
    let g = |x: u64| -> f64 {
        let a = ((x + block1.start) % p) as usize;
        (prefix[a + block1.length as usize] - prefix[a]) as f64
    };
    let mut acc = KahanComplex::new();
    for m2 in block2.members(p) {
        // e^{+2 pi i m2 n / p}
        acc.add(ctx.root_prod(m2, n).conj() * g((k % p + p - m2) % p));
    }
    acc.value()
}

/// sum over s != 0, -n of p1u p2u / (p1l p2l).
pub fn piecewise_bound_sum(params: &ThetaParams, c: f64) -> f64 {
    let p = params.p;
    let n_res = params.n % p;
    let excluded = (p - n_res) % p;
    let pw = PiecewiseBound::new(params, c);
    let mut acc = KahanSum::new();
    for s in 1..p {
        if s == excluded {
            continue;
        }
        acc.add(pw.summand(s as i64));
    }
    acc.value()
}

/// The four-region split of the piecewise bound: E1 near the s = 0
/// singularity, the signed smoothed main term S, and the odd-index
/// correction sums E2 and E3. Computed literally; `discrepancy` records
/// total - (E1 + S + E2 + E3) instead of asserting the split is exact.
#[derive(Debug, Clone)]
pub struct SumDecomposition {
    pub e1: f64,
    pub s_main: f64,
    pub e2: f64,
    pub e3: f64,
    pub total_bound: f64,
    pub discrepancy: f64,
    /// (x-index i, y-index j, E_y(j)) for every main-region y-interval.
    pub residuals: Vec<(i64, i64, f64)>,
    pub residual_abs_sum: f64,
    pub e1_indices: Vec<i64>,
    pub main_indices: Vec<i64>,
}

/// Centered representative of a residue class, in [-(p-1)/2, (p-1)/2].
fn centered(s: u64, p: u64) -> i64 {
    let s = s % p;
    if s <= (p - 1) / 2 {
        s as i64
    } else {
        s as i64 - p as i64
    }
}

pub fn sum_split_decompose(params: &ThetaParams, c: f64) -> Result<SumDecomposition, TheoremError> {
    if !params.theorem_mode {
        return Err(TheoremError::NotTheoremMode);
    }
    if params.epsilon <= 0.0 || params.epsilon >= params.delta - params.sigma {
        return Err(TheoremError::BadEpsilon);
    }
    let p = params.p;
    let n_res = params.n % p;
    let excluded = (p - n_res) % p;
    let grid = IntervalGrid::new(params);
    let pw = PiecewiseBound::new(params, c);
    let pf = p as f64;
    let threshold = pf.powf(params.epsilon);
    let factor = 4.0 * pf * pf / (PI * PI);

    let mut e1 = KahanSum::new();
    let mut s_main = KahanSum::new();
    let mut e2 = KahanSum::new();
    let mut e3 = KahanSum::new();
    let mut total = KahanSum::new();
    let mut e1_indices = Vec::new();
    let mut main_indices = Vec::new();
    let mut main_js = std::collections::BTreeSet::new();

    for s_res in 1..p {
        if s_res == excluded {
            continue;
        }
        let s = centered(s_res, p);
        total.add(pw.summand(s));
        let i_x = grid.x_index(s);
        if (i_x.abs() as f64) < threshold {
            e1.add(pw.summand(s));
            e1_indices.push(s);
            continue;
        }
        main_indices.push(s);
        let j = grid.y_index(s);
        let i = grid.x_of_y(j);
        main_js.insert(j);
        // Smoothed numerators, exact in integer arithmetic before division.
        let num1 = (params.m1len as i128 * s as i128 - i as i128 * p as i128) as f64 / pf;
        let num2 = (params.m2len as i128 * (s as i128 + n_res as i128) - j as i128 * p as i128)
            as f64
            / pf;
        // Denominators stay in the raw s(s+n) form of the per-interval main
        // term; the ||.||-normalized total is tracked separately and the gap
        // lands in `discrepancy`.
        let sn = s as f64 * (s as f64 + n_res as f64);
        let sign = if (i + j).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        s_main.add(sign * factor * num1 * num2 / sn);
        if j.rem_euclid(2) == 1 {
            let sign_i = if i.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            e2.add(sign_i * factor * num1 / sn);
            if i.rem_euclid(2) == 0 {
                e3.add(factor / sn);
            }
        }
    }

    let mut residuals = Vec::new();
    let mut res_abs = KahanSum::new();
    for &j in &main_js {
        if j == 0 || (p as i128) * (j as i128) == (n_res as i128) * (params.m2len as i128) {
            continue;
        }
        let i = grid.x_of_y(j);
        let r = main_term_residual(params, i, j)?;
        res_abs.add(r.abs());
        residuals.push((i, j, r));
    }

    let e1v = e1.value();
    let sv = s_main.value();
    let e2v = e2.value();
    let e3v = e3.value();
    let totalv = total.value();
    e1_indices.sort_unstable();
    main_indices.sort_unstable();
    Ok(SumDecomposition {
        e1: e1v,
        s_main: sv,
        e2: e2v,
        e3: e3v,
        total_bound: totalv,
        discrepancy: totalv - (e1v + sv + e2v + e3v),
        residuals,
        residual_abs_sum: res_abs.value(),
        e1_indices,
        main_indices,
    })
}

/// E_y(j): the main-term sum over y-interval j minus its three-term closed
/// approximation -2 p^3 i / (pi^2 m2 ytilde^2) + 2 n p^2 i / (pi^2 ytilde^2 j)
/// + 2 p m1 / (pi^2 j).
///
/// All three terms carry 1/pi^2: combining
/// -2 p^4 i j / (n pi^2 m2^2 ytilde^2) + 2 p^2 i / (n pi^2 j) with
/// m2 ytilde = p j - n m2 gives 2 n p^2 i / (pi^2 j ytilde^2)
/// - 4 p^3 i / (pi^2 m2 ytilde^2) exactly.
pub fn main_term_residual(params: &ThetaParams, i: i64, j: i64) -> Result<f64, TheoremError> {
    let p = params.p as f64;
    let n = (params.n % params.p) as f64;
    let grid = IntervalGrid::new(params);
    if j == 0 {
        return Err(TheoremError::ZeroIndex(j));
    }
    let ytilde = grid.ytilde(j);
    if ytilde == 0.0 {
        return Err(TheoremError::ZeroYtilde(j));
    }
    let (lo, hi) = grid.y_interval_points(j);
    let m1 = params.m1len as f64;
    let m2 = params.m2len as f64;
    let factor = 4.0 * p * p / (PI * PI);
    let mut acc = KahanSum::new();
    for s in lo..=hi {
        if s == 0 || s as f64 + n == 0.0 {
            continue;
        }
        let num1 = (params.m1len as i128 * s as i128 - i as i128 * params.p as i128) as f64 / p;
        let num2 = (params.m2len as i128 * (s as i128 + (params.n % params.p) as i128)
            - j as i128 * params.p as i128) as f64
            / p;
        acc.add(factor * num1 * num2 / (s as f64 * (s as f64 + n)));
    }
    let i_f = i as f64;
    let main_expr = -2.0 * p * p * p * i_f / (PI * PI * m2 * ytilde * ytilde)
        + 2.0 * n * p * p * i_f / (PI * PI * ytilde * ytilde * j as f64)
        + 2.0 * p * m1 / (PI * PI * j as f64);
    Ok(acc.value() - main_expr)
}

/// Sine-ratio mass near the two singularities: |s| <= p^{1/2 + eps + sigma}
/// and |s + n| <= p / m2len (one y-interval removed on each side of -n, an
/// even count in total).
pub fn singular_region_sums(params: &ThetaParams) -> Result<(f64, f64), TheoremError> {
    if !params.theorem_mode {
        return Err(TheoremError::NotTheoremMode);
    }
    let p = params.p;
    let n_res = params.n % p;
    let half = ((p - 1) / 2) as i64;
    let near_zero_radius =
        ((p as f64).powf(0.5 + params.epsilon + params.sigma).floor() as i64).min(half);
    let mut near_zero = KahanSum::new();
    for s in -near_zero_radius..=near_zero_radius {
        if s == 0 || s + n_res as i64 == 0 {
            continue;
        }
        near_zero.add(
            kernel_mag(p, params.m1len, s) * kernel_mag(p, params.m2len, s + n_res as i64),
        );
    }
    let near_n_radius = ((p as f64 / params.m2len as f64).floor() as i64).max(1);
    let mut near_neg_n = KahanSum::new();
    for u in -near_n_radius..=near_n_radius {
        // u = s + n
        let s = u - n_res as i64;
        if s == 0 || u == 0 {
            continue;
        }
        near_neg_n.add(kernel_mag(p, params.m1len, s) * kernel_mag(p, params.m2len, u));
    }
    Ok((near_zero.value(), near_neg_n.value()))
}

/// Ordinary least squares of ln(value) against ln(p).
#[derive(Debug, Clone)]
pub struct ScalingFit {
    pub points: Vec<(u64, f64)>,
    pub exponent: f64,
    pub log_k: f64,
    pub r2: f64,
}

pub fn scaling_fit(points: &[(u64, f64)]) -> Result<ScalingFit, TheoremError> {
    if points.len() < 5 {
        return Err(TheoremError::InsufficientPoints);
    }
    if points.iter().any(|&(_, v)| v <= 0.0) {
        return Err(TheoremError::NonPositiveValue);
    }
    let mut ps: Vec<u64> = points.iter().map(|&(p, _)| p).collect();
    ps.sort_unstable();
    if ps.windows(2).any(|w| w[0] == w[1]) {
        return Err(TheoremError::DuplicatePrime);
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(p, _)| (p as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, v)| v.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_tot: f64 = ys.iter().map(|y| (y - ybar) * (y - ybar)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(ScalingFit {
        points: points.to_vec(),
        exponent: slope,
        log_k: intercept,
        r2,
    })
}

/// Roughly `count` primes geometrically spaced in [lo, hi].
pub fn log_spaced_primes(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    assert!(lo >= 3 && hi > lo && count >= 2);
    let llo = (lo as f64).ln();
    let lhi = (hi as f64).ln();
    let mut out = Vec::new();
    for idx in 0..count {
        let target = (llo + (lhi - llo) * idx as f64 / (count - 1) as f64).exp();
        let p = next_prime_at_least(target.ceil() as u64);
        if p <= hi && out.last() != Some(&p) {
            out.push(p);
        }
    }
    out
}
