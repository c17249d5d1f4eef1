//! The Gabor system of Legendre symbols: u_{l,j}[k] = c chi[k-l] e^{-2 pi i k j / p}.
//!
//! Two normalizations coexist. `PaperSqrtP` uses c = 1/sqrt(p), which
//! reproduces every formula verbatim but leaves column norm^2 = (p-1)/p
//! because chi[0] = 0. `UnitNorm` rescales to exact unit columns, which the
//! flat-RIP and recovery definitions assume.

use crate::field::FieldContext;
use crate::linalg::{CMatrix, KahanComplex};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GaborError {
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("support contains a duplicate index")]
    DuplicateIndex,
    #[error("support of {0} exceeds the Gram cap of {1}")]
    SupportTooLarge(usize, usize),
    #[error("brute-force coherence is limited to p <= {0}")]
    BruteBudgetExceeded(u64),
}

/// A time shift l and frequency shift j, both residues mod p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeFreqIndex {
    pub l: u64,
    pub j: u64,
}

impl TimeFreqIndex {
    pub fn new(l: u64, j: u64) -> Self {
        TimeFreqIndex { l, j }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormConvention {
    /// Entries scaled by 1/sqrt(p); column norm^2 = (p-1)/p.
    PaperSqrtP,
    /// Entries scaled by 1/sqrt(p-1); exact unit columns.
    UnitNorm,
}

impl NormConvention {
    pub fn scale(self, p: u64) -> f64 {
        match self {
            NormConvention::PaperSqrtP => 1.0 / (p as f64).sqrt(),
            NormConvention::UnitNorm => 1.0 / ((p - 1) as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GaborVector {
    entries: Vec<Complex64>,
}

impl GaborVector {
    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        let mut acc = crate::linalg::KahanSum::new();
        for e in &self.entries {
            acc.add(e.norm_sqr());
        }
        acc.value().sqrt()
    }
}

pub const GRAM_SUPPORT_CAP: usize = 256;
pub const COHERENCE_BRUTE_CAP: u64 = 31;

pub fn gabor_vector(ctx: &FieldContext, idx: TimeFreqIndex, conv: NormConvention) -> GaborVector {
    let p = ctx.p();
    let c = conv.scale(p);
    let entries = (0..p)
        .map(|k| {
            let chi = ctx.chi(k as i64 - idx.l as i64) as f64;
            ctx.root_prod(k, idx.j) * (c * chi)
        })
        .collect();
    GaborVector { entries }
}

/// <u, v> = sum_k u[k] conj(v[k]), compensated.
pub fn inner_product(u: &GaborVector, v: &GaborVector) -> Result<Complex64, GaborError> {
    if u.entries.len() != v.entries.len() {
        return Err(GaborError::LengthMismatch(u.entries.len(), v.entries.len()));
    }
    let mut acc = KahanComplex::new();
    for (a, b) in u.entries.iter().zip(&v.entries) {
        acc.add(a * b.conj());
    }
    Ok(acc.value())
}

/// |<u_{l1,j1}, u_{l2,j2}>| depends only on the difference class
/// (dl, dj) = (l2 - l1, j2 - j1); this evaluates one class in O(p).
pub fn class_inner_modulus(ctx: &FieldContext, dl: u64, dj: u64, conv: NormConvention) -> f64 {
    let p = ctx.p();
    let c = conv.scale(p);
    let mut acc = KahanComplex::new();
    for k in 0..p {
        let prod = (ctx.chi_at(k) * ctx.chi_at((k + dl) % p)) as f64;
        if prod != 0.0 {
            // e^{+2 pi i k dj / p}
            acc.add(ctx.root_prod(k, dj).conj() * prod);
        }
    }
    acc.value().norm() * c * c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherenceMode {
    Brute,
    ShiftClass,
}

/// Maximum |<u_a, u_b>| over distinct index pairs.
pub fn coherence(
    ctx: &FieldContext,
    conv: NormConvention,
    mode: CoherenceMode,
) -> Result<f64, GaborError> {
    let p = ctx.p();
    match mode {
        CoherenceMode::Brute => {
            if p > COHERENCE_BRUTE_CAP {
                return Err(GaborError::BruteBudgetExceeded(COHERENCE_BRUTE_CAP));
            }
            let all: Vec<GaborVector> = (0..p)
                .flat_map(|l| (0..p).map(move |j| TimeFreqIndex::new(l, j)))
                .map(|idx| gabor_vector(ctx, idx, conv))
                .collect();
            let mut best = 0f64;
            for a in 0..all.len() {
                for b in a + 1..all.len() {
                    let v = inner_product(&all[a], &all[b]).unwrap().norm();
                    if v > best {
                        best = v;
                    }
                }
            }
            Ok(best)
        }
        CoherenceMode::ShiftClass => {
            let best = (0..p)
                .into_par_iter()
                .map(|dl| {
                    let mut local = 0f64;
                    for dj in 0..p {
                        if dl == 0 && dj == 0 {
                            continue;
                        }
                        let v = class_inner_modulus(ctx, dl, dj, conv);
                        if v > local {
                            local = v;
                        }
                    }
                    local
                })
                .collect::<Vec<f64>>()
                .into_iter()
                .fold(0f64, f64::max);
            Ok(best)
        }
    }
}

/// Gram matrix G[a][b] = <u_a, u_b> over a distinct support.
pub fn gram_submatrix(
    ctx: &FieldContext,
    support: &[TimeFreqIndex],
    conv: NormConvention,
) -> Result<CMatrix, GaborError> {
    let n = support.len();
    if n > GRAM_SUPPORT_CAP {
        return Err(GaborError::SupportTooLarge(n, GRAM_SUPPORT_CAP));
    }
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(GaborError::DuplicateIndex);
    }
    let vectors: Vec<GaborVector> = support
        .iter()
        .map(|&idx| gabor_vector(ctx, idx, conv))
        .collect();
    let mut g = CMatrix::zeros(n);
    for a in 0..n {
        for b in a..n {
            let v = inner_product(&vectors[a], &vectors[b]).unwrap();
            g.set(a, b, v);
            g.set(b, a, v.conj());
        }
    }
    Ok(g)
}

/// b += coeff * u_{l,j}, streamed without materializing the vector.
pub fn accumulate_scaled_vector(
    ctx: &FieldContext,
    idx: TimeFreqIndex,
    conv: NormConvention,
    coeff: Complex64,
    out: &mut [Complex64],
) {
    let p = ctx.p();
    debug_assert_eq!(out.len(), p as usize);
    let c = conv.scale(p);
    for k in 0..p {
        let chi = ctx.chi(k as i64 - idx.l as i64) as f64;
        if chi != 0.0 {
            out[k as usize] += ctx.root_prod(k, idx.j) * (c * chi) * coeff;
        }
    }
}
