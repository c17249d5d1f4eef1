//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see the report.

use legendre_gabor::charsums::{twisted_autocorrelation, weil_product_sum};
use legendre_gabor::config::parse_config;
use legendre_gabor::driver;
use legendre_gabor::field::{is_prime, FieldContext};
use legendre_gabor::flatrip::{
    pair_sum_inner_product_direct, pair_sum_inner_product_spectral, rip_delta_sampled,
    rip_order_from_flat, OmegaSet,
};
use legendre_gabor::gabor::{
    coherence, gram_submatrix, CoherenceMode, NormConvention, TimeFreqIndex,
};
use legendre_gabor::linalg::hermitian_extreme_eigenvalues;
use legendre_gabor::recovery::{recovery_experiment, Method};
use legendre_gabor::seeding::task_rng;
use legendre_gabor::theorem::{
    dirichlet_kernel_mag, log_spaced_primes, scaling_fit, sine_sum_exact, singular_region_sums,
    trivial_bound, ConsecutiveBlock, ThetaParams,
};
use num_complex::Complex64;
use rand::Rng;
use std::collections::BTreeSet;

fn report(number: u32, outcome: bool, description: &str) {
    let tag = if outcome { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {number:02}: {description}");
    assert!(outcome, "criterion {number} failed: {description}");
}

fn primes_upto(n: u64) -> Vec<u64> {
    (3..=n).filter(|&p| is_prime(p)).collect()
}

#[test]
fn criterion_01_dirichlet_kernel_identity() {
    let mut ok = true;
    for p in primes_upto(101).into_iter().filter(|&p| p >= 7) {
        for length in 1..=p {
            let block = ConsecutiveBlock::new(0, length);
            for t in 0..p as i64 {
                let fast = dirichlet_kernel_mag(p, &block, t);
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..length {
                    let ang = 2.0 * std::f64::consts::PI * (m as f64) * (t as f64) / p as f64;
                    acc += Complex64::new(ang.cos(), ang.sin());
                }
                if (fast - acc.norm()).abs() > 1e-9 * length as f64 {
                    ok = false;
                }
            }
        }
    }
    report(
        1,
        ok,
        "kernel ratio equals the direct exponential sum for p in 7..101, all lengths and shifts",
    );
}

#[test]
fn criterion_02_weil_twisted_bound_exhaustive() {
    use rayon::prelude::*;
    let violations: usize = primes_upto(199)
        .into_par_iter()
        .map(|p| {
            let ctx = FieldContext::new(p).expect("prime");
            let mut bad = 0usize;
            for m in 1..p {
                for n in 1..p {
                    if !twisted_autocorrelation(&ctx, m, n).holds {
                        bad += 1;
                    }
                }
            }
            bad
        })
        .sum();
    report(
        2,
        violations == 0,
        "twisted autocorrelation obeys 2 sqrt(p) for all primes <= 199 and all m, n != 0",
    );
}

#[test]
fn criterion_03_weil_product_bound_sweep() {
    let mut ok = true;
    for (i, p) in primes_upto(199).into_iter().enumerate() {
        let mut rng = task_rng(2024, i as u64);
        for _ in 0..500 {
            let k = rng.gen_range(1..=4usize).min((p - 1) as usize);
            let mut shifts = BTreeSet::new();
            while shifts.len() < k {
                shifts.insert(rng.gen_range(1..p));
            }
            let shifts: Vec<u64> = shifts.into_iter().collect();
            if !weil_product_sum(&FieldContext::new(p).expect("prime"), &shifts)
                .expect("valid shifts")
                .holds
            {
                ok = false;
            }
        }
    }
    report(
        3,
        ok,
        "product character sums obey 9 k sqrt(p) over 500 random tuples per prime <= 199",
    );
}

#[test]
fn criterion_04_coherence_agreement_and_bound() {
    let mut ok = true;
    for p in [5u64, 7, 11, 13] {
        let ctx = FieldContext::new(p).expect("prime");
        let b = coherence(&ctx, NormConvention::PaperSqrtP, CoherenceMode::Brute).expect("brute");
        let s = coherence(&ctx, NormConvention::PaperSqrtP, CoherenceMode::ShiftClass)
            .expect("class");
        if (b - s).abs() > 1e-10 {
            ok = false;
        }
    }
    for p in primes_upto(101) {
        let ctx = FieldContext::new(p).expect("prime");
        let mu = coherence(&ctx, NormConvention::PaperSqrtP, CoherenceMode::ShiftClass)
            .expect("class");
        if mu > 2.0 / (p as f64).sqrt() + 1e-12 {
            ok = false;
        }
    }
    report(
        4,
        ok,
        "shift-class coherence matches brute force and stays below 2/sqrt(p) for p <= 101",
    );
}

#[test]
fn criterion_05_dual_path_flat_rip() {
    let mut ok = true;
    for (ci, &p) in [31u64, 61, 101].iter().enumerate() {
        let ctx = FieldContext::new(p).expect("prime");
        for t in 0..100u64 {
            let mut rng = task_rng(31_000 + ci as u64, t);
            let sample = |rng: &mut rand_chacha::ChaCha8Rng| {
                let nf = rng.gen_range(1..=3u64);
                let blocks: Vec<(u64, u64, u64)> = (0..nf)
                    .map(|_| (rng.gen_range(0..p), rng.gen_range(0..p), rng.gen_range(1..=3)))
                    .collect();
                OmegaSet::from_blocks(p, &blocks)
            };
            let o1 = sample(&mut rng);
            let o2 = loop {
                let cand = sample(&mut rng);
                if cand.is_disjoint(&o1) {
                    break cand;
                }
            };
            let d = pair_sum_inner_product_direct(&ctx, &o1, &o2, NormConvention::PaperSqrtP)
                .expect("disjoint");
            let s = pair_sum_inner_product_spectral(&ctx, &o1, &o2, NormConvention::PaperSqrtP)
                .expect("disjoint");
            if (d - s).norm() > 1e-8 * d.norm().max(1e-12) {
                ok = false;
            }
        }
    }
    report(
        5,
        ok,
        "spectral and direct pair-sum inner products agree on 100 pairs at p in {31, 61, 101}",
    );
}

#[test]
fn criterion_06_trivial_bound_dominates() {
    let mut rng = task_rng(55, 0);
    let mut ok = true;
    for _ in 0..200 {
        let p = legendre_gabor::field::next_prime_at_least(rng.gen_range(10..10_000u64));
        let sqrt_p = (p as f64).sqrt().floor().max(1.0) as u64;
        let m1 = rng.gen_range(1..=sqrt_p);
        let m2 = rng.gen_range(m1..=sqrt_p);
        let n = rng.gen_range(0..p);
        let params = ThetaParams::free(p, n, m1, m2).expect("free params");
        if sine_sum_exact(&params) > trivial_bound(&params) * (1.0 + 1e-9) {
            ok = false;
        }
    }
    report(
        6,
        ok,
        "sine-ratio sum never exceeds p sqrt(m1len m2len) over 200 random parameter sets",
    );
}

fn sweep_exponent(sigma: f64, delta: f64) -> (f64, f64) {
    let primes = log_spaced_primes(1_000, 300_000, 20);
    let points: Vec<(u64, f64)> = primes
        .into_iter()
        .map(|p| {
            let params = ThetaParams::realize(p, sigma, delta, 0.1).expect("realizable");
            (p, sine_sum_exact(&params))
        })
        .collect();
    let fit = scaling_fit(&points).expect("enough points");
    (fit.exponent, fit.r2)
}

#[test]
fn criterion_07_sine_sum_scaling_exponent() {
    let (e1, r1) = sweep_exponent(0.1, 0.3);
    let ok1 = e1 <= 1.40 && r1 >= 0.9;
    let (e2, r2) = sweep_exponent(0.0, 0.2);
    let ok2 = e2 <= 1.50 && r2 >= 0.9;
    report(
        7,
        ok1 && ok2,
        &format!(
            "fitted exponents: {e1:.4} <= 1.40 (r2 {r1:.4}) at (0.1, 0.3); {e2:.4} <= 1.50 (r2 {r2:.4}) at (0, 0.2)"
        ),
    );
}

#[test]
fn criterion_08_singular_region_scaling() {
    let (sigma, delta, epsilon) = (0.1, 0.3, 0.1);
    let primes = log_spaced_primes(1_000, 300_000, 20);
    let mut near_zero_points = Vec::new();
    let mut near_n_points = Vec::new();
    for p in primes {
        let params = ThetaParams::realize(p, sigma, delta, epsilon).expect("realizable");
        let (nz, nn) = singular_region_sums(&params).expect("theorem mode");
        near_zero_points.push((p, nz));
        near_n_points.push((p, nn));
    }
    let target = 1.5 - delta + epsilon + 0.15;
    let fit_zero = scaling_fit(&near_zero_points).expect("positive sums");
    let fit_n = scaling_fit(&near_n_points).expect("positive sums");
    let ok = fit_zero.exponent <= target && fit_n.exponent <= target;
    report(
        8,
        ok,
        &format!(
            "singular-region exponents {:.4} and {:.4} stay below {target:.2}",
            fit_zero.exponent, fit_n.exponent
        ),
    );
}

#[test]
fn criterion_09_degenerate_sine_sum() {
    let mut ok = true;
    for p in log_spaced_primes(1_000, 300_000, 20) {
        let params = ThetaParams::free(p, 32 % p, 1, 1).expect("free params");
        if (sine_sum_exact(&params) - (p - 2) as f64).abs() > 1e-9 * p as f64 {
            ok = false;
        }
    }
    report(9, ok, "sine sum equals p - 2 exactly when both blocks are singletons");
}

#[test]
fn criterion_10_lemma_order_transfer_arithmetic() {
    let (order, delta) = rip_order_from_flat(1024, 0.01, 1).expect("positive inputs");
    let expected = 44.0 * 0.01 * 1024f64.ln();
    let ok = order == 2048 && (delta - expected).abs() <= 1e-12;
    report(
        10,
        ok,
        "rip_order_from_flat(1024, 0.01, 1) = (2048, 44 * 0.01 * ln 1024), natural log flagged",
    );
}

#[test]
fn criterion_11_rip_degenerate_cases() {
    let ctx = FieldContext::new(13).expect("prime");
    let unit = rip_delta_sampled(&ctx, 1, 30, NormConvention::UnitNorm, 5).expect("sampled");
    let paper = rip_delta_sampled(&ctx, 1, 30, NormConvention::PaperSqrtP, 5).expect("sampled");
    let mut ok = unit.delta.abs() <= 1e-12 && (paper.delta - 1.0 / 13.0).abs() <= 1e-12;
    // Every distinct pair's 2x2 Gram spectrum is 1 +- |mu_pair|.
    let mut rng = task_rng(6, 0);
    for _ in 0..50 {
        let a = TimeFreqIndex::new(rng.gen_range(0..13), rng.gen_range(0..13));
        let b = loop {
            let c = TimeFreqIndex::new(rng.gen_range(0..13), rng.gen_range(0..13));
            if c != a {
                break c;
            }
        };
        let g = gram_submatrix(&ctx, &[a, b], NormConvention::UnitNorm).expect("distinct");
        let (lo, hi) = hermitian_extreme_eigenvalues(&g).expect("hermitian");
        let mu = g.get(0, 1).norm();
        if (hi - (1.0 + mu)).abs() > 1e-12 || (lo - (1.0 - mu)).abs() > 1e-12 {
            ok = false;
        }
    }
    report(
        11,
        ok,
        "delta_1 is 0 (unit) and 1/p (paper); 2x2 Gram spectra match 1 +- |mu| analytically",
    );
}

#[test]
fn criterion_12_omp_recovery_rates() {
    let ctx = FieldContext::new(97).expect("prime");
    let ks: Vec<usize> = (1..=8).collect();
    let rates = recovery_experiment(
        &ctx,
        &ks,
        100,
        legendre_gabor::config::DEFAULT_SEED,
        Method::Omp,
        NormConvention::UnitNorm,
    )
    .expect("experiment");
    let mut ok = true;
    for r in &rates {
        if r.k <= 5 && r.successes < 99 {
            ok = false;
        }
    }
    for w in rates.windows(2) {
        if w[1].rate > w[0].rate {
            ok = false;
        }
    }
    let summary: Vec<String> = rates.iter().map(|r| format!("k={}:{}", r.k, r.successes)).collect();
    report(
        12,
        ok,
        &format!(
            "OMP at p=97 recovers k <= 5 in >= 99/100 trials, nonincreasing in k ({})",
            summary.join(" ")
        ),
    );
}

#[test]
fn criterion_13_csv_determinism_across_worker_counts() {
    let scaling = |threads: usize| {
        let cfg = parse_config(&format!(
            "command=scaling\np-range=1000:50000\npoints=10\nsigma=0.1\ndelta=0.3\nseed=42\nthreads={threads}\n"
        ))
        .expect("valid config");
        driver::run(&cfg).expect("runs").csv
    };
    let recover = |threads: usize| {
        let cfg = parse_config(&format!(
            "command=recover\np=61\nk-min=1\nk-max=4\ntrials=30\nseed=42\nthreads={threads}\n"
        ))
        .expect("valid config");
        driver::run(&cfg).expect("runs").csv
    };
    let ok = scaling(1) == scaling(4) && recover(1) == recover(4);
    report(
        13,
        ok,
        "scaling and recovery CSV bytes are identical across worker counts at a fixed seed",
    );
}
