//! Runs a validated config: executes the named suite, renders one CSV
//! artifact with a config-hash footer, and reports bound violations through
//! the exit code. Output bytes depend only on the config and seed, never on
//! the worker count.

use crate::charsums::{chung_double_sum, polya_vinogradov_max, twisted_autocorrelation, weil_product_sum};
use crate::config::{Command, ExperimentConfig, MethodKind, Mode, PrimeSpec};
use crate::field::{is_prime, FieldContext};
use crate::flatrip::{
    flat_rip_delta, transfer_hypotheses_met, pair_sum_inner_product_direct,
    pair_sum_inner_product_spectral, rip_delta_sampled, rip_order_from_flat, OmegaSet,
    PairSampler,
};
use crate::gabor::{coherence, gram_submatrix, CoherenceMode, NormConvention, TimeFreqIndex};
use crate::linalg::hermitian_extreme_eigenvalues;
use crate::recovery::{recovery_experiment, Method};
use crate::seeding::task_rng;
use crate::theorem::{
    dirichlet_kernel_mag, gabor_triple_sum, log_spaced_primes, piecewise_bound_sum, scaling_fit,
    sine_sum_exact, sum_split_decompose, trivial_bound, ConsecutiveBlock, PiecewiseBound,
    ThetaParams,
};
use rand::Rng;
use rayon::prelude::*;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct RunOutput {
    pub exit_code: i32,
    pub csv: Vec<u8>,
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct Csv {
    columns: usize,
    lines: Vec<String>,
    footer: Vec<(String, String)>,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        Csv {
            columns: header.len(),
            lines: vec![header.join(",")],
            footer: Vec::new(),
        }
    }

    fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.columns, "row width mismatch");
        self.lines.push(cells.join(","));
    }

    fn note(&mut self, key: &str, value: impl Into<String>) {
        self.footer.push((key.to_string(), value.into()));
    }

    fn finish(self, config: &ExperimentConfig) -> Vec<u8> {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out.push_str(&format!("# config_hash={}\n", config.fingerprint()));
        out.push_str(&format!("# seed={}\n", config.seed));
        out.push_str(&format!("# version={TOOL_VERSION}\n"));
        for (k, v) in &self.footer {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.into_bytes()
    }
}

fn conv_name(conv: NormConvention) -> &'static str {
    match conv {
        NormConvention::PaperSqrtP => "paper",
        NormConvention::UnitNorm => "unit",
    }
}

fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(3)..=hi).filter(|&p| is_prime(p)).collect()
}

fn primes_for(config: &ExperimentConfig) -> Result<Vec<u64>, String> {
    match config.primes {
        PrimeSpec::Single(p) => {
            if !is_prime(p) || p < 3 {
                return Err(format!("p = {p} is not an odd prime"));
            }
            Ok(vec![p])
        }
        PrimeSpec::Range(lo, hi) => {
            if config.command == Command::Scaling {
                Ok(log_spaced_primes(lo.max(3), hi, config.points))
            } else {
                Ok(primes_in_range(lo, hi))
            }
        }
        PrimeSpec::Unset => Err("this command needs 'p' or 'p-range'".to_string()),
    }
}

fn params_for(p: u64, config: &ExperimentConfig) -> Result<ThetaParams, String> {
    match config.mode {
        Mode::Theorem => ThetaParams::realize(p, config.sigma, config.delta, config.epsilon)
            .map_err(|e| format!("p = {p}: {e}")),
        Mode::Free => {
            let (n, m1, m2) = match (config.n, config.m1len, config.m2len) {
                (Some(n), Some(m1), Some(m2)) => (n, m1, m2),
                _ => return Err("free mode needs explicit n, m1len and m2len".to_string()),
            };
            ThetaParams::free(p, n % p, m1, m2).map_err(|e| format!("p = {p}: {e}"))
        }
    }
}

/// Execute the configured suite. `Err` means a usage problem (exit 2);
/// otherwise the exit code is 0 unless an asserted bound failed (1).
pub fn run(config: &ExperimentConfig) -> Result<RunOutput, String> {
    if config.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| e.to_string())?;
        pool.install(|| run_inner(config))
    } else {
        run_inner(config)
    }
}

fn run_inner(config: &ExperimentConfig) -> Result<RunOutput, String> {
    match config.command {
        Command::Verify => run_verify(config),
        Command::Coherence => run_coherence(config),
        Command::SineSum | Command::Scaling => run_sine_scaling(config),
        Command::FlatRip => run_flat_rip(config),
        Command::Decompose => run_decompose(config),
        Command::CharSums => run_char_sums(config),
        Command::Recover => run_recover(config),
    }
}

fn run_coherence(config: &ExperimentConfig) -> Result<RunOutput, String> {
    let primes = primes_for(config)?;
    let conv = config.convention;
    let rows: Vec<(u64, f64)> = primes
        .par_iter()
        .map(|&p| {
            let ctx = FieldContext::new(p).expect("prime checked");
            let mu = coherence(&ctx, conv, CoherenceMode::ShiftClass).expect("shift class");
            (p, mu)
        })
        .collect();
    let mut csv = Csv::new(&["p", "convention", "coherence", "bound", "ratio", "holds"]);
    let mut all_hold = true;
    for (p, mu) in rows {
        let bound = match conv {
            NormConvention::PaperSqrtP => 2.0 / (p as f64).sqrt(),
            NormConvention::UnitNorm => 2.0 * (p as f64).sqrt() / (p - 1) as f64,
        };
        let holds = mu <= bound * (1.0 + 1e-9);
        all_hold &= holds;
        csv.row(vec![
            p.to_string(),
            conv_name(conv).to_string(),
            fmt_f64(mu),
            fmt_f64(bound),
            fmt_f64(mu / bound),
            holds.to_string(),
        ]);
    }
    Ok(RunOutput {
        exit_code: i32::from(!all_hold),
        csv: csv.finish(config),
    })
}

fn run_sine_scaling(config: &ExperimentConfig) -> Result<RunOutput, String> {
    let primes = primes_for(config)?;
    let mut params = Vec::with_capacity(primes.len());
    for &p in &primes {
        params.push(params_for(p, config)?);
    }
    let rows: Vec<(ThetaParams, f64, f64)> = params
        .into_par_iter()
        .map(|prm| {
            let s = sine_sum_exact(&prm);
            let t = trivial_bound(&prm);
            (prm, s, t)
        })
        .collect();
    let mut csv = Csv::new(&["p", "n", "m1len", "m2len", "sine_sum", "trivial_bound", "ratio"]);
    let mut all_hold = true;
    let mut points = Vec::new();
    for (prm, s, t) in &rows {
        all_hold &= *s <= t * (1.0 + 1e-9);
        points.push((prm.p, *s));
        csv.row(vec![
            prm.p.to_string(),
            prm.n.to_string(),
            prm.m1len.to_string(),
            prm.m2len.to_string(),
            fmt_f64(*s),
            fmt_f64(*t),
            fmt_f64(*s / *t),
        ]);
    }
    csv.note("alpha", fmt_f64(config.alpha()));
    if config.command == Command::Scaling {
        match scaling_fit(&points) {
            Ok(fit) => {
                csv.note("fitted_exponent", fmt_f64(fit.exponent));
                csv.note("log_k", fmt_f64(fit.log_k));
                csv.note("r2", fmt_f64(fit.r2));
                csv.note("target_exponent", fmt_f64(1.5 - config.alpha()));
            }
            Err(e) => csv.note("fit_error", e.to_string()),
        }
    }
    Ok(RunOutput {
        exit_code: i32::from(!all_hold),
        csv: csv.finish(config),
    })
}

fn run_flat_rip(config: &ExperimentConfig) -> Result<RunOutput, String> {
    let primes = primes_for(config)?;
    let conv = config.convention;
    let mut csv = Csv::new(&[
        "p",
        "k",
        "trials",
        "convention",
        "delta",
        "relaxed_delta",
        "mu",
        "mu_hypothesis_met",
        "k_hypothesis_met",
        "rip_order",
        "rip_delta",
    ]);
    for &p in &primes {
        let ctx = FieldContext::new(p).map_err(|e| e.to_string())?;
        let sqrt_p = (p as f64).sqrt().floor() as u64;
        let k = config.flat_k.unwrap_or(sqrt_p).min(sqrt_p).max(1);
        let report = flat_rip_delta(
            &ctx,
            k,
            PairSampler::ConsecutiveBlocks,
            config.trials,
            conv,
            config.seed,
        )
        .map_err(|e| e.to_string())?;
        let relaxed = report.relaxed_delta.unwrap_or(report.delta);
        let (k_ok, mu_ok) = transfer_hypotheses_met(k, report.mu);
        let (order, rip_delta) = rip_order_from_flat(k, relaxed, 1).map_err(|e| e.to_string())?;
        csv.row(vec![
            p.to_string(),
            k.to_string(),
            report.trials.to_string(),
            conv_name(conv).to_string(),
            fmt_f64(report.delta),
            fmt_f64(relaxed),
            fmt_f64(report.mu),
            mu_ok.to_string(),
            k_ok.to_string(),
            order.to_string(),
            fmt_f64(rip_delta),
        ]);
    }
    csv.note("log_base", "e (natural log in the order-transfer formula)");
    csv.note("delta_semantics", "sampled lower bound");
    Ok(RunOutput {
        exit_code: 0,
        csv: csv.finish(config),
    })
}

fn run_decompose(config: &ExperimentConfig) -> Result<RunOutput, String> {
    let primes = primes_for(config)?;
    let c = config.bound_constant.value();
    let mut csv = Csv::new(&[
        "p",
        "n",
        "m1len",
        "m2len",
        "epsilon",
        "c",
        "e1",
        "s_main",
        "e2",
        "e3",
        "total_bound",
        "discrepancy",
        "residual_count",
        "residual_abs_sum",
    ]);
    for &p in &primes {
        let params = params_for(p, config)?;
        let d = sum_split_decompose(&params, c).map_err(|e| format!("p = {p}: {e}"))?;
        csv.row(vec![
            p.to_string(),
            params.n.to_string(),
            params.m1len.to_string(),
            params.m2len.to_string(),
            fmt_f64(params.epsilon),
            config.bound_constant.name().to_string(),
            fmt_f64(d.e1),
            fmt_f64(d.s_main),
            fmt_f64(d.e2),
            fmt_f64(d.e3),
            fmt_f64(d.total_bound),
            fmt_f64(d.discrepancy),
            d.residuals.len().to_string(),
            fmt_f64(d.residual_abs_sum),
        ]);
    }
    csv.note(
        "discrepancy_semantics",
        "total_bound minus (e1+s_main+e2+e3); reported, not asserted zero",
    );
    Ok(RunOutput {
        exit_code: 0,
        csv: csv.finish(config),
    })
}

fn run_char_sums(config: &ExperimentConfig) -> Result<RunOutput, String> {
    let primes = primes_for(config)?;
    let p = primes[0];
    let ctx = FieldContext::new(p).map_err(|e| e.to_string())?;
    let rows: Vec<(u64, u64, f64, f64, f64, bool)> = (1..p)
        .into_par_iter()
        .flat_map_iter(|m| {
            let ctx = &ctx;
            (1..p).map(move |n| {
                let chk = twisted_autocorrelation(ctx, m, n);
                (m, n, chk.value, chk.bound, chk.ratio, chk.holds)
            })
        })
        .collect();
    let mut csv = Csv::new(&["m", "n", "value", "bound", "ratio", "holds"]);
    let mut all_hold = true;
    for (m, n, value, bound, ratio, holds) in rows {
        all_hold &= holds;
        csv.row(vec![
            m.to_string(),
            n.to_string(),
            fmt_f64(value),
            fmt_f64(bound),
            fmt_f64(ratio),
            holds.to_string(),
        ]);
    }
    csv.note("bound", "2 sqrt(p) for m, n nonzero");
    Ok(RunOutput {
        exit_code: i32::from(!all_hold),
        csv: csv.finish(config),
    })
}

fn run_recover(config: &ExperimentConfig) -> Result<RunOutput, String> {
    let primes = primes_for(config)?;
    let p = primes[0];
    let ctx = FieldContext::new(p).map_err(|e| e.to_string())?;
    if config.method == MethodKind::Omp && config.convention != NormConvention::UnitNorm {
        return Err("omp recovery requires convention=unit".to_string());
    }
    let ks: Vec<usize> = (config.k_min..=config.k_max).collect();
    let method = match config.method {
        MethodKind::Omp => Method::Omp,
        MethodKind::Ista => Method::Ista {
            lambda: config.lambda,
            iterations: config.iterations,
        },
    };
    let rates = recovery_experiment(&ctx, &ks, config.trials, config.seed, method, config.convention)
        .map_err(|e| e.to_string())?;
    let mut csv = Csv::new(&["method", "p", "k", "trials", "successes", "rate"]);
    for r in &rates {
        csv.row(vec![
            match config.method {
                MethodKind::Omp => "omp".to_string(),
                MethodKind::Ista => "ista".to_string(),
            },
            p.to_string(),
            r.k.to_string(),
            r.trials.to_string(),
            r.successes.to_string(),
            fmt_f64(r.rate),
        ]);
    }
    csv.note("signal_model", "uniform support, unit-modulus random-phase coefficients");
    Ok(RunOutput {
        exit_code: 0,
        csv: csv.finish(config),
    })
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        passed,
        detail: detail.into(),
    }
}

/// A condensed version of the full invariant battery, cheap enough to run on
/// every build.
fn run_verify(config: &ExperimentConfig) -> Result<RunOutput, String> {
    let seed = config.seed;
    let mut checks: Vec<Check> = Vec::new();

    // Character table invariants.
    {
        let ctx = FieldContext::new(101).map_err(|e| e.to_string())?;
        let mut ok = ctx.chi_table().iter().map(|&c| c as i64).sum::<i64>() == 0;
        'outer: for a in 1..101u64 {
            for b in 1..101u64 {
                if ctx.chi_at(a * b % 101) != ctx.chi_at(a) * ctx.chi_at(b) {
                    ok = false;
                    break 'outer;
                }
            }
        }
        checks.push(check("chi_multiplicative", ok, "exhaustive at p=101"));
    }
    {
        let ok = primes_in_range(3, 2000).into_iter().all(|p| {
            let ctx = FieldContext::new(p).expect("prime");
            (ctx.gauss_sum().norm() - (p as f64).sqrt()).abs() < 1e-9
        });
        checks.push(check("gauss_magnitude", ok, "|G| = sqrt(p) for p <= 2000"));
    }
    {
        let p = 31u64;
        let mut ok = true;
        for length in 1..=p {
            for t in 0..p as i64 {
                let v = dirichlet_kernel_mag(p, &ConsecutiveBlock::new(0, length), t);
                let mut acc = num_complex::Complex64::new(0.0, 0.0);
                for m in 0..length {
                    let ang = 2.0 * std::f64::consts::PI * (m as f64) * (t as f64) / p as f64;
                    acc += num_complex::Complex64::new(ang.cos(), ang.sin());
                }
                if (v - acc.norm()).abs() > 1e-9 * length as f64 {
                    ok = false;
                }
            }
        }
        checks.push(check("dirichlet_kernel_identity", ok, "exhaustive at p=31"));
    }
    {
        let ctx = FieldContext::new(61).map_err(|e| e.to_string())?;
        let ok = (1..61u64)
            .all(|m| (1..61u64).all(|n| twisted_autocorrelation(&ctx, m, n).holds));
        checks.push(check("weil_twisted_2sqrtp", ok, "exhaustive at p=61"));
    }
    {
        let ctx = FieldContext::new(61).map_err(|e| e.to_string())?;
        let mut rng = task_rng(seed, 1);
        let ok = (0..200).all(|_| {
            let k = rng.gen_range(1..=4usize);
            let mut shifts = std::collections::BTreeSet::new();
            while shifts.len() < k {
                shifts.insert(rng.gen_range(1..61u64));
            }
            let shifts: Vec<u64> = shifts.into_iter().collect();
            weil_product_sum(&ctx, &shifts).expect("sorted shifts").holds
        });
        checks.push(check("weil_product_9ksqrtp", ok, "200 random tuples at p=61"));
    }
    {
        let ok = primes_in_range(3, 2000)
            .into_iter()
            .all(|p| polya_vinogradov_max(&FieldContext::new(p).expect("prime")).holds);
        checks.push(check("polya_vinogradov", ok, "p <= 2000"));
    }
    {
        let ctx = FieldContext::new(101).map_err(|e| e.to_string())?;
        let mut rng = task_rng(seed, 2);
        let ok = (0..20).all(|_| {
            let ns = rng.gen_range(1..=20usize);
            let nt = rng.gen_range(1..=20usize);
            let s: Vec<u64> = (0..ns).map(|_| rng.gen_range(0..101)).collect();
            let t: Vec<u64> = (0..nt).map(|_| rng.gen_range(0..101)).collect();
            chung_double_sum(&ctx, &s, &t).expect("nonempty").holds
        });
        checks.push(check("chung_double_sum", ok, "20 random set pairs at p=101"));
    }
    {
        let mut ok = true;
        for p in [5u64, 7, 11, 13] {
            let ctx = FieldContext::new(p).expect("prime");
            let b = coherence(&ctx, NormConvention::PaperSqrtP, CoherenceMode::Brute)
                .expect("small p");
            let s = coherence(&ctx, NormConvention::PaperSqrtP, CoherenceMode::ShiftClass)
                .expect("shift class");
            ok &= (b - s).abs() <= 1e-10;
        }
        for p in primes_in_range(3, 61) {
            let ctx = FieldContext::new(p).expect("prime");
            let mu = coherence(&ctx, NormConvention::PaperSqrtP, CoherenceMode::ShiftClass)
                .expect("shift class");
            ok &= mu <= 2.0 / (p as f64).sqrt() + 1e-12;
        }
        checks.push(check("coherence", ok, "brute equality and 2/sqrt(p) bound"));
    }
    {
        let mut ok = true;
        for (ci, &p) in [31u64, 61].iter().enumerate() {
            let ctx = FieldContext::new(p).expect("prime");
            for t in 0..20u64 {
                let mut rng = task_rng(seed, 1000 + (ci as u64) * 100 + t);
                let o1 = OmegaSet::from_blocks(
                    p,
                    &[(rng.gen_range(0..p), rng.gen_range(0..p), rng.gen_range(1..=4))],
                );
                let o2 = loop {
                    let cand = OmegaSet::from_blocks(
                        p,
                        &[(rng.gen_range(0..p), rng.gen_range(0..p), rng.gen_range(1..=4))],
                    );
                    if cand.is_disjoint(&o1) {
                        break cand;
                    }
                };
                let d = pair_sum_inner_product_direct(&ctx, &o1, &o2, NormConvention::PaperSqrtP)
                    .expect("disjoint");
                let s =
                    pair_sum_inner_product_spectral(&ctx, &o1, &o2, NormConvention::PaperSqrtP)
                        .expect("disjoint");
                ok &= (d - s).norm() <= 1e-8 * d.norm().max(1e-12);
            }
        }
        checks.push(check("dual_path_inner_product", ok, "spectral = direct, 20 pairs"));
    }
    {
        let mut ok = true;
        for p in [101u64, 1009] {
            let prm = ThetaParams::free(p, 32 % p, 1, 1).expect("free params");
            ok &= (sine_sum_exact(&prm) - (p - 2) as f64).abs() <= 1e-9 * p as f64;
        }
        let mut rng = task_rng(seed, 3);
        for _ in 0..30 {
            let p = crate::field::next_prime_at_least(rng.gen_range(100..3000));
            let sq = (p as f64).sqrt().floor() as u64;
            let m1 = rng.gen_range(1..=sq);
            let m2 = rng.gen_range(m1..=sq);
            let prm = ThetaParams::free(p, rng.gen_range(0..p), m1, m2).expect("free params");
            ok &= sine_sum_exact(&prm) <= trivial_bound(&prm) * (1.0 + 1e-9);
        }
        checks.push(check("sine_sum_bounds", ok, "degenerate value and trivial bound"));
    }
    {
        let prm = ThetaParams::realize(61, 0.05, 0.3, 0.1).expect("realizable");
        let pw = PiecewiseBound::new(&prm, std::f64::consts::PI);
        let mut ok = true;
        for s in 1..61u64 {
            if (s + prm.n) % 61 == 0 {
                continue;
            }
            let ratio = dirichlet_kernel_mag(61, &ConsecutiveBlock::new(0, prm.m1len), s as i64)
                * dirichlet_kernel_mag(
                    61,
                    &ConsecutiveBlock::new(0, prm.m2len),
                    (s + prm.n) as i64,
                );
            ok &= ratio <= pw.summand(s as i64) * (1.0 + 1e-12);
        }
        ok &= (piecewise_bound_sum(&prm, std::f64::consts::PI)
            - (std::f64::consts::PI / 2.0).powi(2) * piecewise_bound_sum(&prm, 2.0))
        .abs()
            <= 1e-9 * piecewise_bound_sum(&prm, std::f64::consts::PI);
        checks.push(check("piecewise_domination", ok, "pointwise at p=61, c=pi"));
    }
    {
        let ctx = FieldContext::new(13).map_err(|e| e.to_string())?;
        let unit = rip_delta_sampled(&ctx, 1, 10, NormConvention::UnitNorm, seed)
            .map_err(|e| e.to_string())?;
        let paper = rip_delta_sampled(&ctx, 1, 10, NormConvention::PaperSqrtP, seed)
            .map_err(|e| e.to_string())?;
        let mut ok = unit.delta.abs() <= 1e-12 && (paper.delta - 1.0 / 13.0).abs() <= 1e-12;
        let mut rng = task_rng(seed, 4);
        for _ in 0..10 {
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
            ok &= (hi - (1.0 + mu)).abs() <= 1e-12 && (lo - (1.0 - mu)).abs() <= 1e-12;
        }
        checks.push(check("rip_degenerate", ok, "delta_1 and 2x2 spectra at p=13"));
    }
    {
        let (order, delta) = rip_order_from_flat(1024, 0.01, 1).map_err(|e| e.to_string())?;
        let ok = order == 2048 && (delta - 44.0 * 0.01 * 1024f64.ln()).abs() <= 1e-12;
        checks.push(check("order_transfer", ok, "(2sk, 44 s delta ln k)"));
    }
    {
        let ctx = FieldContext::new(101).map_err(|e| e.to_string())?;
        let prm = ThetaParams::realize(101, 0.05, 0.3, 0.1).expect("realizable");
        let b1 = ConsecutiveBlock::new(17, prm.m1len);
        let b2 = ConsecutiveBlock::new(60, prm.m2len);
        let v = gabor_triple_sum(&ctx, &prm, &b1, &b2).map_err(|e| e.to_string())?;
        let ok = v.norm() <= sine_sum_exact(&prm) + 1e-6 * 101.0;
        checks.push(check("triple_sum_chain", ok, "|triple| <= sine bound at p=101"));
    }

    let mut csv = Csv::new(&["check", "passed", "detail"]);
    let mut all = true;
    for c in &checks {
        all &= c.passed;
        csv.row(vec![
            c.name.to_string(),
            c.passed.to_string(),
            c.detail.clone(),
        ]);
    }
    Ok(RunOutput {
        exit_code: i32::from(!all),
        csv: csv.finish(config),
    })
}
