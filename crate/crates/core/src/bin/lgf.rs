//! Experiment driver for the Legendre Gabor frame library.

use clap::{Parser, Subcommand};
use legendre_gabor::config::ConfigBuilder;
use legendre_gabor::driver;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const CONFIG_HELP: &str = "\
Config file format: UTF-8 key=value lines, '#' starts a comment, later keys
override earlier ones, and command-line flags override the file.

Keys and defaults:
  command      verify|coherence|sine-sum|scaling|flat-rip|decompose|char-sums|recover
  p            single odd prime            (exactly one of p / p-range)
  p-range      LO:HI prime range           (scaling picks `points` log-spaced primes)
  sigma        0.1    block-size exponent, |M1| ~ p^(1/2-sigma)
  delta        0.3    modulation exponent, n ~ p^(1/2+delta); must exceed sigma
  epsilon      0.1    singular-window exponent for decompose; in (0, delta-sigma)
  trials       100    sampled trials (flat-rip, recover)
  seed         1729   master seed; task t uses splitmix64(seed + splitmix64(t))
  convention   paper|unit (recover defaults to unit, everything else to paper)
  mode         theorem|free (free needs explicit n, m1len, m2len)
  threads      0      worker count (0 = library default); never changes output bytes
  points       20     primes in a scaling sweep
  k            flat-RIP order (default floor(sqrt(p)))
  k-min/k-max  1/8    sparsity range for recover
  n,m1len,m2len        explicit free-mode parameters
  c            pi|2   piecewise bound constant (pi dominates pointwise)
  method       omp|ista
  lambda       0.05   ista threshold weight
  iterations   300    ista iteration cap
  out          CSV output path (default stdout)

Exit codes: 0 all asserted bounds held, 1 a bound failed, 2 usage error.";

#[derive(Parser)]
#[command(
    name = "lgf",
    version,
    about = "Gabor frames of Legendre symbols: bound checks, scaling sweeps, sparse recovery",
    after_long_help = CONFIG_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Key=value config file; flags given here override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Single odd prime.
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Prime range LO:HI.
    #[arg(long = "p-range", global = true)]
    p_range: Option<String>,
    #[arg(long, global = true)]
    sigma: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Column normalization: paper (1/sqrt(p)) or unit.
    #[arg(long, global = true)]
    convention: Option<String>,
    /// CSV output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// theorem (realize block sizes from sigma/delta) or free.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Worker threads; output bytes are identical for any value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Primes per scaling sweep.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Flat-RIP order.
    #[arg(long, global = true)]
    k: Option<u64>,
    #[arg(long = "k-min", global = true)]
    k_min: Option<usize>,
    #[arg(long = "k-max", global = true)]
    k_max: Option<usize>,
    #[arg(long, global = true)]
    n: Option<u64>,
    #[arg(long, global = true)]
    m1len: Option<u64>,
    #[arg(long, global = true)]
    m2len: Option<u64>,
    /// Piecewise bound constant: pi or 2.
    #[arg(long, global = true)]
    c: Option<String>,
    /// Recovery method: omp or ista.
    #[arg(long, global = true)]
    method: Option<String>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    iterations: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the condensed invariant battery.
    Verify,
    /// Shift-class coherence against the 2/sqrt(p) bound.
    Coherence,
    /// The sine-ratio sum and its trivial bound at each prime.
    SineSum,
    /// Prime sweep of the sine-ratio sum with a log-log exponent fit.
    Scaling,
    /// Sampled flat-RIP constants and the RIP order transfer.
    FlatRip,
    /// Four-region split of the piecewise bound with residuals.
    Decompose,
    /// Exhaustive twisted-autocorrelation grid at one prime.
    CharSums,
    /// Seeded sparse-recovery success rates.
    Recover,
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Verify => "verify",
            Cmd::Coherence => "coherence",
            Cmd::SineSum => "sine-sum",
            Cmd::Scaling => "scaling",
            Cmd::FlatRip => "flat-rip",
            Cmd::Decompose => "decompose",
            Cmd::CharSums => "char-sums",
            Cmd::Recover => "recover",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut builder = ConfigBuilder::new();
    if let Some(path) = &cli.config {
        match std::fs::read_to_string(path) {
            Ok(text) => builder.apply_file(&text),
            Err(e) => {
                eprintln!("lgf: cannot read {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
    }
    macro_rules! fwd {
        ($field:expr, $key:expr) => {
            if let Some(v) = &$field {
                builder.set($key, v.to_string());
            }
        };
    }
    fwd!(cli.p, "p");
    fwd!(cli.p_range, "p-range");
    fwd!(cli.sigma, "sigma");
    fwd!(cli.delta, "delta");
    fwd!(cli.epsilon, "epsilon");
    fwd!(cli.trials, "trials");
    fwd!(cli.seed, "seed");
    fwd!(cli.convention, "convention");
    fwd!(cli.mode, "mode");
    fwd!(cli.threads, "threads");
    fwd!(cli.points, "points");
    fwd!(cli.k, "k");
    fwd!(cli.k_min, "k-min");
    fwd!(cli.k_max, "k-max");
    fwd!(cli.n, "n");
    fwd!(cli.m1len, "m1len");
    fwd!(cli.m2len, "m2len");
    fwd!(cli.c, "c");
    fwd!(cli.method, "method");
    fwd!(cli.lambda, "lambda");
    fwd!(cli.iterations, "iterations");
    if let Some(out) = &cli.out {
        builder.set("out", out.display().to_string());
    }
    builder.set("command", cli.command.name());

    let config = match builder.build() {
        Ok(c) => c,
        Err(errors) => {
            for e in errors {
                eprintln!("lgf: config error: {e}");
            }
            return ExitCode::from(2);
        }
    };

    let output = match driver::run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("lgf: {e}");
            return ExitCode::from(2);
        }
    };

    match &config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &output.csv) {
                eprintln!("lgf: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => {
            if std::io::stdout().write_all(&output.csv).is_err() {
                return ExitCode::from(2);
            }
        }
    }
    ExitCode::from(output.exit_code as u8)
}
