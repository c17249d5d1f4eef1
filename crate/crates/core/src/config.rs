//! Experiment configuration: key=value files, command-line overrides, and
//! cross-field validation that reports every violation at once.

use crate::gabor::NormConvention;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

/// Fixed default seed; wall-clock seeding would break reproducibility.
pub const DEFAULT_SEED: u64 = 1729;
pub const DEFAULT_SIGMA: f64 = 0.1;
pub const DEFAULT_DELTA: f64 = 0.3;
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_TRIALS: u64 = 100;
pub const DEFAULT_POINTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Coherence,
    SineSum,
    Scaling,
    FlatRip,
    Decompose,
    CharSums,
    Recover,
}

impl Command {
    pub fn parse(s: &str) -> Option<Command> {
        Some(match s {
            "verify" => Command::Verify,
            "coherence" => Command::Coherence,
            "sine-sum" => Command::SineSum,
            "scaling" => Command::Scaling,
            "flat-rip" => Command::FlatRip,
            "decompose" => Command::Decompose,
            "char-sums" => Command::CharSums,
            "recover" => Command::Recover,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Coherence => "coherence",
            Command::SineSum => "sine-sum",
            Command::Scaling => "scaling",
            Command::FlatRip => "flat-rip",
            Command::Decompose => "decompose",
            Command::CharSums => "char-sums",
            Command::Recover => "recover",
        }
    }

    fn needs_primes(&self) -> bool {
        !matches!(self, Command::Verify)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimeSpec {
    Single(u64),
    Range(u64, u64),
    Unset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Theorem,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundConstant {
    Two,
    Pi,
}

impl BoundConstant {
    pub fn value(&self) -> f64 {
        match self {
            BoundConstant::Two => 2.0,
            BoundConstant::Pi => std::f64::consts::PI,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundConstant::Two => "2",
            BoundConstant::Pi => "pi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    Omp,
    Ista,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub primes: PrimeSpec,
    pub sigma: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub trials: u64,
    pub seed: u64,
    pub convention: NormConvention,
    pub out: Option<PathBuf>,
    pub mode: Mode,
    pub threads: usize,
    pub points: usize,
    pub flat_k: Option<u64>,
    pub k_min: usize,
    pub k_max: usize,
    pub m1len: Option<u64>,
    pub m2len: Option<u64>,
    pub n: Option<u64>,
    pub bound_constant: BoundConstant,
    pub method: MethodKind,
    pub lambda: f64,
    pub iterations: usize,
}

impl ExperimentConfig {
    pub fn alpha(&self) -> f64 {
        self.sigma + (self.delta - self.sigma) / 2.0
    }

    /// Canonical serialization of the semantic fields (output path and worker
    /// count excluded, so reruns with different parallelism hash alike).
    pub fn canonical_string(&self) -> String {
        let conv = match self.convention {
            NormConvention::PaperSqrtP => "paper",
            NormConvention::UnitNorm => "unit",
        };
        let mode = match self.mode {
            Mode::Theorem => "theorem",
            Mode::Free => "free",
        };
        let method = match self.method {
            MethodKind::Omp => "omp",
            MethodKind::Ista => "ista",
        };
        let primes = match self.primes {
            PrimeSpec::Single(p) => format!("p={p}"),
            PrimeSpec::Range(lo, hi) => format!("p-range={lo}:{hi}"),
            PrimeSpec::Unset => "p=unset".to_string(),
        };
        let mut parts = vec![
            format!("command={}", self.command.name()),
            primes,
            format!("sigma={}", self.sigma),
            format!("delta={}", self.delta),
            format!("epsilon={}", self.epsilon),
            format!("trials={}", self.trials),
            format!("seed={}", self.seed),
            format!("convention={conv}"),
            format!("mode={mode}"),
            format!("points={}", self.points),
            format!("k-min={}", self.k_min),
            format!("k-max={}", self.k_max),
            format!("c={}", self.bound_constant.name()),
            format!("method={method}"),
            format!("lambda={}", self.lambda),
            format!("iterations={}", self.iterations),
        ];
        if let Some(k) = self.flat_k {
            parts.push(format!("k={k}"));
        }
        if let Some(v) = self.m1len {
            parts.push(format!("m1len={v}"));
        }
        if let Some(v) = self.m2len {
            parts.push(format!("m2len={v}"));
        }
        if let Some(v) = self.n {
            parts.push(format!("n={v}"));
        }
        parts.join("\n")
    }

    /// FNV-1a fingerprint of the canonical form, printed in CSV footers.
    pub fn fingerprint(&self) -> String {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in self.canonical_string().bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{hash:016x}")
    }
}

const KNOWN_KEYS: &[&str] = &[
    "command", "p", "p-range", "sigma", "delta", "epsilon", "trials", "seed", "convention",
    "out", "mode", "threads", "points", "k", "k-min", "k-max", "m1len", "m2len", "n", "c",
    "method", "lambda", "iterations",
];

/// Accumulates key=value pairs from a file and command-line overrides,
/// then validates everything in one pass.
#[derive(Debug, Default)]
pub struct ConfigBuilder {
    // Last writer wins; the line number is kept for error reports.
    entries: BTreeMap<String, (String, Option<usize>)>,
    errors: Vec<ConfigError>,
}

impl ConfigBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse '#'-commented key=value lines; later keys override earlier ones.
    pub fn apply_file(&mut self, text: &str) {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = lineno + 1;
            match line.split_once('=') {
                Some((key, value)) => {
                    let key = key.trim();
                    let value = value.trim();
                    if !KNOWN_KEYS.contains(&key) {
                        self.errors.push(ConfigError {
                            line: Some(lineno),
                            message: format!("unknown key '{key}'"),
                        });
                        continue;
                    }
                    self.entries
                        .insert(key.to_string(), (value.to_string(), Some(lineno)));
                }
                None => self.errors.push(ConfigError {
                    line: Some(lineno),
                    message: format!("expected key=value, got '{line}'"),
                }),
            }
        }
    }

    /// Command-line override; takes precedence over any file entry.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        if !KNOWN_KEYS.contains(&key) {
            self.errors.push(ConfigError {
                line: None,
                message: format!("unknown key '{key}'"),
            });
            return;
        }
        self.entries.insert(key.to_string(), (value.into(), None));
    }

    pub fn build(mut self) -> Result<ExperimentConfig, Vec<ConfigError>> {
        let mut errors = std::mem::take(&mut self.errors);

        macro_rules! parse_key {
            ($key:expr, $ty:ty) => {
                self.entries.get($key).and_then(|(v, line)| {
                    match v.parse::<$ty>() {
                        Ok(x) => Some(x),
                        Err(_) => {
                            errors.push(ConfigError {
                                line: *line,
                                message: format!("malformed value '{v}' for '{}'", $key),
                            });
                            None
                        }
                    }
                })
            };
        }

        let command = match self.entries.get("command") {
            Some((v, line)) => match Command::parse(v) {
                Some(c) => Some(c),
                None => {
                    errors.push(ConfigError {
                        line: *line,
                        message: format!("unknown command '{v}'"),
                    });
                    None
                }
            },
            None => {
                errors.push(ConfigError {
                    line: None,
                    message: "a command is required".to_string(),
                });
                None
            }
        };

        let p = parse_key!("p", u64);
        let p_range = self.entries.get("p-range").and_then(|(v, line)| {
            let parsed = v.split_once(':').and_then(|(lo, hi)| {
                Some((lo.trim().parse::<u64>().ok()?, hi.trim().parse::<u64>().ok()?))
            });
            if parsed.is_none() {
                errors.push(ConfigError {
                    line: *line,
                    message: format!("malformed value '{v}' for 'p-range' (expected LO:HI)"),
                });
            }
            parsed
        });
        let primes = match (p, p_range) {
            (Some(_), Some(_)) => {
                errors.push(ConfigError {
                    line: self.entries.get("p").and_then(|(_, l)| *l),
                    message: "exactly one of 'p' and 'p-range' may be given".to_string(),
                });
                PrimeSpec::Unset
            }
            (Some(p), None) => PrimeSpec::Single(p),
            (None, Some((lo, hi))) => {
                if lo < 3 || hi <= lo {
                    errors.push(ConfigError {
                        line: self.entries.get("p-range").and_then(|(_, l)| *l),
                        message: format!("p-range {lo}:{hi} must satisfy 3 <= LO < HI"),
                    });
                }
                PrimeSpec::Range(lo, hi)
            }
            (None, None) => PrimeSpec::Unset,
        };
        if let Some(cmd) = command {
            if cmd.needs_primes() && primes == PrimeSpec::Unset {
                // Only complain when nothing at all was supplied.
                if p.is_none() && p_range.is_none() {
                    errors.push(ConfigError {
                        line: None,
                        message: format!("command '{}' needs 'p' or 'p-range'", cmd.name()),
                    });
                }
            }
            if cmd == Command::CharSums {
                if let PrimeSpec::Range(..) = primes {
                    errors.push(ConfigError {
                        line: None,
                        message: "char-sums runs one exhaustive grid; give a single 'p'"
                            .to_string(),
                    });
                }
            }
        }

        let sigma = parse_key!("sigma", f64).unwrap_or(DEFAULT_SIGMA);
        let delta = parse_key!("delta", f64).unwrap_or(DEFAULT_DELTA);
        let epsilon = parse_key!("epsilon", f64).unwrap_or(DEFAULT_EPSILON);
        if !(0.0..0.5).contains(&sigma) {
            errors.push(ConfigError {
                line: self.entries.get("sigma").and_then(|(_, l)| *l),
                message: format!("sigma = {sigma} must lie in [0, 0.5)"),
            });
        }
        if delta <= 0.0 || delta >= 0.5 {
            errors.push(ConfigError {
                line: self.entries.get("delta").and_then(|(_, l)| *l),
                message: format!("delta = {delta} must lie in (0, 0.5)"),
            });
        }
        if delta <= sigma {
            errors.push(ConfigError {
                line: self.entries.get("delta").and_then(|(_, l)| *l),
                message: "delta must exceed sigma".to_string(),
            });
        }
        if epsilon <= 0.0 {
            errors.push(ConfigError {
                line: self.entries.get("epsilon").and_then(|(_, l)| *l),
                message: format!("epsilon = {epsilon} must be positive"),
            });
        }

        let trials = parse_key!("trials", u64).unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            errors.push(ConfigError {
                line: self.entries.get("trials").and_then(|(_, l)| *l),
                message: "trials must be at least 1".to_string(),
            });
        }
        let seed = parse_key!("seed", u64).unwrap_or(DEFAULT_SEED);

        let convention = match self.entries.get("convention") {
            Some((v, line)) => match v.as_str() {
                "paper" => Some(NormConvention::PaperSqrtP),
                "unit" => Some(NormConvention::UnitNorm),
                other => {
                    errors.push(ConfigError {
                        line: *line,
                        message: format!("convention must be 'paper' or 'unit', got '{other}'"),
                    });
                    None
                }
            },
            None => None,
        };
        // Recovery assumes unit columns; everything else defaults to the
        // paper scaling.
        let convention = convention.unwrap_or(match command {
            Some(Command::Recover) => NormConvention::UnitNorm,
            _ => NormConvention::PaperSqrtP,
        });

        let mode = match self.entries.get("mode") {
            Some((v, line)) => match v.as_str() {
                "theorem" => Mode::Theorem,
                "free" => Mode::Free,
                other => {
                    errors.push(ConfigError {
                        line: *line,
                        message: format!("mode must be 'theorem' or 'free', got '{other}'"),
                    });
                    Mode::Theorem
                }
            },
            None => Mode::Theorem,
        };

        let bound_constant = match self.entries.get("c") {
            Some((v, line)) => match v.as_str() {
                "2" => BoundConstant::Two,
                "pi" => BoundConstant::Pi,
                other => {
                    errors.push(ConfigError {
                        line: *line,
                        message: format!("c must be '2' or 'pi', got '{other}'"),
                    });
                    BoundConstant::Pi
                }
            },
            None => BoundConstant::Pi,
        };

        let method = match self.entries.get("method") {
            Some((v, line)) => match v.as_str() {
                "omp" => MethodKind::Omp,
                "ista" => MethodKind::Ista,
                other => {
                    errors.push(ConfigError {
                        line: *line,
                        message: format!("method must be 'omp' or 'ista', got '{other}'"),
                    });
                    MethodKind::Omp
                }
            },
            None => MethodKind::Omp,
        };

        let lambda = parse_key!("lambda", f64).unwrap_or(0.05);
        if lambda <= 0.0 {
            errors.push(ConfigError {
                line: self.entries.get("lambda").and_then(|(_, l)| *l),
                message: "lambda must be positive".to_string(),
            });
        }
        let iterations = parse_key!("iterations", usize).unwrap_or(300);

        let threads = parse_key!("threads", usize).unwrap_or(0);
        let points = parse_key!("points", usize).unwrap_or(DEFAULT_POINTS);
        if points < 2 {
            errors.push(ConfigError {
                line: self.entries.get("points").and_then(|(_, l)| *l),
                message: "points must be at least 2".to_string(),
            });
        }
        let flat_k = parse_key!("k", u64);
        let k_min = parse_key!("k-min", usize).unwrap_or(1);
        let k_max = parse_key!("k-max", usize).unwrap_or(8);
        if k_min > k_max {
            errors.push(ConfigError {
                line: self.entries.get("k-min").and_then(|(_, l)| *l),
                message: format!("k-min = {k_min} must not exceed k-max = {k_max}"),
            });
        }
        let m1len = parse_key!("m1len", u64);
        let m2len = parse_key!("m2len", u64);
        let n = parse_key!("n", u64);
        let out = self
            .entries
            .get("out")
            .map(|(v, _)| PathBuf::from(v.clone()));

        match (command, errors.is_empty()) {
            (Some(command), true) => Ok(ExperimentConfig {
                command,
                primes,
                sigma,
                delta,
                epsilon,
                trials,
                seed,
                convention,
                out,
                mode,
                threads,
                points,
                flat_k,
                k_min,
                k_max,
                m1len,
                m2len,
                n,
                bound_constant,
                method,
                lambda,
                iterations,
            }),
            _ => Err(errors),
        }
    }
}

/// Parse a config file on its own (no overrides).
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let mut b = ConfigBuilder::new();
    b.apply_file(text);
    b.build()
}
