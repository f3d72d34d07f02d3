//! Monte Carlo sweeps of bit erasure probability against epsilon.
//!
//! Trial `t` at grid point `eps` uses
//!
//! * code seed `derive(master, "code", t)` (fresh-code policy), so trial `t`
//!   sees the same code at every grid point, and
//! * channel seed `derive2(master, "channel", eps.to_bits(), t)`.
//!
//! Per-trial results are collected in trial order and summed, so a report is
//! a pure function of the configuration and does not depend on the worker
//! count.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::channel::{check_epsilon, ErasurePattern};
use crate::code::CodeSpec;
use crate::decode::{is_stopping_set, peel};
use crate::error::{Error, Result};
use crate::fit::{self, FloorFit};
use crate::seed::{self, PRNG_NAME};
use crate::tanner::{TannerGraph, DEFAULT_VARIABLE_BUDGET};

pub const CSV_HEADER: &str = "epsilon,p_bit,trials,payload_bits,residual_bits,seconds";

#[derive(Debug, Clone, PartialEq)]
pub enum CodePolicy {
    /// Draw a new code for every trial.
    FreshPerTrial,
    /// Use one code for every trial.
    Fixed(CodeSpec),
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub n: usize,
    pub k: usize,
    pub w: u32,
    pub stream_len: usize,
    pub epsilons: Vec<f64>,
    pub trials: usize,
    pub policy: CodePolicy,
    pub master_seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    /// Record wall time per row. Timing is the only nondeterministic column.
    pub timing: bool,
    /// Stop after the row during which this much time has elapsed.
    pub deadline: Option<Duration>,
    pub variable_budget: usize,
    /// Trials `0..audit_trials` of each row have their residual re-checked
    /// as a stopping set when they fail.
    pub audit_trials: usize,
}

impl SweepConfig {
    /// Desk-scale defaults: L = 10^4, 100 trials, fresh code per trial.
    pub fn new(n: usize, k: usize, w: u32, epsilons: Vec<f64>) -> Self {
        SweepConfig {
            n,
            k,
            w,
            stream_len: 10_000,
            epsilons,
            trials: 100,
            policy: CodePolicy::FreshPerTrial,
            master_seed: 0,
            workers: 0,
            timing: true,
            deadline: None,
            variable_budget: DEFAULT_VARIABLE_BUDGET,
            audit_trials: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameters("trials must be >= 1".into()));
        }
        if self.epsilons.is_empty() {
            return Err(Error::InvalidParameters("empty epsilon grid".into()));
        }
        for &e in &self.epsilons {
            check_epsilon(e)?;
        }
        if let CodePolicy::Fixed(spec) = &self.policy {
            if (spec.n(), spec.k(), spec.w()) != (self.n, self.k, self.w) {
                return Err(Error::InvalidParameters(format!(
                    "fixed code is ({}, {}, {}), config says ({}, {}, {})",
                    spec.n(),
                    spec.k(),
                    spec.w(),
                    self.n,
                    self.k,
                    self.w
                )));
            }
        }
        // Validates (n, k, w) and the size budget up front.
        let probe = CodeSpec::sample(self.n, self.k, self.w, 0)?;
        TannerGraph::build_with_budget(&probe, self.stream_len, self.variable_budget)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub p_bit: f64,
    pub trials: u64,
    pub payload_bits: u64,
    pub residual_bits: u64,
    /// Trials with a nonempty residual.
    pub failures: u64,
    pub seconds: Option<f64>,
}

impl SweepRow {
    /// One-sigma binomial error of `p_bit`, treating every payload bit as a draw.
    pub fn sigma(&self) -> f64 {
        if self.payload_bits == 0 {
            return 0.0;
        }
        (self.p_bit * (1.0 - self.p_bit) / self.payload_bits as f64).sqrt()
    }

    /// `p_bit` with zero replaced by half a residual bit, for log-scale use.
    pub fn p_bit_floored(&self) -> f64 {
        if self.residual_bits == 0 {
            0.5 / self.payload_bits.max(1) as f64
        } else {
            self.p_bit
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// Sorted by epsilon.
    pub rows: Vec<SweepRow>,
    /// `key: value` pairs written as `#` lines above the CSV header.
    pub metadata: Vec<(String, String)>,
    pub truncated: bool,
    /// Failing trials whose residual was re-checked, and how many were not
    /// stopping sets (always zero unless the decoder is broken).
    pub audited: u64,
    pub audit_violations: u64,
}

struct TrialOutcome {
    residual: u64,
    audit: Option<bool>,
}

pub fn sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let mut grid = config.epsilons.clone();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::ResourceLimit(format!("thread pool: {e}")))?;

    let fixed_graph = match &config.policy {
        CodePolicy::Fixed(spec) => Some(TannerGraph::build_with_budget(
            spec,
            config.stream_len,
            config.variable_budget,
        )?),
        CodePolicy::FreshPerTrial => None,
    };
    let code_for = |t: u64| -> CodeSpec {
        CodeSpec::sample(
            config.n,
            config.k,
            config.w,
            seed::derive(config.master_seed, seed::tag::CODE, t),
        )
        .expect("validated")
    };

    let payload_per_trial = (config.n * config.stream_len) as u64;
    let started = Instant::now();
    let mut rows = Vec::with_capacity(grid.len());
    let mut truncated = false;
    let (mut audited, mut violations) = (0, 0);

    for (idx, &eps) in grid.iter().enumerate() {
        let row_start = Instant::now();
        let audit_trials = config.audit_trials;
        let outcomes: Vec<TrialOutcome> = pool.install(|| {
            (0..config.trials as u64)
                .into_par_iter()
                .map(|t| {
                    let owned;
                    let graph = match &fixed_graph {
                        Some(g) => g,
                        None => {
                            owned = TannerGraph::build_with_budget(
                                &code_for(t),
                                config.stream_len,
                                config.variable_budget,
                            )
                            .expect("validated");
                            &owned
                        }
                    };
                    let channel =
                        seed::derive2(config.master_seed, seed::tag::CHANNEL, eps.to_bits(), t);
                    let pattern = ErasurePattern::erase(graph, eps, channel).expect("validated");
                    let result = peel(graph, &pattern);
                    let audit = (!result.success && (t as usize) < audit_trials)
                        .then(|| is_stopping_set(graph, &result.residual).unwrap_or(false));
                    TrialOutcome {
                        residual: result.residual.len() as u64,
                        audit,
                    }
                })
                .collect()
        });
        let residual_bits: u64 = outcomes.iter().map(|o| o.residual).sum();
        let failures = outcomes.iter().filter(|o| o.residual > 0).count() as u64;
        for ok in outcomes.iter().filter_map(|o| o.audit) {
            audited += 1;
            if !ok {
                violations += 1;
            }
        }
        let payload_bits = payload_per_trial * config.trials as u64;
        rows.push(SweepRow {
            epsilon: eps,
            p_bit: residual_bits as f64 / payload_bits as f64,
            trials: config.trials as u64,
            payload_bits,
            residual_bits,
            failures,
            seconds: config.timing.then(|| row_start.elapsed().as_secs_f64()),
        });
        if let Some(limit) = config.deadline {
            if started.elapsed() > limit && idx + 1 < grid.len() {
                truncated = true;
                break;
            }
        }
    }

    let mut metadata = vec![
        (
            "tool".to_string(),
            format!("ticc {}", env!("CARGO_PKG_VERSION")),
        ),
        ("n".into(), config.n.to_string()),
        ("k".into(), config.k.to_string()),
        ("w".into(), config.w.to_string()),
        ("stream_len".into(), config.stream_len.to_string()),
        ("trials".into(), config.trials.to_string()),
        ("seed".into(), config.master_seed.to_string()),
        ("prng".into(), PRNG_NAME.to_string()),
    ];
    match &config.policy {
        CodePolicy::Fixed(spec) => {
            metadata.push(("code_policy".into(), "fixed".into()));
            metadata.push(("code_hash".into(), spec.hash()));
        }
        CodePolicy::FreshPerTrial => {
            metadata.push(("code_policy".into(), "fresh-per-trial".into()));
            let hashes: Vec<String> = (0..config.trials as u64)
                .map(|t| code_for(t).hash())
                .collect();
            metadata.push(("code_hash_first".into(), hashes[0].clone()));
            metadata.push(("code_hash_digest".into(), digest_of(&hashes)));
        }
    }
    let failures: Vec<String> = rows.iter().map(|r| r.failures.to_string()).collect();
    metadata.push(("failures".into(), failures.join(",")));
    metadata.push(("truncated".into(), truncated.to_string()));

    Ok(SweepReport {
        rows,
        metadata,
        truncated,
        audited,
        audit_violations: violations,
    })
}

fn digest_of(hashes: &[String]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for s in hashes {
        h.update(s.as_bytes());
        h.update(b"\n");
    }
    h.finalize()[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Six significant digits; exact zero prints as `0`.
pub fn format_probability(p: f64) -> String {
    if p == 0.0 {
        "0".to_string()
    } else {
        format!("{p:.5e}")
    }
}

impl SweepReport {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.epsilon, r.p_bit)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str(CSV_HEADER);
        out.push('\n');
        out.push_str(&self.data_rows());
        out
    }

    /// Only the data lines of the CSV.
    pub fn data_rows(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let seconds = r
                .seconds
                .map_or_else(|| "-".to_string(), |s| format!("{s:.3}"));
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.epsilon,
                format_probability(r.p_bit),
                r.trials,
                r.payload_bits,
                r.residual_bits,
                seconds
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        use crate::error::Location;
        let perr = |line: usize, msg: String| Error::Parse(Location { line, column: 1 }, msg);
        let mut metadata = Vec::new();
        let mut rows = Vec::new();
        let mut header_seen = false;
        for (i, line) in text.lines().enumerate() {
            let ln = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once(':') {
                    metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            if !header_seen {
                if line != CSV_HEADER {
                    return Err(perr(ln, format!("expected header `{CSV_HEADER}`")));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(perr(
                    ln,
                    format!("expected 6 fields, found {}", fields.len()),
                ));
            }
            let f = |i: usize| -> Result<f64> {
                fields[i]
                    .parse()
                    .map_err(|_| perr(ln, format!("bad number `{}`", fields[i])))
            };
            let u = |i: usize| -> Result<u64> {
                fields[i]
                    .parse()
                    .map_err(|_| perr(ln, format!("bad integer `{}`", fields[i])))
            };
            rows.push(SweepRow {
                epsilon: f(0)?,
                p_bit: f(1)?,
                trials: u(2)?,
                payload_bits: u(3)?,
                residual_bits: u(4)?,
                failures: 0,
                seconds: if fields[5] == "-" { None } else { Some(f(5)?) },
            });
        }
        if !header_seen {
            return Err(perr(1, "missing CSV header".into()));
        }
        let meta = |k: &str| {
            metadata
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v): &(String, String)| v.clone())
        };
        if let Some(f) = meta("failures") {
            let counts: Vec<&str> = f.split(',').collect();
            if counts.len() == rows.len() {
                for (row, c) in rows.iter_mut().zip(counts) {
                    row.failures = c.parse().unwrap_or(0);
                }
            }
        }
        let truncated = meta("truncated").is_some_and(|v| v == "true");
        rows.sort_by(|a, b| a.epsilon.partial_cmp(&b.epsilon).unwrap());
        Ok(SweepReport {
            rows,
            metadata,
            truncated,
            audited: 0,
            audit_violations: 0,
        })
    }

    pub fn fit_floor_slope(&self, lo: f64, hi: f64) -> Result<FloorFit<f64>> {
        fit::fit_floor_slope(&self.points(), lo..=hi)
    }

    /// Threshold at `level`; rows with no residual bits count as half a bit.
    pub fn threshold_estimate(&self, level: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .map(|r| (r.epsilon, r.p_bit_floored()))
            .collect();
        fit::threshold_estimate(&pts, level)
    }

    /// Threshold and a one-sigma error bar from shifting every row by its
    /// binomial sigma in both directions.
    pub fn threshold_with_sigma(&self, level: f64) -> Result<(f64, f64)> {
        let center = self.threshold_estimate(level)?;
        let shifted = |sign: f64| {
            let pts: Vec<(f64, f64)> = self
                .rows
                .iter()
                .map(|r| {
                    let p = (r.p_bit + sign * r.sigma()).clamp(0.0, 1.0);
                    (r.epsilon, if p > 0.0 { p } else { r.p_bit_floored() })
                })
                .collect();
            fit::threshold_estimate(&pts, level)
        };
        let up = shifted(1.0).unwrap_or(center);
        let down = shifted(-1.0).unwrap_or(center);
        Ok((center, (down - up).abs() / 2.0))
    }
}
