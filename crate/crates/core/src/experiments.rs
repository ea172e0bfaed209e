//! Sweeps over noise level, key width and network size, with normal
//! approximation 95% confidence intervals and CSV/JSON output.

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::iedtc::{self, ProtocolError, RoundOptions, Schedule};
use crate::qsre::{self, AttackConfig, KeySource, PrivateKey, QsreError, SignConvention};
use crate::qstate::{haar_ket, StateRegistry};
use crate::simnet::Network;
use crate::topology::{build_butterfly, reference_resources, Protocol, ResourceTriple};
use crate::trials::{map_trials, trial_seed, Execution};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Qsre(#[from] QsreError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn config_err(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Config(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub half_width: f64,
}

impl Interval {
    pub fn lower(&self) -> f64 {
        self.estimate - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.estimate + self.half_width
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }
}

/// `p̂ ± 1.96·sqrt(p̂(1−p̂)/n)`.
pub fn binomial_ci(successes: u64, trials: u64) -> Result<Interval, ExperimentError> {
    if trials == 0 {
        return Err(config_err("binomial interval needs at least one trial"));
    }
    if successes > trials {
        return Err(config_err(format!("{successes} successes out of {trials} trials")));
    }
    let p = successes as f64 / trials as f64;
    Ok(Interval {
        estimate: p,
        half_width: Z_95 * (p * (1.0 - p) / trials as f64).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub estimate: f64,
    pub ci_half_width: f64,
    pub trials: u64,
    pub successes: u64,
}

impl SweepRow {
    fn new(x: f64, successes: u64, trials: u64) -> Result<Self, ExperimentError> {
        let ci = binomial_ci(successes, trials)?;
        Ok(Self {
            x,
            estimate: ci.estimate,
            ci_half_width: ci.half_width,
            trials,
            successes,
        })
    }

    pub fn interval(&self) -> Interval {
        Interval {
            estimate: self.estimate,
            half_width: self.ci_half_width,
        }
    }
}

/// Parses `start:end:step` (inclusive) or a single value.
pub fn parse_float_range(spec: &str) -> Result<Vec<f64>, ExperimentError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| config_err(format!("bad number '{s}' in range '{spec}'")))
    };
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step.is_nan() || step <= 0.0 || b < a {
                return Err(config_err(format!("empty or invalid range '{spec}'")));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            // round away accumulated binary noise
            Ok((0..count)
                .map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        _ => Err(config_err(format!("expected start:end:step, got '{spec}'"))),
    }
}

/// Parses `start:end` (inclusive), `start:end:step`, or a single value.
pub fn parse_int_range(spec: &str) -> Result<Vec<usize>, ExperimentError> {
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| config_err(format!("bad integer '{s}' in range '{spec}'")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let (a, b, step) = match parts.as_slice() {
        [v] => (num(v)?, num(v)?, 1),
        [a, b] => (num(a)?, num(b)?, 1),
        [a, b, s] => (num(a)?, num(b)?, num(s)?),
        _ => return Err(config_err(format!("bad range '{spec}'"))),
    };
    if step == 0 || b < a {
        return Err(config_err(format!("empty or invalid range '{spec}'")));
    }
    Ok((a..=b).step_by(step).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyConfig {
    pub n: usize,
    pub noise_levels: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub schedule: Schedule,
    /// Enables rotation encoding on every pair, chunk `t mod chunks` in
    /// trial `t`.
    pub qsre_key: Option<PrivateKey>,
    pub convention: SignConvention,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for AccuracyConfig {
    fn default() -> Self {
        Self {
            n: 2,
            noise_levels: (1..=10).map(|i| i as f64 / 100.0).collect(),
            trials: 1000,
            seed: 42,
            schedule: Schedule::Batched,
            qsre_key: None,
            convention: SignConvention::Formula,
            execution: Execution::Parallel,
        }
    }
}

impl AccuracyConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.n < 2 {
            return Err(config_err(format!("network size must be at least 2, got {}", self.n)));
        }
        if self.trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        if self.noise_levels.is_empty() {
            return Err(config_err("noise range is empty"));
        }
        if let Some(p) = self.noise_levels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(config_err(format!("noise level {p} outside [0, 1]")));
        }
        if let Some(k) = &self.qsre_key {
            if k.chunk_count() == 0 {
                return Err(config_err("key shorter than one chunk"));
            }
        }
        Ok(())
    }
}

/// Stream id for a noise level, so each sweep point has its own seeds.
fn noise_stream(p: f64) -> u64 {
    (p * 1e9).round() as u64
}

/// One noisy round with Haar-random inputs; `true` iff every pair succeeds.
/// A round that errors out counts as a failure.
pub fn accuracy_trial(cfg: &AccuracyConfig, noise: f64, trial: u64) -> bool {
    let seed = trial_seed(cfg.seed, noise_stream(noise), trial);
    let run = || -> Result<bool, ExperimentError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1A7E);
        let inputs: Vec<_> = (0..cfg.n).map(|_| haar_ket(&mut rng)).collect();
        let rotations = match &cfg.qsre_key {
            Some(key) => {
                let chunk = (trial % key.chunk_count() as u64) as usize;
                let spec = qsre::derive_rotation(key, chunk, cfg.convention)?;
                Some(vec![spec; cfg.n])
            }
            None => None,
        };
        let mut net = Network::new(build_butterfly(cfg.n).map_err(ProtocolError::from)?);
        let mut reg = StateRegistry::new(noise, seed).map_err(ProtocolError::from)?;
        let opts = RoundOptions {
            schedule: cfg.schedule,
            rotations,
            adversary: None,
        };
        Ok(iedtc::run_round_with(&mut net, &mut reg, &inputs, &opts)?.all_success)
    };
    run().unwrap_or(false)
}

pub fn run_accuracy_sweep(cfg: &AccuracyConfig) -> Result<Vec<SweepRow>, ExperimentError> {
    cfg.validate()?;
    cfg.noise_levels
        .iter()
        .map(|&p| {
            let wins = map_trials(cfg.trials, cfg.execution, |t| accuracy_trial(cfg, p, t))
                .into_iter()
                .filter(|&ok| ok)
                .count() as u64;
            SweepRow::new(p, wins, cfg.trials)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EavesdropConfig {
    pub n: usize,
    /// Total key bits per chunk (`2 + D`), each at least 3.
    pub bits: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub noise: f64,
    pub convention: SignConvention,
    pub key: Option<PrivateKey>,
    pub threshold: f64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for EavesdropConfig {
    fn default() -> Self {
        Self {
            n: 2,
            bits: (3..=8).collect(),
            trials: 500,
            seed: 42,
            noise: 0.0,
            convention: SignConvention::Formula,
            key: None,
            threshold: qsre::EAVESDROP_FIDELITY_THRESHOLD,
            execution: Execution::Parallel,
        }
    }
}

impl EavesdropConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.n < 2 {
            return Err(config_err(format!("network size must be at least 2, got {}", self.n)));
        }
        if self.trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        if self.bits.is_empty() {
            return Err(config_err("bits range is empty"));
        }
        if let Some(b) = self.bits.iter().find(|&&b| b < 3) {
            return Err(config_err(format!("bits read must be at least 3, got {b}")));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(config_err(format!("noise level {} outside [0, 1]", self.noise)));
        }
        if let Some(key) = &self.key {
            let max = *self.bits.iter().max().unwrap();
            if key.bits().len() < max {
                return Err(config_err(format!(
                    "key has {} bits but the sweep reads up to {max}",
                    key.bits().len()
                )));
            }
        }
        Ok(())
    }
}

pub fn run_eavesdrop_sweep(cfg: &EavesdropConfig) -> Result<Vec<SweepRow>, ExperimentError> {
    cfg.validate()?;
    cfg.bits
        .iter()
        .map(|&bits| {
            let attack = AttackConfig {
                n: cfg.n,
                chunk_width: bits - 2,
                use_qsre: true,
                trials: cfg.trials,
                seed: cfg.seed,
                noise: cfg.noise,
                convention: cfg.convention,
                target_pair: 1,
                threshold: cfg.threshold,
                key: cfg.key.clone().map(KeySource::Reuse).unwrap_or_default(),
                schedule: Schedule::Batched,
                execution: cfg.execution,
            };
            let stats = qsre::run_attack(&attack)?;
            SweepRow::new(bits as f64, stats.eavesdrop_successes, cfg.trials)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceRow {
    pub n: usize,
    pub total_links: usize,
    pub quantum_links: usize,
    /// Sum of per-node peaks under the batched schedule.
    pub peak_qubits: usize,
    pub peak_qubits_eager: usize,
    /// Network-wide simultaneous peak under the batched schedule.
    pub peak_live: usize,
    pub iedtc_reference: ResourceTriple,
    pub benchmark_reference: ResourceTriple,
    pub exceeds_reference: bool,
}

fn instrumented_round(n: usize, schedule: Schedule, seed: u64) -> Result<iedtc::RoundResult, ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<_> = (0..n).map(|_| haar_ket(&mut rng)).collect();
    let mut net = Network::new(build_butterfly(n).map_err(ProtocolError::from)?);
    let mut reg = StateRegistry::new(0.0, seed).map_err(ProtocolError::from)?;
    let opts = RoundOptions {
        schedule,
        ..RoundOptions::default()
    };
    Ok(iedtc::run_round_with(&mut net, &mut reg, &inputs, &opts)?)
}

pub fn run_resource_report(ns: &[usize]) -> Result<Vec<ResourceRow>, ExperimentError> {
    if ns.is_empty() {
        return Err(config_err("size range is empty"));
    }
    ns.iter()
        .map(|&n| {
            let topo = build_butterfly(n).map_err(ProtocolError::from)?;
            let (total_links, quantum_links) = topo.link_counts();
            let batched = instrumented_round(n, Schedule::Batched, n as u64)?;
            let eager = instrumented_round(n, Schedule::Eager, n as u64)?;
            let iedtc_reference = reference_resources(Protocol::Iedtc, n).map_err(ProtocolError::from)?;
            let benchmark_reference =
                reference_resources(Protocol::Benchmark, n).map_err(ProtocolError::from)?;
            let exceeds_reference = total_links > iedtc_reference.total_links
                || quantum_links > iedtc_reference.quantum_links
                || batched.peak_qubits > iedtc_reference.qubits;
            Ok(ResourceRow {
                n,
                total_links,
                quantum_links,
                peak_qubits: batched.peak_qubits,
                peak_qubits_eager: eager.peak_qubits,
                peak_live: batched.peak_live,
                iedtc_reference,
                benchmark_reference,
                exceeds_reference,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_resource_csv<W: Write>(rows: &[ResourceRow], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "total_links",
        "quantum_links",
        "peak_qubits",
        "peak_qubits_eager",
        "peak_live",
        "iedtc_total_links",
        "iedtc_quantum_links",
        "iedtc_qubits",
        "benchmark_total_links",
        "benchmark_quantum_links",
        "benchmark_qubits",
        "exceeds_reference",
    ])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.total_links.to_string(),
            r.quantum_links.to_string(),
            r.peak_qubits.to_string(),
            r.peak_qubits_eager.to_string(),
            r.peak_live.to_string(),
            r.iedtc_reference.total_links.to_string(),
            r.iedtc_reference.quantum_links.to_string(),
            r.iedtc_reference.qubits.to_string(),
            r.benchmark_reference.total_links.to_string(),
            r.benchmark_reference.quantum_links.to_string(),
            r.benchmark_reference.qubits.to_string(),
            r.exceeds_reference.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Echo of a run, written next to the CSV output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub version: String,
    pub config: serde_json::Value,
    pub rows: usize,
    pub elapsed_ms: u128,
}

impl RunManifest {
    pub fn new<C: Serialize>(experiment: &str, config: &C, rows: usize, started: Instant) -> Result<Self, ExperimentError> {
        Ok(Self {
            experiment: experiment.to_string(),
            version: format!("{}-{}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            config: serde_json::to_value(config)?,
            rows,
            elapsed_ms: started.elapsed().as_millis(),
        })
    }

    pub fn write<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ci_examples() {
        let ci = binomial_ci(925, 1000).unwrap();
        assert_abs_diff_eq!(ci.estimate, 0.925);
        assert_abs_diff_eq!(ci.half_width, 0.0163, epsilon = 5e-4);
        let ci = binomial_ci(0, 100).unwrap();
        assert_eq!((ci.estimate, ci.half_width), (0.0, 0.0));
        let ci = binomial_ci(447, 1000).unwrap();
        assert_abs_diff_eq!(ci.half_width, 0.0308, epsilon = 5e-4);
        assert!(binomial_ci(1, 0).is_err());
        assert!(binomial_ci(5, 4).is_err());
    }

    #[test]
    fn ranges() {
        let r = parse_float_range("0.01:0.10:0.01").unwrap();
        assert_eq!(r.len(), 10);
        assert_eq!(r[2], 0.03);
        assert_eq!(r[9], 0.1);
        assert_eq!(parse_float_range("0.05").unwrap(), vec![0.05]);
        assert!(parse_float_range("0.1:0.0:0.01").is_err());
        assert!(parse_float_range("a:b:c").is_err());
        assert_eq!(parse_int_range("3:8").unwrap(), vec![3, 4, 5, 6, 7, 8]);
        assert_eq!(parse_int_range("2:10:4").unwrap(), vec![2, 6, 10]);
        assert_eq!(parse_int_range("5").unwrap(), vec![5]);
        assert!(parse_int_range("8:3").is_err());
    }

    #[test]
    fn config_validation() {
        let bad = AccuracyConfig {
            trials: 0,
            ..AccuracyConfig::default()
        };
        assert!(run_accuracy_sweep(&bad).is_err());
        let bad = AccuracyConfig {
            noise_levels: vec![1.5],
            ..AccuracyConfig::default()
        };
        assert!(run_accuracy_sweep(&bad).is_err());
        let bad = EavesdropConfig {
            bits: vec![2],
            ..EavesdropConfig::default()
        };
        assert!(run_eavesdrop_sweep(&bad).is_err());
    }

    #[test]
    fn noiseless_sweep_is_exact() {
        let cfg = AccuracyConfig {
            noise_levels: vec![0.0],
            trials: 100,
            ..AccuracyConfig::default()
        };
        let rows = run_accuracy_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].estimate, 1.0);
        assert_eq!(rows[0].successes, 100);
    }

    #[test]
    fn sweep_csv_layout() {
        let rows = vec![SweepRow::new(0.01, 9, 10).unwrap()];
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,estimate,ci_half_width,trials,successes"));
        assert!(lines.next().unwrap().starts_with("0.01,0.9,"));
    }
}
