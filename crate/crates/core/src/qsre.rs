//! Rotation encoding of teleported states and the malicious-entanglement
//! adversary.
//!
//! Chunk `i` of a pre-shared key is `2 + D` bits: an axis bit (0 = X,
//! 1 = Y), a sign bit `b`, then `D` magnitude bits `d` read most-significant
//! first. The rotation angle is `π / ((−1)^b · (1 + d))`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiments::{binomial_ci, Interval};
use crate::iedtc::{self, Adversary, ProtocolError, RoundOptions, Schedule, SUCCESS_FIDELITY};
use crate::qstate::{haar_ket, Gate, QubitId, StateError, StateRegistry};
use crate::simnet::Network;
use crate::topology::build_butterfly;
use crate::trials::{map_trials, trial_seed, Execution};

/// Fidelity at which an eavesdropped state is indistinguishable from the
/// original.
pub const EAVESDROP_FIDELITY_THRESHOLD: f64 = 0.99;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsreError {
    #[error("chunk width must be at least 1")]
    ZeroWidth,
    #[error("key has {have} bits, chunk {chunk} needs {needed}")]
    KeyTooShort { chunk: usize, needed: usize, have: usize },
    #[error("invalid key character {0:?}")]
    BadKeyChar(char),
    #[error("cannot read key file: {0}")]
    Io(String),
    #[error("unknown sign convention '{0}' (expected 'formula' or 'example')")]
    UnknownConvention(String),
    #[error("attack needs at least one trial")]
    NoTrials,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Pre-shared key split into chunks of `2 + chunk_width` bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivateKey {
    bits: Vec<bool>,
    chunk_width: usize,
}

impl PrivateKey {
    pub fn new(bits: Vec<bool>, chunk_width: usize) -> Result<Self, QsreError> {
        if chunk_width == 0 {
            return Err(QsreError::ZeroWidth);
        }
        Ok(Self { bits, chunk_width })
    }

    /// Parses a string of '0'/'1' characters; surrounding whitespace is
    /// ignored.
    pub fn parse(text: &str, chunk_width: usize) -> Result<Self, QsreError> {
        let bits = text
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(QsreError::BadKeyChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(bits, chunk_width)
    }

    pub fn from_file(path: impl AsRef<Path>, chunk_width: usize) -> Result<Self, QsreError> {
        let text = std::fs::read_to_string(path).map_err(|e| QsreError::Io(e.to_string()))?;
        Self::parse(&text, chunk_width)
    }

    /// Uniformly random key holding `chunks` chunks.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, chunks: usize, chunk_width: usize) -> Result<Self, QsreError> {
        let len = chunks * (2 + chunk_width);
        Self::new((0..len).map(|_| rng.random()).collect(), chunk_width)
    }

    pub fn chunk_width(&self) -> usize {
        self.chunk_width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn chunk_len(&self) -> usize {
        2 + self.chunk_width
    }

    pub fn chunk_count(&self) -> usize {
        self.bits.len() / self.chunk_len()
    }

    pub fn chunk(&self, i: usize) -> Result<&[bool], QsreError> {
        let len = self.chunk_len();
        let end = (i + 1) * len;
        if end > self.bits.len() {
            return Err(QsreError::KeyTooShort {
                chunk: i,
                needed: end,
                have: self.bits.len(),
            });
        }
        Ok(&self.bits[i * len..end])
    }

    /// Same bits, re-chunked with a different magnitude width.
    pub fn with_chunk_width(&self, chunk_width: usize) -> Result<Self, QsreError> {
        Self::new(self.bits.clone(), chunk_width)
    }
}

impl fmt::Display for PrivateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// How the sign bit maps to a rotation direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignConvention {
    /// `(−1)^b`: `b = 1` rotates in the negative direction.
    #[default]
    Formula,
    /// `b = 0` rotates in the negative direction.
    Example,
}

impl FromStr for SignConvention {
    type Err = QsreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "formula" => Ok(Self::Formula),
            "example" => Ok(Self::Example),
            _ => Err(QsreError::UnknownConvention(s.to_string())),
        }
    }
}

impl SignConvention {
    fn is_negative(self, sign_bit: bool) -> bool {
        match self {
            Self::Formula => sign_bit,
            Self::Example => !sign_bit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    pub axis: Axis,
    pub sign_bit: bool,
    pub magnitude: u32,
    pub angle: f64,
}

impl RotationSpec {
    pub fn new(axis: Axis, sign_bit: bool, magnitude: u32, convention: SignConvention) -> Self {
        let base = PI / (1.0 + magnitude as f64);
        let angle = if convention.is_negative(sign_bit) { -base } else { base };
        Self {
            axis,
            sign_bit,
            magnitude,
            angle,
        }
    }

    pub fn gate(&self) -> Gate {
        self.gate_with(self.angle)
    }

    pub fn inverse_gate(&self) -> Gate {
        self.gate_with(-self.angle)
    }

    fn gate_with(&self, angle: f64) -> Gate {
        match self.axis {
            Axis::X => Gate::Rx(angle),
            Axis::Y => Gate::Ry(angle),
        }
    }

    /// Same axis, sign bit and magnitude.
    pub fn same_parameters(&self, other: &RotationSpec) -> bool {
        self.axis == other.axis && self.sign_bit == other.sign_bit && self.magnitude == other.magnitude
    }
}

/// `π / ((−1)^b · (1 + d))`.
pub fn rotation_angle(b: bool, d: u32) -> f64 {
    let sign = if b { -1.0 } else { 1.0 };
    PI / (sign * (1.0 + d as f64))
}

pub fn derive_rotation(
    key: &PrivateKey,
    i: usize,
    convention: SignConvention,
) -> Result<RotationSpec, QsreError> {
    let chunk = key.chunk(i)?;
    let axis = if chunk[0] { Axis::Y } else { Axis::X };
    let magnitude = chunk[2..].iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
    Ok(RotationSpec::new(axis, chunk[1], magnitude, convention))
}

pub fn encode_state(reg: &mut StateRegistry, q: QubitId, spec: &RotationSpec) -> Result<(), StateError> {
    reg.apply_gate(spec.gate(), &[q])
}

pub fn decode_state(reg: &mut StateRegistry, q: QubitId, spec: &RotationSpec) -> Result<(), StateError> {
    reg.apply_gate(spec.inverse_gate(), &[q])
}

/// Uniform draw over the `2 · 2 · 2^D` rotation specs.
pub fn random_guess<R: Rng + ?Sized>(chunk_width: usize, rng: &mut R, convention: SignConvention) -> RotationSpec {
    let axis = if rng.random() { Axis::Y } else { Axis::X };
    let sign_bit = rng.random();
    let magnitude = rng.random_range(0..(1u32 << chunk_width));
    RotationSpec::new(axis, sign_bit, magnitude, convention)
}

/// Where the legitimate pair's key material comes from in each trial.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum KeySource {
    /// A fresh random chunk per trial.
    #[default]
    Fresh,
    /// Chunk 0 of this key in every trial.
    Reuse(PrivateKey),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackConfig {
    pub n: usize,
    pub chunk_width: usize,
    pub use_qsre: bool,
    pub trials: u64,
    pub seed: u64,
    pub noise: f64,
    pub convention: SignConvention,
    pub target_pair: usize,
    pub threshold: f64,
    pub key: KeySource,
    pub schedule: Schedule,
    pub execution: Execution,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            n: 2,
            chunk_width: 2,
            use_qsre: true,
            trials: 500,
            seed: 42,
            noise: 0.0,
            convention: SignConvention::Formula,
            target_pair: 1,
            threshold: EAVESDROP_FIDELITY_THRESHOLD,
            key: KeySource::Fresh,
            schedule: Schedule::Batched,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackStats {
    pub trials: u64,
    pub eavesdrop_successes: u64,
    pub legit_successes: u64,
    pub eavesdrop_rate: Interval,
    pub legit_rate: Interval,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackTrial {
    pub eavesdrop_fidelity: f64,
    pub legit_fidelity: f64,
    pub eavesdrop_success: bool,
    pub legit_success: bool,
}

/// One IEDTC round in which the assister of `cfg.target_pair` hijacks that
/// pair and decodes the payload from the broadcast teleport message.
pub fn run_attack_trial(cfg: &AttackConfig, trial: u64) -> Result<AttackTrial, QsreError> {
    let seed = trial_seed(cfg.seed, cfg.chunk_width as u64, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED);
    let n = cfg.n;
    let inputs: Vec<_> = (0..n).map(|_| haar_ket(&mut rng)).collect();

    let mut rotations = None;
    let mut guess = None;
    if cfg.use_qsre {
        let mut specs = Vec::with_capacity(n);
        for k in 1..=n {
            let spec = match (&cfg.key, k == cfg.target_pair) {
                (KeySource::Reuse(key), true) => {
                    derive_rotation(&key.with_chunk_width(cfg.chunk_width)?, 0, cfg.convention)?
                }
                _ => {
                    let key = PrivateKey::random(&mut rng, 1, cfg.chunk_width)?;
                    derive_rotation(&key, 0, cfg.convention)?
                }
            };
            specs.push(spec);
        }
        rotations = Some(specs);
        guess = Some(random_guess(cfg.chunk_width, &mut rng, cfg.convention));
    }

    let mut net = Network::new(build_butterfly(n).map_err(ProtocolError::from)?);
    let mut reg = StateRegistry::new(cfg.noise, seed).map_err(ProtocolError::from)?;
    let opts = RoundOptions {
        schedule: cfg.schedule,
        rotations,
        adversary: Some(Adversary {
            target_pair: cfg.target_pair,
            guess,
        }),
    };
    let res = iedtc::run_round_with(&mut net, &mut reg, &inputs, &opts)?;
    let eve = res.eavesdrop.map(|e| e.fidelity).unwrap_or(0.0);
    let legit = res.pairs[cfg.target_pair - 1].fidelity;
    Ok(AttackTrial {
        eavesdrop_fidelity: eve,
        legit_fidelity: legit,
        eavesdrop_success: eve >= cfg.threshold,
        legit_success: legit >= SUCCESS_FIDELITY,
    })
}

pub fn run_attack(cfg: &AttackConfig) -> Result<AttackStats, QsreError> {
    if cfg.trials == 0 {
        return Err(QsreError::NoTrials);
    }
    if cfg.chunk_width == 0 {
        return Err(QsreError::ZeroWidth);
    }
    let outcomes = map_trials(cfg.trials, cfg.execution, |t| run_attack_trial(cfg, t));
    let mut eve = 0;
    let mut legit = 0;
    for o in outcomes {
        let o = o?;
        eve += o.eavesdrop_success as u64;
        legit += o.legit_success as u64;
    }
    Ok(AttackStats {
        trials: cfg.trials,
        eavesdrop_successes: eve,
        legit_successes: legit,
        eavesdrop_rate: binomial_ci(eve, cfg.trials).expect("trials > 0"),
        legit_rate: binomial_ci(legit, cfg.trials).expect("trials > 0"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{ket_one, ket_zero};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn key(s: &str, d: usize) -> PrivateKey {
        PrivateKey::parse(s, d).unwrap()
    }

    #[test]
    fn derive_examples() {
        let s = derive_rotation(&key("1011", 2), 0, SignConvention::Formula).unwrap();
        assert_eq!((s.axis, s.sign_bit, s.magnitude), (Axis::Y, false, 3));
        let s = derive_rotation(&key("0000", 2), 0, SignConvention::Formula).unwrap();
        assert_eq!((s.axis, s.sign_bit, s.magnitude), (Axis::X, false, 0));
        assert_abs_diff_eq!(s.angle.abs(), PI);
        let s = derive_rotation(&key("0100", 2), 0, SignConvention::Formula).unwrap();
        assert_eq!((s.axis, s.sign_bit, s.magnitude), (Axis::X, true, 0));
        assert_abs_diff_eq!(s.angle, -PI);
    }

    #[test]
    fn example_convention_makes_1011_negative() {
        let s = derive_rotation(&key("1011", 2), 0, SignConvention::Example).unwrap();
        assert_abs_diff_eq!(s.angle, -PI / 4.0);
        let s = derive_rotation(&key("1011", 2), 0, SignConvention::Formula).unwrap();
        assert_abs_diff_eq!(s.angle, PI / 4.0);
    }

    #[test]
    fn key_text_tolerates_trailing_newline_only() {
        assert_eq!(key("0000\n", 2).chunk_count(), 1);
        assert_eq!(PrivateKey::parse("0000\n1011", 2), Err(QsreError::BadKeyChar('\n')));
    }

    #[test]
    fn chunk_indexing() {
        let k = key("00001011", 2);
        assert_eq!(k.chunk_count(), 2);
        let s = derive_rotation(&k, 1, SignConvention::Formula).unwrap();
        assert_eq!(s.magnitude, 3);
        assert!(matches!(
            derive_rotation(&k, 2, SignConvention::Formula),
            Err(QsreError::KeyTooShort { chunk: 2, .. })
        ));
        assert_eq!(PrivateKey::parse("0120", 2), Err(QsreError::BadKeyChar('2')));
        assert_eq!(PrivateKey::parse("0101", 0), Err(QsreError::ZeroWidth));
    }

    #[test]
    fn angle_formula() {
        assert_abs_diff_eq!(rotation_angle(false, 0), PI);
        assert_abs_diff_eq!(rotation_angle(false, 3), PI / 4.0);
        assert_abs_diff_eq!(rotation_angle(true, 3), -PI / 4.0);
    }

    #[test]
    fn encode_examples() {
        let mut reg = StateRegistry::new(0.0, 1).unwrap();
        let q = reg.alloc_qubit(ket_zero()).unwrap();
        let spec = RotationSpec::new(Axis::X, false, 0, SignConvention::Formula);
        encode_state(&mut reg, q, &spec).unwrap();
        assert_abs_diff_eq!(reg.fidelity(q, &ket_one()).unwrap(), 1.0, epsilon = 1e-12);
        decode_state(&mut reg, q, &spec).unwrap();
        assert_abs_diff_eq!(reg.fidelity(q, &ket_zero()).unwrap(), 1.0, epsilon = 1e-12);

        let p = reg.alloc_qubit(ket_zero()).unwrap();
        let half = RotationSpec {
            axis: Axis::Y,
            sign_bit: false,
            magnitude: 1,
            angle: FRAC_PI_2,
        };
        encode_state(&mut reg, p, &half).unwrap();
        assert_abs_diff_eq!(reg.fidelity(p, &ket_zero()).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn wrong_axis_decode_fails_wrong_sign_at_pi_passes() {
        let mut reg = StateRegistry::new(0.0, 1).unwrap();
        let q = reg.alloc_qubit(ket_zero()).unwrap();
        let x = RotationSpec::new(Axis::X, false, 1, SignConvention::Formula);
        let y = RotationSpec::new(Axis::Y, false, 1, SignConvention::Formula);
        encode_state(&mut reg, q, &x).unwrap();
        decode_state(&mut reg, q, &y).unwrap();
        assert!(reg.fidelity(q, &ket_zero()).unwrap() < 1.0 - 1e-6);

        let p = reg.alloc_qubit(ket_zero()).unwrap();
        let pos = RotationSpec::new(Axis::X, false, 0, SignConvention::Formula);
        let neg = RotationSpec::new(Axis::X, true, 0, SignConvention::Formula);
        encode_state(&mut reg, p, &pos).unwrap();
        decode_state(&mut reg, p, &neg).unwrap();
        assert_abs_diff_eq!(reg.fidelity(p, &ket_zero()).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn guesses_cover_the_spec_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..2000 {
            let g = random_guess(2, &mut rng, SignConvention::Formula);
            assert!(g.magnitude < 4);
            seen.insert((g.axis, g.sign_bit, g.magnitude));
        }
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn attack_requires_trials() {
        let cfg = AttackConfig {
            trials: 0,
            ..AttackConfig::default()
        };
        assert_eq!(run_attack(&cfg), Err(QsreError::NoTrials));
    }

    #[test]
    fn unprotected_attack_always_succeeds() {
        let cfg = AttackConfig {
            use_qsre: false,
            trials: 40,
            ..AttackConfig::default()
        };
        let stats = run_attack(&cfg).unwrap();
        assert_eq!(stats.eavesdrop_successes, 40);
        assert_eq!(stats.legit_successes, 0);
    }
}
