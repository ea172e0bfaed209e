//! Pure-state qubit registry.
//!
//! Qubits are grouped into clusters: each cluster owns a dense amplitude
//! vector over the qubits that have become entangled with one another. Two
//! clusters are only merged when a two-qubit gate straddles them, so `K`
//! independent Bell pairs cost `K` vectors of four amplitudes rather than one
//! vector of `4^K`.
//!
//! Every gate application passes through a single noise hook: with
//! probability `noise_prob`, independently for each target qubit, a Pauli
//! drawn uniformly from {X, Y, Z} is applied after the gate. Measurements are
//! noise free.

use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Single-qubit state vector `(a0, a1)`.
pub type Ket = [Complex64; 2];

/// Normalization tolerance for amplitudes handed to the registry.
pub const NORM_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn ket_zero() -> Ket {
    [ONE, ZERO]
}

pub fn ket_one() -> Ket {
    [ZERO, ONE]
}

pub fn ket_plus() -> Ket {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [h, h]
}

/// Draws a state uniformly from the Bloch sphere (Haar measure on one qubit).
pub fn haar_ket<R: Rng + ?Sized>(rng: &mut R) -> Ket {
    loop {
        let v: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return [
                Complex64::new(v[0] / norm, v[1] / norm),
                Complex64::new(v[2] / norm, v[3] / norm),
            ];
        }
    }
}

/// `|<a|b>|^2` for two single-qubit kets.
pub fn overlap(a: &Ket, b: &Ket) -> f64 {
    (a[0].conj() * b[0] + a[1].conj() * b[1]).norm_sqr()
}

fn norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// Opaque handle to a live qubit. Handles are never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QubitId(u64);

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    X,
    Y,
    Z,
    H,
    /// Control first, target second.
    Cnot,
    /// `exp(-i θ X / 2)`
    Rx(f64),
    /// `exp(-i θ Y / 2)`
    Ry(f64),
}

type Mat2 = [[Complex64; 2]; 2];

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::Cnot => 2,
            _ => 1,
        }
    }

    /// 2x2 matrix of a single-qubit gate, `None` for CNOT.
    pub fn matrix(&self) -> Option<Mat2> {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Some(match *self {
            Gate::X => [[ZERO, ONE], [ONE, ZERO]],
            Gate::Y => [[ZERO, -I], [I, ZERO]],
            Gate::Z => [[ONE, ZERO], [ZERO, -ONE]],
            Gate::H => [[h, h], [h, -h]],
            Gate::Rx(theta) => {
                let c = Complex64::new((theta / 2.0).cos(), 0.0);
                let s = Complex64::new(0.0, -(theta / 2.0).sin());
                [[c, s], [s, c]]
            }
            Gate::Ry(theta) => {
                let c = Complex64::new((theta / 2.0).cos(), 0.0);
                let s = Complex64::new((theta / 2.0).sin(), 0.0);
                [[c, -s], [s, c]]
            }
            Gate::Cnot => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn gate(self) -> Gate {
        match self {
            Pauli::X => Gate::X,
            Pauli::Y => Gate::Y,
            Pauli::Z => Gate::Z,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("noise probability {0} is outside [0, 1]")]
    InvalidNoise(f64),
    #[error("amplitudes are not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("qubit {0} is not live")]
    DeadQubit(QubitId),
    #[error("qubit {0} appears more than once among the targets")]
    DuplicateTarget(QubitId),
    #[error("{gate:?} takes {expected} target(s), got {got}")]
    Arity {
        gate: Gate,
        expected: usize,
        got: usize,
    },
    #[error("rotation angle must be finite")]
    NonFiniteAngle,
}

/// Index of `i` with a zero bit inserted at position `pos`.
#[inline]
fn insert_bit(i: usize, pos: usize, bit: usize) -> usize {
    let low = i & ((1 << pos) - 1);
    ((i >> pos) << (pos + 1)) | (bit << pos) | low
}

#[derive(Debug, Clone)]
struct Cluster {
    /// Qubit at position `j` is bit `j` of the amplitude index.
    qubits: Vec<QubitId>,
    amps: Vec<Complex64>,
}

impl Cluster {
    fn position(&self, q: QubitId) -> usize {
        self.qubits
            .iter()
            .position(|&x| x == q)
            .expect("owner map and cluster disagree")
    }

    fn apply_single(&mut self, pos: usize, m: &Mat2) {
        let bit = 1 << pos;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a = self.amps[i];
                let b = self.amps[i | bit];
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let (c, t) = (1 << control, 1 << target);
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    fn tensor(self, other: Cluster) -> Cluster {
        let shift = self.qubits.len();
        let mut amps = vec![ZERO; self.amps.len() * other.amps.len()];
        for (ib, b) in other.amps.iter().enumerate() {
            for (ia, a) in self.amps.iter().enumerate() {
                amps[ia | (ib << shift)] = a * b;
            }
        }
        let mut qubits = self.qubits;
        qubits.extend(other.qubits);
        Cluster { qubits, amps }
    }

    /// Squared magnitude of the branch where the qubit at `pos` reads 1.
    fn prob_one(&self, pos: usize) -> f64 {
        let bit = 1 << pos;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects the qubit at `pos` onto `outcome` and removes it.
    fn collapse(mut self, pos: usize, outcome: usize) -> Cluster {
        let half = self.amps.len() / 2;
        let mut amps: Vec<Complex64> = (0..half)
            .map(|r| self.amps[insert_bit(r, pos, outcome)])
            .collect();
        let n = norm_sqr(&amps).sqrt();
        for a in &mut amps {
            *a /= n;
        }
        self.qubits.remove(pos);
        Cluster {
            qubits: self.qubits,
            amps,
        }
    }

    /// Reduced 2x2 density matrix of the qubit at `pos`.
    fn reduced(&self, pos: usize) -> Mat2 {
        let bit = 1 << pos;
        let mut rho = [[ZERO; 2]; 2];
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a = self.amps[i];
                let b = self.amps[i | bit];
                rho[0][0] += a * a.conj();
                rho[0][1] += a * b.conj();
                rho[1][1] += b * b.conj();
            }
        }
        rho[1][0] = rho[0][1].conj();
        rho
    }

    /// Reduced 4x4 density matrix of two qubits in this cluster,
    /// indexed `x1 + 2 * x2`.
    fn reduced_pair(&self, p1: usize, p2: usize) -> [[Complex64; 4]; 4] {
        let (lo, hi) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
        let rest = self.amps.len() / 4;
        let mut rho = [[ZERO; 4]; 4];
        for r in 0..rest {
            let base = insert_bit(insert_bit(r, lo, 0), hi, 0);
            let idx = |x: usize| base | ((x & 1) << p1) | ((x >> 1) << p2);
            for x in 0..4 {
                let a = self.amps[idx(x)];
                for y in 0..4 {
                    rho[x][y] += a * self.amps[idx(y)].conj();
                }
            }
        }
        rho
    }
}

/// Applies a one-qubit matrix to position `pos` (0 or 1) of every row of a
/// 4x4 operator held as columns-on-the-right, i.e. `u <- (m ⊗ I) u`.
fn left_mul_single(u: &mut [[Complex64; 4]; 4], pos: usize, m: &Mat2) {
    let bit = 1 << pos;
    for col in 0..4 {
        for row in 0..4 {
            if row & bit == 0 {
                let a = u[row][col];
                let b = u[row | bit][col];
                u[row][col] = m[0][0] * a + m[0][1] * b;
                u[row | bit][col] = m[1][0] * a + m[1][1] * b;
            }
        }
    }
}

fn left_mul_cnot(u: &mut [[Complex64; 4]; 4]) {
    // control bit 0, target bit 1: swaps rows 1 and 3
    u.swap(1, 3);
}

/// Owns every live qubit of one simulation run.
#[derive(Debug, Clone)]
pub struct StateRegistry {
    clusters: HashMap<u64, Cluster>,
    owner: HashMap<QubitId, u64>,
    next_cluster: u64,
    next_qubit: u64,
    noise_prob: f64,
    rng: ChaCha8Rng,
    seed: u64,
    live: usize,
    peak: usize,
    max_cluster_amps: usize,
    noise_events: u64,
}

impl StateRegistry {
    pub fn new(noise_prob: f64, seed: u64) -> Result<Self, StateError> {
        if !(0.0..=1.0).contains(&noise_prob) {
            return Err(StateError::InvalidNoise(noise_prob));
        }
        Ok(Self {
            clusters: HashMap::new(),
            owner: HashMap::new(),
            next_cluster: 0,
            next_qubit: 0,
            noise_prob,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            live: 0,
            peak: 0,
            max_cluster_amps: 0,
            noise_events: 0,
        })
    }

    pub fn noise_prob(&self) -> f64 {
        self.noise_prob
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of currently live qubits.
    pub fn live_count(&self) -> usize {
        self.live
    }

    /// Maximum number of simultaneously live qubits seen so far.
    pub fn peak_alloc(&self) -> usize {
        self.peak
    }

    /// Total number of qubits ever allocated.
    pub fn alloc_counter(&self) -> u64 {
        self.next_qubit
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    /// Largest amplitude vector any cluster has held.
    pub fn max_cluster_amplitudes(&self) -> usize {
        self.max_cluster_amps
    }

    /// Number of Pauli errors injected so far.
    pub fn noise_events(&self) -> u64 {
        self.noise_events
    }

    pub fn is_live(&self, q: QubitId) -> bool {
        self.owner.contains_key(&q)
    }

    /// Squared norms of every cluster, for invariant checks.
    pub fn cluster_norms(&self) -> Vec<f64> {
        self.clusters.values().map(|c| norm_sqr(&c.amps)).collect()
    }

    /// Qubits sharing a cluster with `q`, in amplitude-index bit order.
    pub fn cluster_of(&self, q: QubitId) -> Result<Vec<QubitId>, StateError> {
        let cid = self.cluster_id(q)?;
        Ok(self.clusters[&cid].qubits.clone())
    }

    /// Copy of the amplitude vector of `q`'s cluster together with its
    /// qubit order (qubit `j` is bit `j` of the index).
    pub fn amplitudes(&self, q: QubitId) -> Result<(Vec<QubitId>, Vec<Complex64>), StateError> {
        let c = &self.clusters[&self.cluster_id(q)?];
        Ok((c.qubits.clone(), c.amps.clone()))
    }

    fn cluster_id(&self, q: QubitId) -> Result<u64, StateError> {
        self.owner.get(&q).copied().ok_or(StateError::DeadQubit(q))
    }

    fn insert_cluster(&mut self, cluster: Cluster) -> u64 {
        let cid = self.next_cluster;
        self.next_cluster += 1;
        for &q in &cluster.qubits {
            self.owner.insert(q, cid);
        }
        self.max_cluster_amps = self.max_cluster_amps.max(cluster.amps.len());
        self.clusters.insert(cid, cluster);
        cid
    }

    fn retire(&mut self, q: QubitId) {
        self.owner.remove(&q);
        self.live -= 1;
    }

    pub fn alloc_qubit(&mut self, amplitudes: Ket) -> Result<QubitId, StateError> {
        let n = norm_sqr(&amplitudes);
        if !n.is_finite() || (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(StateError::NotNormalized(n));
        }
        let q = QubitId(self.next_qubit);
        self.next_qubit += 1;
        self.insert_cluster(Cluster {
            qubits: vec![q],
            amps: amplitudes.to_vec(),
        });
        self.live += 1;
        self.peak = self.peak.max(self.live);
        Ok(q)
    }

    fn validate_targets(&self, gate: Gate, targets: &[QubitId]) -> Result<(), StateError> {
        if targets.len() != gate.arity() {
            return Err(StateError::Arity {
                gate,
                expected: gate.arity(),
                got: targets.len(),
            });
        }
        if let Gate::Rx(t) | Gate::Ry(t) = gate {
            if !t.is_finite() {
                return Err(StateError::NonFiniteAngle);
            }
        }
        for (i, &q) in targets.iter().enumerate() {
            if !self.is_live(q) {
                return Err(StateError::DeadQubit(q));
            }
            if targets[..i].contains(&q) {
                return Err(StateError::DuplicateTarget(q));
            }
        }
        Ok(())
    }

    /// The noise channel: one independent draw per target qubit.
    fn draw_noise(&mut self) -> Option<Pauli> {
        if self.noise_prob <= 0.0 || self.rng.random::<f64>() >= self.noise_prob {
            return None;
        }
        self.noise_events += 1;
        Some(match self.rng.random_range(0..3) {
            0 => Pauli::X,
            1 => Pauli::Y,
            _ => Pauli::Z,
        })
    }

    fn apply_unitary(&mut self, gate: Gate, targets: &[QubitId]) {
        match gate.matrix() {
            Some(m) => {
                let cid = self.owner[&targets[0]];
                let cluster = self.clusters.get_mut(&cid).unwrap();
                let pos = cluster.position(targets[0]);
                cluster.apply_single(pos, &m);
            }
            None => {
                let (ca, cb) = (self.owner[&targets[0]], self.owner[&targets[1]]);
                let cid = if ca == cb {
                    ca
                } else {
                    let a = self.clusters.remove(&ca).unwrap();
                    let b = self.clusters.remove(&cb).unwrap();
                    self.insert_cluster(a.tensor(b))
                };
                let cluster = self.clusters.get_mut(&cid).unwrap();
                let (pc, pt) = (cluster.position(targets[0]), cluster.position(targets[1]));
                cluster.apply_cnot(pc, pt);
            }
        }
    }

    /// Applies `gate` followed by the noise hook on each target.
    pub fn apply_gate(&mut self, gate: Gate, targets: &[QubitId]) -> Result<(), StateError> {
        self.validate_targets(gate, targets)?;
        self.apply_unitary(gate, targets);
        for &q in targets {
            if let Some(p) = self.draw_noise() {
                self.apply_unitary(p.gate(), &[q]);
            }
        }
        Ok(())
    }

    /// Prepares `(|00> + |11>)/√2` as alloc, alloc, H, CNOT.
    pub fn create_bell_pair(&mut self) -> Result<(QubitId, QubitId), StateError> {
        let a = self.alloc_qubit(ket_zero())?;
        let b = self.alloc_qubit(ket_zero())?;
        self.apply_gate(Gate::H, &[a])?;
        self.apply_gate(Gate::Cnot, &[a, b])?;
        Ok((a, b))
    }

    /// Computational-basis measurement. Consumes `q`.
    pub fn measure(&mut self, q: QubitId) -> Result<bool, StateError> {
        let cid = self.cluster_id(q)?;
        let cluster = self.clusters.remove(&cid).unwrap();
        let pos = cluster.position(q);
        let p1 = cluster.prob_one(pos) / norm_sqr(&cluster.amps);
        let outcome = self.rng.random::<f64>() < p1;
        let rest = cluster.collapse(pos, outcome as usize);
        self.retire(q);
        if !rest.qubits.is_empty() {
            let cid = self.insert_cluster(rest);
            let _ = cid;
        }
        Ok(outcome)
    }

    /// Bell-basis measurement realized as CNOT(q1 -> q2), H(q1), then
    /// measurement of q1 and q2. Returns `(b1, b2)` and consumes both qubits.
    ///
    /// The circuit is evaluated as a single projective measurement contracted
    /// directly against the operand clusters, so the two clusters are never
    /// materialized as one joint vector. The noise hook fires for the CNOT
    /// (both targets) and the H exactly as if the gates had been applied one
    /// by one.
    pub fn bell_measure(&mut self, q1: QubitId, q2: QubitId) -> Result<(bool, bool), StateError> {
        self.validate_targets(Gate::Cnot, &[q1, q2])?;

        // Effective 4x4 operator on (q1, q2), index x1 + 2*x2.
        let mut u = [[ZERO; 4]; 4];
        for (i, row) in u.iter_mut().enumerate() {
            row[i] = ONE;
        }
        left_mul_cnot(&mut u);
        for pos in 0..2 {
            if let Some(p) = self.draw_noise() {
                left_mul_single(&mut u, pos, &p.gate().matrix().unwrap());
            }
        }
        left_mul_single(&mut u, 0, &Gate::H.matrix().unwrap());
        if let Some(p) = self.draw_noise() {
            left_mul_single(&mut u, 0, &p.gate().matrix().unwrap());
        }

        let (ca, cb) = (self.cluster_id(q1)?, self.cluster_id(q2)?);
        let (qubits, branches) = if ca == cb {
            let c = self.clusters.remove(&ca).unwrap();
            let (p1, p2) = (c.position(q1), c.position(q2));
            let (lo, hi) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
            let rest = c.amps.len() / 4;
            let branches: Vec<Vec<Complex64>> = (0..4)
                .map(|b| {
                    (0..rest)
                        .map(|r| {
                            let base = insert_bit(insert_bit(r, lo, 0), hi, 0);
                            (0..4)
                                .map(|x| u[b][x] * c.amps[base | ((x & 1) << p1) | ((x >> 1) << p2)])
                                .sum()
                        })
                        .collect()
                })
                .collect();
            let qubits: Vec<QubitId> = c.qubits.into_iter().filter(|&q| q != q1 && q != q2).collect();
            (qubits, branches)
        } else {
            let a = self.clusters.remove(&ca).unwrap();
            let b = self.clusters.remove(&cb).unwrap();
            let (pa, pb) = (a.position(q1), b.position(q2));
            let (ra, rb) = (a.amps.len() / 2, b.amps.len() / 2);
            let shift = a.qubits.len() - 1;
            let branches: Vec<Vec<Complex64>> = (0..4)
                .map(|outcome| {
                    // partial[x2][ra] = sum_x1 U[outcome][x1 + 2 x2] A[ra, x1]
                    let mut partial = [vec![ZERO; ra], vec![ZERO; ra]];
                    for (x2, part) in partial.iter_mut().enumerate() {
                        for (r, slot) in part.iter_mut().enumerate() {
                            *slot = u[outcome][2 * x2] * a.amps[insert_bit(r, pa, 0)]
                                + u[outcome][1 + 2 * x2] * a.amps[insert_bit(r, pa, 1)];
                        }
                    }
                    let mut out = vec![ZERO; ra * rb];
                    for j in 0..rb {
                        let b0 = b.amps[insert_bit(j, pb, 0)];
                        let b1 = b.amps[insert_bit(j, pb, 1)];
                        for i in 0..ra {
                            out[i | (j << shift)] = partial[0][i] * b0 + partial[1][i] * b1;
                        }
                    }
                    out
                })
                .collect();
            let mut qubits: Vec<QubitId> = a.qubits.into_iter().filter(|&q| q != q1).collect();
            qubits.extend(b.qubits.into_iter().filter(|&q| q != q2));
            (qubits, branches)
        };

        let probs: Vec<f64> = branches.iter().map(|v| norm_sqr(v)).collect();
        let total: f64 = probs.iter().sum();
        let mut r = self.rng.random::<f64>() * total;
        let mut outcome = 3;
        for (k, p) in probs.iter().enumerate() {
            if r < *p {
                outcome = k;
                break;
            }
            r -= p;
        }
        // guard against rounding picking a zero-probability branch
        if probs[outcome] == 0.0 {
            outcome = probs
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.total_cmp(y.1))
                .map(|(k, _)| k)
                .unwrap();
        }

        self.retire(q1);
        self.retire(q2);
        if !qubits.is_empty() {
            let mut amps = branches.into_iter().nth(outcome).unwrap();
            let n = probs[outcome].sqrt();
            for a in &mut amps {
                *a /= n;
            }
            self.insert_cluster(Cluster { qubits, amps });
        }
        Ok((outcome & 1 == 1, outcome & 2 == 2))
    }

    /// `<ref| rho_q |ref>` on the reduced state of `q`. Non-destructive.
    pub fn fidelity(&self, q: QubitId, reference: &Ket) -> Result<f64, StateError> {
        let n = norm_sqr(reference);
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(StateError::NotNormalized(n));
        }
        let c = &self.clusters[&self.cluster_id(q)?];
        let rho = c.reduced(c.position(q));
        let mut f = ZERO;
        for a in 0..2 {
            for b in 0..2 {
                f += reference[a].conj() * rho[a][b] * reference[b];
            }
        }
        Ok(f.re.clamp(0.0, 1.0))
    }

    /// `<ref| rho_{q1 q2} |ref>` with `ref` indexed `x1 + 2 * x2`.
    pub fn pair_fidelity(
        &self,
        q1: QubitId,
        q2: QubitId,
        reference: &[Complex64; 4],
    ) -> Result<f64, StateError> {
        let n = norm_sqr(reference);
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(StateError::NotNormalized(n));
        }
        if q1 == q2 {
            return Err(StateError::DuplicateTarget(q1));
        }
        let (ca, cb) = (self.cluster_id(q1)?, self.cluster_id(q2)?);
        let rho = if ca == cb {
            let c = &self.clusters[&ca];
            c.reduced_pair(c.position(q1), c.position(q2))
        } else {
            let (a, b) = (&self.clusters[&ca], &self.clusters[&cb]);
            let ra = a.reduced(a.position(q1));
            let rb = b.reduced(b.position(q2));
            let mut rho = [[ZERO; 4]; 4];
            for (x, row) in rho.iter_mut().enumerate() {
                for (y, v) in row.iter_mut().enumerate() {
                    *v = ra[x & 1][y & 1] * rb[x >> 1][y >> 1];
                }
            }
            rho
        };
        let mut f = ZERO;
        for x in 0..4 {
            for y in 0..4 {
                f += reference[x].conj() * rho[x][y] * reference[y];
            }
        }
        Ok(f.re.clamp(0.0, 1.0))
    }

    /// Traces `q` out by measuring it and discarding the outcome.
    pub fn release(&mut self, q: QubitId) -> Result<(), StateError> {
        self.measure(q).map(|_| ())
    }
}

/// Amplitudes of `(|00> + |11>)/√2`, indexed `x1 + 2 * x2`.
pub fn phi_plus() -> [Complex64; 4] {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [h, ZERO, ZERO, h]
}
