//! Indirect entanglement distribution with teleportation coding.
//!
//! A round has two phases separated by a barrier:
//!
//! 1. Distribution. `T_k` prepares `|φ_k>` and ships one half to its
//!    assisting receiver `A_k = R_{k-1}` (cyclic). `M2` prepares `|ψ_k>` and
//!    ships one half to `A_k`, the other to `R_k`. `A_k` Bell-measures its
//!    ψ-half against its φ-half, which teleports the ψ-half onto `T_k`'s
//!    remaining φ qubit, and returns the two correction bits to `T_k` over
//!    their shared fiber link. `T_k` and `R_k` now share `Φ+`.
//! 2. Teleportation. Each `T_k` Bell-measures its payload against its half
//!    and broadcasts `B_k` to `M1` and to every receiver it is linked to.
//!    `M1` XORs all `B_k` into one 2-bit message for `M2`, which forwards it
//!    to every receiver. `R_k` cancels the `B_j` it heard directly and
//!    applies the corrections for `B_k`.
//!
//! Corrections are X if `b2` is set, then Z if `b1` is set.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qsre::{self, RotationSpec};
use crate::qstate::{Gate, Ket, QubitId, StateError, StateRegistry};
use crate::simnet::{EventTrace, NetError, NetEvent, Network, Payload};
use crate::topology::{Node, TopologyError};

/// A delivered state counts as correct at or above this fidelity.
pub const SUCCESS_FIDELITY: f64 = 1.0 - 1e-9;

/// Tag of the single coded message crossing the bottleneck.
pub const CODED_TAG: &str = "coded";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("cannot combine an empty list of messages")]
    EmptyMessages,
    #[error("expected {expected} input states, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("expected {expected} rotation specs, got {got}")]
    SpecCount { expected: usize, got: usize },
    #[error("pair {0} is out of range")]
    PairOutOfRange(usize),
    #[error("malformed teleport message from {0}")]
    BadMessage(Node),
    #[error("round ended before pair {0} was delivered")]
    Undelivered(usize),
}

/// Which receiver assists each pair: `A_k = R_{k-1}`, with `A_1 = R_N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapAssignment {
    assisters: Vec<usize>,
}

impl SwapAssignment {
    pub fn n_pairs(&self) -> usize {
        self.assisters.len()
    }

    /// Index of the receiver assisting pair `k` (1-based).
    pub fn assister(&self, k: usize) -> usize {
        self.assisters[k - 1]
    }

    /// Pair assisted by receiver `r`.
    pub fn assisted_by(&self, r: usize) -> usize {
        self.assisters
            .iter()
            .position(|&a| a == r)
            .map(|i| i + 1)
            .expect("assignment is a bijection")
    }
}

pub fn assign_swappers(n: usize) -> Result<SwapAssignment, ProtocolError> {
    if n < 2 {
        return Err(TopologyError::TooSmall(n).into());
    }
    Ok(SwapAssignment {
        assisters: (1..=n).map(|k| if k == 1 { n } else { k - 1 }).collect(),
    })
}

/// The 2-bit classical string produced by a Bell measurement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TeleportMessage {
    pub b1: bool,
    pub b2: bool,
}

impl TeleportMessage {
    pub fn new(b1: bool, b2: bool) -> Self {
        Self { b1, b2 }
    }

    pub fn bits(self) -> [bool; 2] {
        [self.b1, self.b2]
    }

    pub fn from_bits(bits: &[bool]) -> Option<Self> {
        match bits {
            [b1, b2] => Some(Self::new(*b1, *b2)),
            _ => None,
        }
    }

    pub fn xor(self, other: Self) -> Self {
        Self::new(self.b1 ^ other.b1, self.b2 ^ other.b2)
    }

    /// All four messages in `(b1, b2)` order 00, 01, 10, 11.
    pub fn all() -> [Self; 4] {
        [
            Self::new(false, false),
            Self::new(false, true),
            Self::new(true, false),
            Self::new(true, true),
        ]
    }
}

pub fn xor_combine(messages: &[TeleportMessage]) -> Result<TeleportMessage, ProtocolError> {
    let (first, rest) = messages.split_first().ok_or(ProtocolError::EmptyMessages)?;
    Ok(rest.iter().fold(*first, |acc, m| acc.xor(*m)))
}

pub fn xor_recover(combined: TeleportMessage, others: &[TeleportMessage]) -> TeleportMessage {
    others.iter().fold(combined, |acc, m| acc.xor(*m))
}

/// X if `b2`, then Z if `b1`.
pub fn apply_corrections(
    reg: &mut StateRegistry,
    q: QubitId,
    msg: TeleportMessage,
) -> Result<(), StateError> {
    if msg.b2 {
        reg.apply_gate(Gate::X, &[q])?;
    }
    if msg.b1 {
        reg.apply_gate(Gate::Z, &[q])?;
    }
    Ok(())
}

/// Bell-measures a ψ-half against a φ-half held by the same node. The
/// returned bits, applied with [`apply_corrections`] to the far φ-half,
/// leave that qubit holding the ψ-half's role.
pub fn entanglement_swap(
    reg: &mut StateRegistry,
    phi_half: QubitId,
    psi_half: QubitId,
) -> Result<TeleportMessage, StateError> {
    let (b1, b2) = reg.bell_measure(psi_half, phi_half)?;
    Ok(TeleportMessage::new(b1, b2))
}

pub fn teleport_encode(
    reg: &mut StateRegistry,
    state: QubitId,
    half: QubitId,
) -> Result<TeleportMessage, StateError> {
    let (b1, b2) = reg.bell_measure(state, half)?;
    Ok(TeleportMessage::new(b1, b2))
}

pub fn teleport_decode(
    reg: &mut StateRegistry,
    half: QubitId,
    msg: TeleportMessage,
) -> Result<QubitId, StateError> {
    apply_corrections(reg, half, msg)?;
    Ok(half)
}

/// Order in which the distribution phase is carried out.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// `M2` prepares every ψ pair up front, all halves are delivered, then
    /// every assister swaps.
    #[default]
    Batched,
    /// Pairs are handled one at a time and each assister swaps as soon as it
    /// holds both halves.
    Eager,
}

/// A receiver that hijacks the pair it is supposed to assist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adversary {
    /// Pair whose transmitter gets entangled with the adversary.
    pub target_pair: usize,
    /// Counter-rotation guess applied after decoding, if any.
    pub guess: Option<RotationSpec>,
}

#[derive(Debug, Clone, Default)]
pub struct RoundOptions {
    pub schedule: Schedule,
    /// Per-pair rotation applied before teleportation and undone after.
    pub rotations: Option<Vec<RotationSpec>>,
    pub adversary: Option<Adversary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub pair: usize,
    pub delivered: QubitId,
    pub fidelity: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EavesdropOutcome {
    pub pair: usize,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    pub pairs: Vec<PairOutcome>,
    pub all_success: bool,
    /// Sum over nodes of each node's peak qubit holding.
    pub peak_qubits: usize,
    /// Peak number of simultaneously live qubits network-wide.
    pub peak_live: usize,
    pub max_cluster_amplitudes: usize,
    pub eavesdrop: Option<EavesdropOutcome>,
    pub trace: EventTrace,
}

fn phi_tag(k: usize) -> String {
    format!("phi_from_T{k}")
}

fn psi_assist_tag(k: usize) -> String {
    format!("psi_assist_{k}")
}

const PSI_OWN: &str = "psi_own";
const PHI_KEEP: &str = "phi_keep";
const EVE_KEEP: &str = "eve_keep";

fn swap_tag(k: usize) -> String {
    format!("swap_{k}")
}

fn b_tag(k: usize) -> String {
    format!("B_{k}")
}

fn pair_of_tag(tag: &str, prefix: &str) -> Option<usize> {
    tag.strip_prefix(prefix)?.parse().ok()
}

fn message_of(net: &Network, node: Node, tag: &str) -> Result<Option<TeleportMessage>, ProtocolError> {
    match net.messages_tagged(node, tag).last() {
        None => Ok(None),
        Some(m) => TeleportMessage::from_bits(&m.bits)
            .map(Some)
            .ok_or(ProtocolError::BadMessage(m.from)),
    }
}

struct Distribution<'a> {
    assignment: &'a SwapAssignment,
    adversary: Option<Adversary>,
}

impl Distribution<'_> {
    fn emit_phi(&self, net: &mut Network, reg: &mut StateRegistry, k: usize) -> Result<(), ProtocolError> {
        let t = Node::Transmitter(k);
        let (keep, far) = reg.create_bell_pair()?;
        net.hold(t, PHI_KEEP, keep)?;
        net.hold(t, "phi_far", far)?;
        let a = Node::Receiver(self.assignment.assister(k));
        net.send_qubit(t, a, far, &phi_tag(k))?;
        Ok(())
    }

    fn send_psi(&self, net: &mut Network, k: usize, psi: (QubitId, QubitId)) -> Result<(), ProtocolError> {
        let a = Node::Receiver(self.assignment.assister(k));
        net.send_qubit(Node::M2, a, psi.0, &psi_assist_tag(k))?;
        net.send_qubit(Node::M2, Node::Receiver(k), psi.1, PSI_OWN)?;
        Ok(())
    }

    fn hold_psi(&self, net: &mut Network, reg: &mut StateRegistry, k: usize) -> Result<(QubitId, QubitId), ProtocolError> {
        let (x, y) = reg.create_bell_pair()?;
        net.hold(Node::M2, &format!("psi_{k}_a"), x)?;
        net.hold(Node::M2, &format!("psi_{k}_r"), y)?;
        Ok((x, y))
    }

    /// Swap at the assister of pair `k` if it holds both halves.
    fn try_swap(&self, net: &mut Network, reg: &mut StateRegistry, k: usize) -> Result<bool, ProtocolError> {
        let a = Node::Receiver(self.assignment.assister(k));
        if net.qubit(a, &phi_tag(k)).is_none() || net.qubit(a, &psi_assist_tag(k)).is_none() {
            return Ok(false);
        }
        let phi = net.take(a, &phi_tag(k))?;
        let psi = net.take(a, &psi_assist_tag(k))?;
        let msg = match self.adversary {
            Some(adv) if adv.target_pair == k => {
                // Entangle T_k with a private pair instead; the ψ-half is
                // dropped, leaving R_k with a useless qubit.
                let (keep, sub) = reg.create_bell_pair()?;
                net.hold(a, EVE_KEEP, keep)?;
                reg.release(psi)?;
                entanglement_swap(reg, phi, sub)?
            }
            _ => entanglement_swap(reg, phi, psi)?,
        };
        net.send_classical(a, Node::Transmitter(k), &msg.bits(), &swap_tag(k))?;
        Ok(true)
    }

    fn on_event(&self, net: &mut Network, reg: &mut StateRegistry, ev: &NetEvent, eager: bool) -> Result<(), ProtocolError> {
        match &ev.payload {
            Payload::Classical { bits, tag } => {
                if let (Node::Transmitter(k), Some(j)) = (ev.dst, pair_of_tag(tag, "swap_")) {
                    if j == k {
                        let msg = TeleportMessage::from_bits(bits).ok_or(ProtocolError::BadMessage(ev.src))?;
                        let keep = net.qubit(ev.dst, PHI_KEEP).ok_or_else(|| {
                            NetError::MissingLabel(ev.dst, PHI_KEEP.to_string())
                        })?;
                        apply_corrections(reg, keep, msg)?;
                    }
                }
            }
            Payload::QubitTransfer { tag, .. } => {
                if eager {
                    let k = pair_of_tag(tag, "phi_from_T").or_else(|| pair_of_tag(tag, "psi_assist_"));
                    if let Some(k) = k {
                        self.try_swap(net, reg, k)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Runs the distribution phase. Returns, for every pair, the transmitter's
/// half and the receiver's half of the resulting shared pair.
pub fn distribute_entanglements(
    net: &mut Network,
    reg: &mut StateRegistry,
    schedule: Schedule,
) -> Result<Vec<(QubitId, QubitId)>, ProtocolError> {
    distribute(net, reg, schedule, None)
}

fn distribute(
    net: &mut Network,
    reg: &mut StateRegistry,
    schedule: Schedule,
    adversary: Option<Adversary>,
) -> Result<Vec<(QubitId, QubitId)>, ProtocolError> {
    let n = net.topology().n_pairs();
    let assignment = assign_swappers(n)?;
    let dist = Distribution {
        assignment: &assignment,
        adversary,
    };
    match schedule {
        Schedule::Batched => {
            for k in 1..=n {
                dist.emit_phi(net, reg, k)?;
            }
            let psis = (1..=n)
                .map(|k| dist.hold_psi(net, reg, k))
                .collect::<Result<Vec<_>, _>>()?;
            for (k, psi) in (1..=n).zip(psis) {
                dist.send_psi(net, k, psi)?;
            }
            net.run_until_idle()?;
            for k in 1..=n {
                dist.try_swap(net, reg, k)?;
            }
            net.run_with(|net, ev| dist.on_event(net, reg, ev, false))?;
        }
        Schedule::Eager => {
            for k in 1..=n {
                dist.emit_phi(net, reg, k)?;
                let psi = dist.hold_psi(net, reg, k)?;
                dist.send_psi(net, k, psi)?;
                net.run_with(|net, ev| dist.on_event(net, reg, ev, true))?;
            }
        }
    }
    (1..=n)
        .map(|k| {
            let t = net
                .qubit(Node::Transmitter(k), PHI_KEEP)
                .ok_or_else(|| NetError::MissingLabel(Node::Transmitter(k), PHI_KEEP.into()))?;
            let r = net
                .qubit(Node::Receiver(k), PSI_OWN)
                .ok_or_else(|| NetError::MissingLabel(Node::Receiver(k), PSI_OWN.into()))?;
            Ok((t, r))
        })
        .collect()
}

/// Runs a full round with default options.
pub fn run_round(
    net: &mut Network,
    reg: &mut StateRegistry,
    inputs: &[Ket],
    rotations: Option<&[RotationSpec]>,
) -> Result<RoundResult, ProtocolError> {
    let opts = RoundOptions {
        rotations: rotations.map(<[RotationSpec]>::to_vec),
        ..RoundOptions::default()
    };
    run_round_with(net, reg, inputs, &opts)
}

#[derive(Default)]
struct Delivery {
    coded_sent: bool,
    delivered: Vec<Option<QubitId>>,
    eve_fidelity: Option<f64>,
}

pub fn run_round_with(
    net: &mut Network,
    reg: &mut StateRegistry,
    inputs: &[Ket],
    opts: &RoundOptions,
) -> Result<RoundResult, ProtocolError> {
    let n = net.topology().n_pairs();
    if inputs.len() != n {
        return Err(ProtocolError::InputCount {
            expected: n,
            got: inputs.len(),
        });
    }
    if let Some(r) = &opts.rotations {
        if r.len() != n {
            return Err(ProtocolError::SpecCount {
                expected: n,
                got: r.len(),
            });
        }
    }
    if let Some(adv) = opts.adversary {
        if !(1..=n).contains(&adv.target_pair) {
            return Err(ProtocolError::PairOutOfRange(adv.target_pair));
        }
    }
    let assignment = assign_swappers(n)?;

    distribute(net, reg, opts.schedule, opts.adversary)?;

    // Barrier: every pair is in place before any payload is teleported.
    for (k, input) in (1..=n).zip(inputs) {
        let t = Node::Transmitter(k);
        let eta = reg.alloc_qubit(*input)?;
        net.hold(t, "eta", eta)?;
        if let Some(rot) = &opts.rotations {
            qsre::encode_state(reg, eta, &rot[k - 1])?;
        }
        let eta = net.take(t, "eta")?;
        let half = net.take(t, PHI_KEEP)?;
        let msg = teleport_encode(reg, eta, half)?;
        net.broadcast_classical(t, &msg.bits(), &b_tag(k))?;
    }

    let mut state = Delivery {
        delivered: vec![None; n],
        ..Delivery::default()
    };
    net.run_with(|net, ev| {
        let Payload::Classical { tag, .. } = &ev.payload else {
            return Ok(());
        };
        match ev.dst {
            Node::M1 if !state.coded_sent && pair_of_tag(tag, "B_").is_some() => {
                let msgs = (1..=n)
                    .map(|k| message_of(net, Node::M1, &b_tag(k)))
                    .collect::<Result<Vec<_>, _>>()?;
                if msgs.iter().all(Option::is_some) {
                    let msgs: Vec<_> = msgs.into_iter().flatten().collect();
                    let coded = xor_combine(&msgs)?;
                    net.send_classical(Node::M1, Node::M2, &coded.bits(), CODED_TAG)?;
                    state.coded_sent = true;
                }
            }
            Node::M2 if tag == CODED_TAG => {
                let bits = net
                    .messages_tagged(Node::M2, CODED_TAG)
                    .last()
                    .map(|m| m.bits.clone())
                    .unwrap_or_default();
                for r in 1..=n {
                    net.send_classical(Node::M2, Node::Receiver(r), &bits, CODED_TAG)?;
                }
            }
            Node::Receiver(r) => {
                let eve_pair = opts
                    .adversary
                    .filter(|adv| assignment.assister(adv.target_pair) == r)
                    .map(|adv| (adv.target_pair, adv.guess));
                if let Some((pair, guess)) = eve_pair {
                    if *tag == b_tag(pair) && state.eve_fidelity.is_none() {
                        let msg = message_of(net, ev.dst, tag)?.ok_or(ProtocolError::BadMessage(ev.src))?;
                        let q = net
                            .qubit(ev.dst, EVE_KEEP)
                            .ok_or_else(|| NetError::MissingLabel(ev.dst, EVE_KEEP.into()))?;
                        teleport_decode(reg, q, msg)?;
                        if let Some(g) = guess {
                            qsre::decode_state(reg, q, &g)?;
                        }
                        state.eve_fidelity = Some(reg.fidelity(q, &inputs[pair - 1])?);
                    }
                }
                if state.delivered[r - 1].is_some() {
                    return Ok(());
                }
                let Some(coded) = message_of(net, ev.dst, CODED_TAG)? else {
                    return Ok(());
                };
                let mut others = Vec::with_capacity(n - 1);
                for j in (1..=n).filter(|&j| j != r) {
                    match message_of(net, ev.dst, &b_tag(j))? {
                        Some(m) => others.push(m),
                        None => return Ok(()),
                    }
                }
                let own = xor_recover(coded, &others);
                let q = net
                    .qubit(ev.dst, PSI_OWN)
                    .ok_or_else(|| NetError::MissingLabel(ev.dst, PSI_OWN.into()))?;
                teleport_decode(reg, q, own)?;
                if let Some(rot) = &opts.rotations {
                    qsre::decode_state(reg, q, &rot[r - 1])?;
                }
                state.delivered[r - 1] = Some(q);
            }
            _ => {}
        }
        Ok::<(), ProtocolError>(())
    })?;

    let mut pairs = Vec::with_capacity(n);
    for (k, input) in (1..=n).zip(inputs) {
        let q = state.delivered[k - 1].ok_or(ProtocolError::Undelivered(k))?;
        let fidelity = reg.fidelity(q, input)?;
        pairs.push(PairOutcome {
            pair: k,
            delivered: q,
            fidelity,
            success: fidelity >= SUCCESS_FIDELITY,
        });
    }
    let eavesdrop = match (opts.adversary, state.eve_fidelity) {
        (Some(adv), Some(f)) => Some(EavesdropOutcome {
            pair: adv.target_pair,
            fidelity: f,
        }),
        _ => None,
    };
    Ok(RoundResult {
        all_success: pairs.iter().all(|p| p.success),
        pairs,
        peak_qubits: crate::topology::report_peak(net),
        peak_live: reg.peak_alloc(),
        max_cluster_amplitudes: reg.max_cluster_amplitudes(),
        eavesdrop,
        trace: net.trace().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{ket_one, ket_plus, ket_zero, phi_plus};
    use crate::topology::build_butterfly;
    use approx::assert_abs_diff_eq;

    fn fresh(n: usize, noise: f64, seed: u64) -> (Network, StateRegistry) {
        (
            Network::new(build_butterfly(n).unwrap()),
            StateRegistry::new(noise, seed).unwrap(),
        )
    }

    #[test]
    fn swappers_for_two_and_three() {
        let a = assign_swappers(2).unwrap();
        assert_eq!((a.assister(1), a.assister(2)), (2, 1));
        let a = assign_swappers(3).unwrap();
        assert_eq!((a.assister(1), a.assister(2), a.assister(3)), (3, 1, 2));
        assert_eq!(a.assisted_by(3), 1);
        assert!(assign_swappers(1).is_err());
    }

    #[test]
    fn swapper_map_is_a_derangement() {
        for n in 2..=12 {
            let a = assign_swappers(n).unwrap();
            let mut seen = vec![false; n + 1];
            for k in 1..=n {
                let r = a.assister(k);
                assert_ne!(r, k);
                assert!(!seen[r]);
                seen[r] = true;
            }
        }
    }

    #[test]
    fn xor_examples() {
        let m = TeleportMessage::new;
        assert_eq!(xor_combine(&[m(true, false), m(false, true)]).unwrap(), m(true, true));
        assert_eq!(xor_combine(&[m(true, true), m(true, true)]).unwrap(), m(false, false));
        assert_eq!(xor_combine(&[m(true, false)]).unwrap(), m(true, false));
        assert_eq!(xor_combine(&[]), Err(ProtocolError::EmptyMessages));
        assert_eq!(xor_recover(m(true, true), &[m(false, true)]), m(true, false));
        assert_eq!(xor_recover(m(false, true), &[]), m(false, true));
    }

    #[test]
    fn distribution_yields_phi_plus_pairs() {
        for n in [2, 3] {
            let (mut net, mut reg) = fresh(n, 0.0, 5);
            let pairs = distribute_entanglements(&mut net, &mut reg, Schedule::Batched).unwrap();
            assert_eq!(pairs.len(), n);
            for &(t, r) in &pairs {
                assert_abs_diff_eq!(reg.pair_fidelity(t, r, &phi_plus()).unwrap(), 1.0, epsilon = 1e-9);
                assert_eq!(reg.cluster_of(t).unwrap().len(), 2);
            }
            assert_eq!(reg.cluster_count(), n);
            assert!(net.trace().bottleneck().is_empty());
        }
    }

    #[test]
    fn eager_distribution_also_works() {
        let (mut net, mut reg) = fresh(4, 0.0, 8);
        let pairs = distribute_entanglements(&mut net, &mut reg, Schedule::Eager).unwrap();
        for &(t, r) in &pairs {
            assert_abs_diff_eq!(reg.pair_fidelity(t, r, &phi_plus()).unwrap(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn round_on_basis_and_plus_states() {
        let (mut net, mut reg) = fresh(2, 0.0, 11);
        let res = run_round(&mut net, &mut reg, &[ket_zero(), ket_plus()], None).unwrap();
        assert!(res.all_success);
        assert_eq!(res.peak_qubits, 14);
        assert_eq!(res.trace.bottleneck().len(), 1);
    }

    #[test]
    fn round_rejects_wrong_input_count() {
        let (mut net, mut reg) = fresh(3, 0.0, 11);
        assert_eq!(
            run_round(&mut net, &mut reg, &[ket_zero()], None).unwrap_err(),
            ProtocolError::InputCount { expected: 3, got: 1 }
        );
    }

    #[test]
    fn wrong_correction_flips_basis_state() {
        // Teleport |0> but apply the decode with b2 flipped.
        let mut hits = 0;
        for seed in 0..20 {
            let mut reg = StateRegistry::new(0.0, seed).unwrap();
            let (t, r) = reg.create_bell_pair().unwrap();
            let eta = reg.alloc_qubit(ket_zero()).unwrap();
            let msg = teleport_encode(&mut reg, eta, t).unwrap();
            let wrong = TeleportMessage::new(msg.b1, !msg.b2);
            let q = teleport_decode(&mut reg, r, wrong).unwrap();
            assert_abs_diff_eq!(reg.fidelity(q, &ket_zero()).unwrap(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(reg.fidelity(q, &ket_one()).unwrap(), 1.0, epsilon = 1e-12);
            hits += 1;
        }
        assert_eq!(hits, 20);
    }

    #[test]
    fn full_noise_breaks_rounds() {
        let mut failures = 0;
        for seed in 0..50 {
            let (mut net, mut reg) = fresh(2, 1.0, seed);
            let res = run_round(&mut net, &mut reg, &[ket_plus(), ket_zero()], None).unwrap();
            failures += (!res.all_success) as usize;
        }
        // |0> and |+> each survive the Paulis that stabilize them
        assert!((30..50).contains(&failures), "{failures}");
    }
}
