//! Logical-time message passing over a [`Topology`].
//!
//! Every send is stamped with the next tick and queued FIFO. Delivery never
//! loses or corrupts a payload. Qubits may only cross quantum links, and a
//! qubit handle lives in exactly one node inventory (or is in flight) at any
//! moment.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qstate::QubitId;
use crate::topology::{LinkKind, Node, Topology};

/// Default tick cap for [`Network::run_until_idle`].
pub const DEFAULT_MAX_TICKS: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("no link between {0} and {1}")]
    NoLink(Node, Node),
    #[error("link {0}-{1} is classical and cannot carry qubits")]
    ClassicalLink(Node, Node),
    #[error("{0} does not hold qubit {1}")]
    NotOwned(Node, QubitId),
    #[error("{0} has no qubit labelled '{1}'")]
    MissingLabel(Node, String),
    #[error("{0} already holds a qubit labelled '{1}'")]
    LabelTaken(Node, String),
    #[error("qubit {0} is already held or in flight")]
    AlreadyHeld(QubitId),
    #[error("{0} is not part of the topology")]
    UnknownNode(Node),
    #[error("{0} has no links")]
    Isolated(Node),
    #[error("event loop exceeded {0} ticks")]
    Livelock(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Payload {
    Classical { bits: Vec<bool>, tag: String },
    QubitTransfer { qubit: QubitId, tag: String },
}

impl Payload {
    pub fn tag(&self) -> &str {
        match self {
            Payload::Classical { tag, .. } | Payload::QubitTransfer { tag, .. } => tag,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetEvent {
    pub tick: u64,
    pub src: Node,
    pub dst: Node,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalMessage {
    pub from: Node,
    pub tag: String,
    pub bits: Vec<bool>,
    pub tick: u64,
}

#[derive(Debug, Clone, Default)]
pub struct NodeInventory {
    qubits: BTreeMap<String, QubitId>,
    messages: Vec<ClassicalMessage>,
    peak: usize,
}

impl NodeInventory {
    pub fn qubits(&self) -> &BTreeMap<String, QubitId> {
        &self.qubits
    }

    pub fn messages(&self) -> &[ClassicalMessage] {
        &self.messages
    }

    /// Largest number of qubits held at once.
    pub fn peak(&self) -> usize {
        self.peak
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PayloadKind {
    Classical,
    Quantum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub tick: u64,
    pub src: Node,
    pub dst: Node,
    pub kind: PayloadKind,
    pub tag: String,
    /// Bit string for classical payloads, qubit handle for transfers.
    pub content: String,
}

impl TraceEntry {
    pub fn bit_len(&self) -> usize {
        match self.kind {
            PayloadKind::Classical => self.content.len(),
            PayloadKind::Quantum => 0,
        }
    }
}

/// Ordered record of delivered events.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventTrace {
    pub entries: Vec<TraceEntry>,
}

impl EventTrace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries sent from `src` to `dst` (in that direction).
    pub fn between(&self, src: Node, dst: Node) -> impl Iterator<Item = &TraceEntry> + '_ {
        self.entries
            .iter()
            .filter(move |e| e.src == src && e.dst == dst)
    }

    /// Entries on the `M1-M2` link in either direction.
    pub fn bottleneck(&self) -> Vec<&TraceEntry> {
        self.entries
            .iter()
            .filter(|e| {
                matches!((e.src, e.dst), (Node::M1, Node::M2) | (Node::M2, Node::M1))
            })
            .collect()
    }

    /// One `tick,src,dst,kind,tag,content` line per event.
    pub fn to_log(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let kind = match e.kind {
                PayloadKind::Classical => "classical",
                PayloadKind::Quantum => "quantum",
            };
            let _ = writeln!(out, "{},{},{},{},{},{}", e.tick, e.src, e.dst, kind, e.tag, e.content);
        }
        out
    }

    fn extend(&mut self, other: EventTrace) {
        self.entries.extend(other.entries);
    }
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[derive(Debug, Clone)]
pub struct Network {
    topology: Topology,
    queue: VecDeque<NetEvent>,
    now: u64,
    inventories: BTreeMap<Node, NodeInventory>,
    owners: HashMap<QubitId, Node>,
    in_flight: HashSet<QubitId>,
    trace: EventTrace,
    max_ticks: u64,
}

impl Network {
    pub fn new(topology: Topology) -> Self {
        let inventories = topology
            .nodes()
            .iter()
            .map(|&n| (n, NodeInventory::default()))
            .collect();
        Self {
            topology,
            queue: VecDeque::new(),
            now: 0,
            inventories,
            owners: HashMap::new(),
            in_flight: HashSet::new(),
            trace: EventTrace::default(),
            max_ticks: DEFAULT_MAX_TICKS,
        }
    }

    pub fn with_max_ticks(mut self, max_ticks: u64) -> Self {
        self.max_ticks = max_ticks;
        self
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Every event delivered so far.
    pub fn trace(&self) -> &EventTrace {
        &self.trace
    }

    pub fn inventory(&self, node: Node) -> Result<&NodeInventory, NetError> {
        self.inventories.get(&node).ok_or(NetError::UnknownNode(node))
    }

    fn inventory_mut(&mut self, node: Node) -> Result<&mut NodeInventory, NetError> {
        self.inventories
            .get_mut(&node)
            .ok_or(NetError::UnknownNode(node))
    }

    /// Per-node peak qubit occupancy.
    pub fn node_peaks(&self) -> BTreeMap<Node, usize> {
        self.inventories.iter().map(|(&n, inv)| (n, inv.peak)).collect()
    }

    /// Node currently holding `q`, if any.
    pub fn owner_of(&self, q: QubitId) -> Option<Node> {
        self.owners.get(&q).copied()
    }

    /// Places a locally prepared qubit into `node`'s inventory.
    pub fn hold(&mut self, node: Node, label: &str, q: QubitId) -> Result<(), NetError> {
        if self.owners.contains_key(&q) || self.in_flight.contains(&q) {
            return Err(NetError::AlreadyHeld(q));
        }
        let inv = self.inventory_mut(node)?;
        if inv.qubits.contains_key(label) {
            return Err(NetError::LabelTaken(node, label.to_string()));
        }
        inv.qubits.insert(label.to_string(), q);
        inv.peak = inv.peak.max(inv.qubits.len());
        self.owners.insert(q, node);
        Ok(())
    }

    /// Removes the qubit stored under `label`, e.g. before it is measured.
    pub fn take(&mut self, node: Node, label: &str) -> Result<QubitId, NetError> {
        let q = self
            .inventory_mut(node)?
            .qubits
            .remove(label)
            .ok_or_else(|| NetError::MissingLabel(node, label.to_string()))?;
        self.owners.remove(&q);
        Ok(q)
    }

    pub fn qubit(&self, node: Node, label: &str) -> Option<QubitId> {
        self.inventories.get(&node)?.qubits.get(label).copied()
    }

    /// Classical messages delivered to `node` under `tag`.
    pub fn messages_tagged<'a>(
        &'a self,
        node: Node,
        tag: &'a str,
    ) -> impl Iterator<Item = &'a ClassicalMessage> + 'a {
        self.inventories
            .get(&node)
            .into_iter()
            .flat_map(|inv| inv.messages.iter())
            .filter(move |m| m.tag == tag)
    }

    fn require_link(&self, src: Node, dst: Node) -> Result<LinkKind, NetError> {
        self.topology.link(src, dst).ok_or(NetError::NoLink(src, dst))
    }

    fn enqueue(&mut self, src: Node, dst: Node, payload: Payload) {
        self.queue.push_back(NetEvent {
            tick: self.now + 1,
            src,
            dst,
            payload,
        });
    }

    pub fn send_classical(
        &mut self,
        src: Node,
        dst: Node,
        bits: &[bool],
        tag: &str,
    ) -> Result<(), NetError> {
        self.require_link(src, dst)?;
        self.enqueue(
            src,
            dst,
            Payload::Classical {
                bits: bits.to_vec(),
                tag: tag.to_string(),
            },
        );
        Ok(())
    }

    /// Moves `q` out of `src`'s inventory onto the wire; `dst` files it
    /// under `tag` on delivery.
    pub fn send_qubit(&mut self, src: Node, dst: Node, q: QubitId, tag: &str) -> Result<(), NetError> {
        if !self.require_link(src, dst)?.carries_qubits() {
            return Err(NetError::ClassicalLink(src, dst));
        }
        if self.owners.get(&q) != Some(&src) {
            return Err(NetError::NotOwned(src, q));
        }
        let inv = self.inventory_mut(src)?;
        let label = inv
            .qubits
            .iter()
            .find(|(_, &v)| v == q)
            .map(|(k, _)| k.clone())
            .expect("owner map and inventory disagree");
        inv.qubits.remove(&label);
        self.owners.remove(&q);
        self.in_flight.insert(q);
        self.enqueue(
            src,
            dst,
            Payload::QubitTransfer {
                qubit: q,
                tag: tag.to_string(),
            },
        );
        Ok(())
    }

    /// Sends `bits` to every neighbor of `src`; returns the recipients.
    pub fn broadcast_classical(
        &mut self,
        src: Node,
        bits: &[bool],
        tag: &str,
    ) -> Result<Vec<Node>, NetError> {
        let neighbors = self.topology.neighbors(src);
        if neighbors.is_empty() {
            return Err(NetError::Isolated(src));
        }
        for &dst in &neighbors {
            self.send_classical(src, dst, bits, tag)?;
        }
        Ok(neighbors)
    }

    fn deliver(&mut self, ev: &NetEvent) -> Result<TraceEntry, NetError> {
        let (kind, content) = match &ev.payload {
            Payload::Classical { bits, tag } => {
                let msg = ClassicalMessage {
                    from: ev.src,
                    tag: tag.clone(),
                    bits: bits.clone(),
                    tick: ev.tick,
                };
                self.inventory_mut(ev.dst)?.messages.push(msg);
                (PayloadKind::Classical, bits_to_string(bits))
            }
            Payload::QubitTransfer { qubit, tag } => {
                self.in_flight.remove(qubit);
                self.hold(ev.dst, tag, *qubit)?;
                (PayloadKind::Quantum, qubit.to_string())
            }
        };
        Ok(TraceEntry {
            tick: ev.tick,
            src: ev.src,
            dst: ev.dst,
            kind,
            tag: ev.payload.tag().to_string(),
            content,
        })
    }

    /// Delivers queued events until the queue is empty, calling `handler`
    /// after each delivery. Handlers may send further messages; those are
    /// stamped with the following tick.
    pub fn run_with<E, F>(&mut self, mut handler: F) -> Result<EventTrace, E>
    where
        E: From<NetError>,
        F: FnMut(&mut Network, &NetEvent) -> Result<(), E>,
    {
        let mut trace = EventTrace::default();
        while let Some(ev) = self.queue.pop_front() {
            if ev.tick > self.max_ticks {
                return Err(NetError::Livelock(self.max_ticks).into());
            }
            self.now = ev.tick;
            let entry = self.deliver(&ev)?;
            trace.entries.push(entry);
            handler(self, &ev)?;
        }
        self.trace.extend(trace.clone());
        Ok(trace)
    }

    /// Delivers every queued event with no node reactions.
    pub fn run_until_idle(&mut self) -> Result<EventTrace, NetError> {
        self.run_with(|_, _| Ok::<(), NetError>(()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{ket_zero, StateRegistry};
    use crate::topology::build_butterfly;

    use Node::*;

    fn net(n: usize) -> Network {
        Network::new(build_butterfly(n).unwrap())
    }

    #[test]
    fn classical_delivery() {
        let mut net = net(2);
        net.send_classical(Transmitter(1), M1, &[true, false], "B_1").unwrap();
        let trace = net.run_until_idle().unwrap();
        assert_eq!(trace.len(), 1);
        let got: Vec<_> = net.messages_tagged(M1, "B_1").collect();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].bits, vec![true, false]);
        assert_eq!(got[0].from, Transmitter(1));
    }

    #[test]
    fn transceiver_pair_has_no_link() {
        let mut net = net(2);
        assert_eq!(
            net.send_classical(Transmitter(1), Receiver(1), &[true], "x"),
            Err(NetError::NoLink(Transmitter(1), Receiver(1)))
        );
    }

    #[test]
    fn empty_bit_string_is_delivered() {
        let mut net = net(2);
        net.send_classical(M1, M2, &[], "empty").unwrap();
        net.run_until_idle().unwrap();
        assert_eq!(net.messages_tagged(M2, "empty").count(), 1);
    }

    #[test]
    fn qubit_transfer_moves_ownership() {
        let mut reg = StateRegistry::new(0.0, 0).unwrap();
        let mut net = net(2);
        let (a, b) = reg.create_bell_pair().unwrap();
        net.hold(Transmitter(1), "phi", a).unwrap();
        net.hold(Transmitter(1), "phi_far", b).unwrap();
        net.send_qubit(Transmitter(1), Receiver(2), b, "phi_half_from_T1").unwrap();
        assert_eq!(net.owner_of(b), None);
        assert_eq!(
            net.send_qubit(Transmitter(1), Receiver(2), b, "again"),
            Err(NetError::NotOwned(Transmitter(1), b))
        );
        net.run_until_idle().unwrap();
        assert_eq!(net.qubit(Receiver(2), "phi_half_from_T1"), Some(b));
        assert_eq!(net.owner_of(b), Some(Receiver(2)));
        assert_eq!(net.inventory(Transmitter(1)).unwrap().peak(), 2);
    }

    #[test]
    fn bottleneck_rejects_qubits() {
        let mut reg = StateRegistry::new(0.0, 0).unwrap();
        let mut net = net(2);
        let q = reg.alloc_qubit(ket_zero()).unwrap();
        net.hold(M1, "q", q).unwrap();
        assert_eq!(net.send_qubit(M1, M2, q, "q"), Err(NetError::ClassicalLink(M1, M2)));
        assert_eq!(net.owner_of(q), Some(M1));
    }

    #[test]
    fn hold_rejects_duplicates() {
        let mut reg = StateRegistry::new(0.0, 0).unwrap();
        let mut net = net(2);
        let q = reg.alloc_qubit(ket_zero()).unwrap();
        let p = reg.alloc_qubit(ket_zero()).unwrap();
        net.hold(M2, "q", q).unwrap();
        assert_eq!(net.hold(M1, "q", q), Err(NetError::AlreadyHeld(q)));
        assert_eq!(net.hold(M2, "q", p), Err(NetError::LabelTaken(M2, "q".into())));
        assert!(matches!(net.take(M2, "nope"), Err(NetError::MissingLabel(..))));
        assert_eq!(net.take(M2, "q"), Ok(q));
    }

    #[test]
    fn broadcasts_reach_neighbors() {
        let mut n2 = net(2);
        assert_eq!(
            n2.broadcast_classical(Transmitter(1), &[true, true], "B_1").unwrap(),
            vec![Receiver(2), M1]
        );
        let mut n3 = net(3);
        assert_eq!(
            n3.broadcast_classical(M2, &[false, true], "coded").unwrap(),
            vec![Receiver(1), Receiver(2), Receiver(3), M1]
        );
        assert_eq!(
            n3.broadcast_classical(Transmitter(1), &[true], "B_1").unwrap(),
            vec![Receiver(2), Receiver(3), M1]
        );
        let mut lonely = Network::new(Topology::empty());
        assert_eq!(
            lonely.broadcast_classical(M1, &[], "x"),
            Err(NetError::Isolated(M1))
        );
    }

    #[test]
    fn idle_network_yields_empty_trace() {
        assert!(net(2).run_until_idle().unwrap().is_empty());
    }

    #[test]
    fn ping_pong_hits_tick_cap() {
        let mut net = net(2).with_max_ticks(50);
        net.send_classical(M1, M2, &[true], "ping").unwrap();
        let res = net.run_with(|net, ev| {
            net.send_classical(ev.dst, ev.src, &[true], "ping")
        });
        assert_eq!(res, Err(NetError::Livelock(50)));
    }

    #[test]
    fn trace_log_lines() {
        let mut net = net(2);
        net.send_classical(M1, M2, &[false, true], "coded").unwrap();
        let trace = net.run_until_idle().unwrap();
        assert_eq!(trace.to_log(), "1,M1,M2,classical,coded,01\n");
        assert_eq!(trace.bottleneck().len(), 1);
        assert_eq!(trace.bottleneck()[0].bit_len(), 2);
    }
}
