//! Butterfly classical-quantum network of size N and its resource counts.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("network size must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("unknown protocol '{0}' (expected 'iedtc' or 'benchmark')")]
    UnknownProtocol(String),
    #[error("cannot parse node '{0}'")]
    BadNode(String),
}

/// A node of the butterfly network. Transmitter and receiver indices are
/// 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Node {
    Transmitter(usize),
    Receiver(usize),
    M1,
    M2,
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Transmitter(n) => write!(f, "T{n}"),
            Node::Receiver(n) => write!(f, "R{n}"),
            Node::M1 => f.write_str("M1"),
            Node::M2 => f.write_str("M2"),
        }
    }
}

impl FromStr for Node {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TopologyError::BadNode(s.to_string());
        match s {
            "M1" => Ok(Node::M1),
            "M2" => Ok(Node::M2),
            _ if s.len() > 1 => {
                let n: usize = s[1..].parse().map_err(|_| bad())?;
                match &s[..1] {
                    "T" if n >= 1 => Ok(Node::Transmitter(n)),
                    "R" if n >= 1 => Ok(Node::Receiver(n)),
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Classical,
    /// Optical fiber: carries qubits and classical traffic.
    Quantum,
}

impl LinkKind {
    pub fn carries_qubits(self) -> bool {
        self == LinkKind::Quantum
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkKind::Classical => "classical",
            LinkKind::Quantum => "quantum",
        })
    }
}

/// Undirected link; endpoints are stored in sorted order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Link {
    pub a: Node,
    pub b: Node,
    pub kind: LinkKind,
}

fn key(a: Node, b: Node) -> (Node, Node) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Topology {
    n_pairs: usize,
    nodes: Vec<Node>,
    links: BTreeMap<(Node, Node), LinkKind>,
}

impl Topology {
    /// Topology with no nodes and no links.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> impl Iterator<Item = Link> + '_ {
        self.links.iter().map(|(&(a, b), &kind)| Link { a, b, kind })
    }

    /// Kind of the link between `a` and `b`, if any.
    pub fn link(&self, a: Node, b: Node) -> Option<LinkKind> {
        self.links.get(&key(a, b)).copied()
    }

    pub fn neighbors(&self, node: Node) -> Vec<Node> {
        let mut out: Vec<Node> = self
            .links
            .keys()
            .filter_map(|&(a, b)| {
                if a == node {
                    Some(b)
                } else if b == node {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort();
        out
    }

    /// `(total, quantum)` link counts.
    pub fn link_counts(&self) -> (usize, usize) {
        let quantum = self
            .links
            .values()
            .filter(|k| k.carries_qubits())
            .count();
        (self.links.len(), quantum)
    }

    fn add(&mut self, a: Node, b: Node, kind: LinkKind) {
        debug_assert_ne!(a, b);
        let prev = self.links.insert(key(a, b), kind);
        debug_assert!(prev.is_none());
    }

    /// Line-oriented description: a `nodes` line, then one `link` line per
    /// link (`link <a> <b> <kind>`).
    pub fn describe(&self) -> String {
        let mut out = format!("butterfly n_pairs={}\nnodes", self.n_pairs);
        for n in &self.nodes {
            out.push(' ');
            out.push_str(&n.to_string());
        }
        out.push('\n');
        for l in self.links() {
            out.push_str(&format!("link {} {} {}\n", l.a, l.b, l.kind));
        }
        out
    }
}

/// Builds the size-N butterfly: `T_n-R_m` fiber for `m != n`, `R_n-M2`
/// fiber, `T_n-M1` classical, and the classical `M1-M2` bottleneck.
pub fn build_butterfly(n: usize) -> Result<Topology, TopologyError> {
    if n < 2 {
        return Err(TopologyError::TooSmall(n));
    }
    let mut t = Topology {
        n_pairs: n,
        ..Topology::default()
    };
    t.nodes.extend((1..=n).map(Node::Transmitter));
    t.nodes.extend((1..=n).map(Node::Receiver));
    t.nodes.push(Node::M1);
    t.nodes.push(Node::M2);
    for i in 1..=n {
        for j in (1..=n).filter(|&j| j != i) {
            t.add(Node::Transmitter(i), Node::Receiver(j), LinkKind::Quantum);
        }
        t.add(Node::Receiver(i), Node::M2, LinkKind::Quantum);
        t.add(Node::Transmitter(i), Node::M1, LinkKind::Classical);
    }
    t.add(Node::M1, Node::M2, LinkKind::Classical);
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Iedtc,
    /// GHZ-based reference protocol; closed-form counts only.
    Benchmark,
}

impl FromStr for Protocol {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "iedtc" => Ok(Protocol::Iedtc),
            "benchmark" => Ok(Protocol::Benchmark),
            _ => Err(TopologyError::UnknownProtocol(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceTriple {
    pub total_links: usize,
    pub quantum_links: usize,
    pub qubits: usize,
}

/// Published closed-form resource counts for a size-N network.
pub fn reference_resources(protocol: Protocol, n: usize) -> Result<ResourceTriple, TopologyError> {
    if n < 2 {
        return Err(TopologyError::TooSmall(n));
    }
    Ok(match protocol {
        Protocol::Iedtc => ResourceTriple {
            total_links: n * n + n + 1,
            quantum_links: n * n,
            qubits: 7 * n,
        },
        Protocol::Benchmark => ResourceTriple {
            total_links: 3 * n * n + 5 * n + 2,
            quantum_links: 2 * n * n + 5 * n + 2,
            qubits: 2 * n * n + 3 * n + 1,
        },
    })
}

/// Peak qubit usage of a finished protocol run: the sum over nodes of the
/// largest number of qubits each node held at once.
pub fn report_peak(net: &crate::simnet::Network) -> usize {
    net.node_peaks().values().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_size() {
        assert_eq!(build_butterfly(1), Err(TopologyError::TooSmall(1)));
        assert_eq!(build_butterfly(0), Err(TopologyError::TooSmall(0)));
    }

    #[test]
    fn small_networks_match_closed_form() {
        let t = build_butterfly(2).unwrap();
        assert_eq!(t.nodes().len(), 6);
        assert_eq!(t.link_counts(), (7, 4));
        let t = build_butterfly(3).unwrap();
        assert_eq!(t.nodes().len(), 8);
        assert_eq!(t.link_counts(), (13, 9));
    }

    #[test]
    fn empty_fixture_has_no_links() {
        assert_eq!(Topology::empty().link_counts(), (0, 0));
    }

    #[test]
    fn size_ten_by_enumeration() {
        let t = build_butterfly(10).unwrap();
        // count pair by pair rather than via link_counts
        let mut total = 0;
        let mut quantum = 0;
        for (i, a) in t.nodes().iter().enumerate() {
            for b in &t.nodes()[i + 1..] {
                if let Some(k) = t.link(*a, *b) {
                    total += 1;
                    quantum += k.carries_qubits() as usize;
                }
            }
        }
        assert_eq!((total, quantum), (111, 100));
        assert_eq!(t.link_counts(), (111, 100));
    }

    #[test]
    fn transceiver_pairs_are_not_linked() {
        let t = build_butterfly(4).unwrap();
        for n in 1..=4 {
            assert_eq!(t.link(Node::Transmitter(n), Node::Receiver(n)), None);
        }
        assert_eq!(t.link(Node::M1, Node::M2), Some(LinkKind::Classical));
        assert_eq!(t.link(Node::M2, Node::M1), Some(LinkKind::Classical));
    }

    #[test]
    fn reference_rows() {
        let r = reference_resources(Protocol::Iedtc, 2).unwrap();
        assert_eq!((r.total_links, r.quantum_links, r.qubits), (7, 4, 14));
        let r = reference_resources(Protocol::Benchmark, 2).unwrap();
        assert_eq!((r.total_links, r.quantum_links, r.qubits), (24, 20, 15));
        let r = reference_resources(Protocol::Benchmark, 3).unwrap();
        assert_eq!((r.total_links, r.quantum_links, r.qubits), (44, 35, 28));
        assert!("ghz".parse::<Protocol>().is_err());
    }

    #[test]
    fn node_names_round_trip() {
        for s in ["T1", "R12", "M1", "M2"] {
            assert_eq!(s.parse::<Node>().unwrap().to_string(), s);
        }
        assert!("X1".parse::<Node>().is_err());
        assert!("T0".parse::<Node>().is_err());
    }

    #[test]
    fn describe_lists_every_link() {
        let t = build_butterfly(2).unwrap();
        let text = t.describe();
        assert!(text.contains("nodes T1 T2 R1 R2 M1 M2"));
        assert_eq!(text.lines().filter(|l| l.starts_with("link ")).count(), 7);
        assert!(text.contains("link M1 M2 classical"));
    }
}
