//! Simulation of entanglement distribution and coded teleportation over a
//! hybrid classical-quantum butterfly network, with rotation encryption
//! against an intermediate eavesdropper.

pub mod experiments;
pub mod iedtc;
pub mod qsre;
pub mod qstate;
pub mod simnet;
pub mod topology;
pub mod trials;

pub use experiments::{binomial_ci, ExperimentError, Interval, SweepRow};
pub use iedtc::{run_round, run_round_with, ProtocolError, RoundOptions, RoundResult, Schedule};
pub use qsre::{PrivateKey, QsreError, RotationSpec, SignConvention};
pub use qstate::{Gate, Ket, QubitId, StateError, StateRegistry};
pub use simnet::{NetError, Network};
pub use topology::{build_butterfly, Node, Topology, TopologyError};
pub use trials::Execution;
