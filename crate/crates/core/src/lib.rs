//! Quantum architecture search over parameterized ZX-diagrams.
//!
//! Diagrams are evolved with graph-theoretic mutations, kept only when a
//! circuit can be extracted from them, and scored by training the extracted
//! circuit on a regression target with a statevector simulator.

pub mod bench;
pub mod circuit;
pub mod contract;
pub mod diagram;
pub mod error;
pub mod evolve;
pub mod extract;
pub mod flow;
pub mod generate;
pub mod gf2;
pub mod mutations;
pub mod phase;
pub mod report;
pub mod rewrite;
pub mod sim;
pub mod study;
pub mod train;

pub use bench::{target, TargetFunction};
pub use circuit::{CircuitMetrics, Gate, GateCircuit};
pub use contract::{contract, diagrams_equal, SemanticMatrix};
pub use diagram::{diagram_stats, DiagramStats, EdgeType, SpiderKind, VertexId, ZxDiagram};
pub use error::{Error, Result};
pub use extract::{check_valid, extract_circuit, ExtractionResult, ExtractionStats};
pub use flow::{gflow_exists, underlying_open_graph, OpenGraph};
pub use mutations::{mutate, MutationKind, MutationOutcome, MutationResult};
pub use phase::{Binding, PhaseExpr, SymbolId, SymbolKind};
pub use rewrite::to_graph_like;
pub use sim::{circuit_matrix, gradient, mse, simulate, Dataset};
pub use train::{train, TrainConfig, TrainResult};
