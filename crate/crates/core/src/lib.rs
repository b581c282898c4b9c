//! Multi-level partitioner for weighted directed hypergraphs.
//!
//! Partitions are subject to two hard constraints: a maximum partition size
//! and a maximum number of distinct inbound hyperedges per partition. The
//! objective is connectivity, the total weight each hyperedge pays for every
//! partition beyond the first it touches.
//!
//! The pipeline follows the classic multi-level scheme: pairwise coarsening
//! driven by neighbor histograms and an exact maximum-weight matching over
//! the resulting proposal pseudo-forest, initial partitions taken from the
//! coarsest level, and uncoarsening with chained-move refinement validated
//! through sparse constraint events. A secondary k-way balanced mode maps the
//! same machinery onto the standard `(k, epsilon)` formulation.
//!
//! Entry points: [`partition_constrained`] and [`partition_kway`], plus file
//! I/O and a synthetic instance generator in [`io`]. Brute-force reference
//! implementations used by tests and the `baseline` CLI live in [`oracle`].

pub mod coarse;
pub mod coarsening;
pub mod driver;
pub mod hgraph;
pub mod io;
pub mod matching;
pub mod neighborhood;
pub mod oracle;
pub mod partition;
pub mod refinement;

pub use coarse::{build_gamma, coarsen_hypergraph, coarsen_neighbors, LevelMap};
pub use coarsening::{
    build_histogram, leftover_pairing, propose_candidates, CoarseningParams, HistogramEntry,
    ProposalGraph, ProposalRound,
};
pub use driver::{
    build_level_stack, partition_constrained, partition_kway, project, LevelData, LevelStack,
    LevelStats, Mode, PartitionerConfig, PassRecord, RunStats, Timings,
};
pub use hgraph::{build_incidence, Constraints, EdgeId, Hypergraph, IncidenceIndex, NodeId};
pub use matching::{find_roots, matching_total, run_rounds, solve_matching, MatchState};
pub use neighborhood::{materialize_neighbors, NeighborSets};
pub use partition::{
    build_pins_matrix, connectivity, coarsening_score, cut_net, validate_partitioning, PartId,
    Partitioning, PinsMatrix, PinsMode, ValidationReport, Violation,
};
pub use refinement::{
    refine_level, EventStream, Move, MoveSequence, PassStats, RefineParams, SequenceValidation,
};

/// Errors reported by the partitioning library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("infeasible instance: node {node} alone violates the constraints ({reason})")]
    Infeasible { node: usize, reason: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("proposal graph structure violation: {0}")]
    Structure(String),
    #[error("oracle limit exceeded: {0}")]
    OracleLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
