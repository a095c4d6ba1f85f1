//! Layered conceptual hypergraphs with a fitness triple.
//!
//! Order-1 edges join two concept nodes; an order-`N` edge is a set of
//! order-`N-1` edge ids. A [`ConceptGraph`] supports storage, removal and
//! recall, associative ([`ConceptGraph::reason_s1`]) and deliberate
//! ([`ConceptGraph::reason_s2`]) reasoning, and lifting/projection between
//! orders. [`AgentMind`] pairs a graph with a [`FitnessTriple`] and an
//! append-only log of the transformations applied to it.
//!
//! Every operation is functional: it returns a new value and leaves its
//! input untouched. Ties are broken by ascending id.

mod format;
mod graph;
mod mind;
mod reason;

use thiserror::Error;

pub use format::{from_text, to_text};
pub use graph::{glob_match, Annotation, ConceptGraph, Id, Item, ItemRef, RecallKey, Recalled};
pub use mind::{
    adapt, bridge, fitness_eval, fitness_eval_with, fitness_track, stability_score, sustainable, AgentMind,
    ConnectivityRatio, EnvSignal, FitnessFunctional, FitnessTriple, Operation, ReferenceRegulator, Regulator,
    DEFAULT_TARGET,
};
pub use reason::ProblemSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("order-{order} edge member {member} does not exist in the layer below")]
    DanglingMember { order: usize, member: Id },
    #[error("id {id} already used in layer {layer} (0 = nodes)")]
    DuplicateId { layer: usize, id: Id },
    #[error("edges must have at least one member")]
    EmptyEdge,
    #[error("order-1 edges join exactly two distinct nodes")]
    BadArity,
    #[error("graph has no layer of order {0}")]
    UnknownLayer(usize),
    #[error("unknown node {0}")]
    UnknownNode(Id),
    #[error("unknown order-{order} edge {id}")]
    UnknownEdge { order: usize, id: Id },
    #[error("item is referenced by a higher-order edge")]
    InUse,
    #[error("projection needs order >= 2")]
    OrderTooLow,
    #[error("lift groups must be non-empty")]
    EmptyGroup,
    #[error("domains overlap on node {0}")]
    Overlap(Id),
    #[error("domains must be non-empty")]
    EmptyDomain,
    #[error("unsupported action: {0}")]
    UnsupportedAction(String),
    #[error("history of {len} entries is shorter than window {window}")]
    InsufficientHistory { len: usize, window: usize },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type GraphResult<T> = std::result::Result<T, GraphError>;
