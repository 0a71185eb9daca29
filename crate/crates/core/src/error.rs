use thiserror::Error;

use crate::metric_graph::{EdgeId, VertexId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown edge `{0}`")]
    UnknownEdge(EdgeId),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(VertexId),
    #[error("offset {s} outside [0, {length}] on edge `{edge}`")]
    OffsetOutOfRange { edge: EdgeId, s: f64, length: f64 },
    #[error("graph is not usable: {0}")]
    InvalidGraph(String),
    #[error("no Lagrangian for edge `{0}`")]
    MissingLagrangian(EdgeId),
    #[error("invalid Lagrangian on edge `{edge}`: {reason}")]
    InvalidLagrangian { edge: EdgeId, reason: String },
    #[error("L mismatch at vertex {vertex}: {left} vs {right}")]
    VertexMismatch { vertex: VertexId, left: f64, right: f64 },
    #[error("velocity {velocity} at vertex {vertex} needs an incident edge to fix its direction")]
    AmbiguousDirection { vertex: VertexId, velocity: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("grid function has {got} values, grid has {expected} states")]
    SizeMismatch { expected: usize, got: usize },
    #[error("state {0} is unreachable")]
    Unreachable(usize),
    #[error("negative cycle of weight {weight:e} below tolerance {tolerance:e}; the critical value is underestimated")]
    NegativeCycle { weight: f64, tolerance: f64 },
    #[error("Hamiltonian is not of eikonal type at vertex {0}")]
    NotEikonal(VertexId),
    #[error("{0}")]
    Precondition(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
