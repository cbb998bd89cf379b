use thiserror::Error;

use crate::solvers::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("invalid sparse structure: {0}")]
    InvalidStructure(String),

    #[error("non-positive weight {weight} on {what}")]
    NonPositiveWeight { what: String, weight: f64 },

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("vertex index {index} out of range for {n} vertices")]
    VertexOutOfRange { index: usize, n: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("aggregation stagnated on level {level} ({n} unknowns, coarsening ratio 1)")]
    Stagnation { level: usize, n: usize },

    #[error("zero smoother diagonal in row {row}")]
    ZeroDiagonal { row: usize },

    #[error("right-hand side not in the range of a singular operator (relative mean {relative_mean:e})")]
    IncompatibleRhs { relative_mean: f64 },

    #[error("coarse factorization failed: {0}")]
    Factorization(String),

    #[error("krylov breakdown at iteration {iteration}")]
    Breakdown { iteration: usize, report: Box<SolveReport> },

    #[error("aggregate pair is disconnected")]
    DisconnectedPair,

    #[error("pair of {size} vertices exceeds enumeration cap {cap}")]
    PairTooLarge { size: usize, cap: usize },
}
