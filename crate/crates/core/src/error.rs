use thiserror::Error;

/// Errors raised by ring construction, sampling, statistics and knot analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ring needs at least 3 edges, got {0}")]
    TooFewEdges(usize),
    #[error("open chain needs at least 1 edge")]
    EmptyChain,
    #[error("edge {index} has norm {norm}, expected 1")]
    NotUnitEdge { index: usize, norm: f64 },
    #[error("non-finite coordinate in edge {0}")]
    NonFinite(usize),
    #[error("closure defect {defect} exceeds tolerance {tolerance}")]
    NotClosed { defect: f64, tolerance: f64 },
    #[error("segment length {k} out of range 1..={n}")]
    LengthOutOfRange { k: usize, n: usize },
    #[error("hedgehog construction needs an even n >= 4, got {0}")]
    OddLength(usize),
    #[error("edges {j} and {k} are parallel or antiparallel")]
    ParallelEdges { j: usize, k: usize },
    #[error("crankshaft needs two distinct edge indices, got {0} twice")]
    SameEdge(usize),
    #[error("edge index {index} out of range for {n} edges")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("exceeded {0} rejected crankshaft pair draws")]
    MixingStalled(usize),
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("ensemble mixes ring lengths {0} and {1}")]
    MixedLengths(usize, usize),
    #[error("{0}")]
    Domain(String),
    #[error("degenerate projection: {0}")]
    DegenerateProjection(&'static str),
    #[error("no generic projection found after {0} directions")]
    ProjectionFailed(usize),
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),
    #[error("projections disagree on knot determinant: {0:?}")]
    InconsistentClassification(Vec<u64>),
    #[error("expected a trefoil, ring classified as {0}")]
    NotTrefoil(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
