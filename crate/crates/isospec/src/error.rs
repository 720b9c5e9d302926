use thiserror::Error;

use crate::complex::LengthClass;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("unpaired side {side} of cell {cell}")]
    UnpairedSide { cell: String, side: String },
    #[error("side {side} of cell {cell} occurs in more than one pairing")]
    DuplicatePairing { cell: String, side: String },
    #[error("length class mismatch between {a} and {b}")]
    LengthMismatch { a: String, b: String },
    #[error("vertex {vertex} fails the link condition: {reason}")]
    VertexLink { vertex: usize, reason: String },
    #[error("metric parameters out of range: b = {b}, c = {c} (need 0 < c < b < 1)")]
    Metric { b: f64, c: f64 },
    #[error("inconsistent identification: {0}")]
    Inconsistent(String),
    #[error("complex {0} has no branch locus")]
    NotAmalgam(String),
    #[error("curve is not a closed curve in the skeleton: {0}")]
    NotEmbedded(String),
    #[error("isometry is not hyperbolic (|trace| = {trace})")]
    NonHyperbolic { trace: f64 },
    #[error("axis misses developed side {index}")]
    AxisMiss { index: usize },
    #[error("geodesic bends at branch crossing {index}")]
    BranchAngleViolation { index: usize },
    #[error("word does not close: {0}")]
    ClosureFailure(String),
    #[error("transition table ill-defined for ({class:?}, delta = {delta})")]
    IllDefined { class: LengthClass, delta: u8 },
    #[error("no surface copy admits the segment: {0}")]
    NoValidCopy(String),
    #[error("cover arithmetic inconsistent: {0}")]
    Cover(String),
    #[error("vector cardinality mismatch: {0} vs {1}")]
    Cardinality(usize, usize),
    #[error("cutoff mismatch: {0} vs {1}")]
    CutoffMismatch(f64, f64),
    #[error("word does not cross the branch locus")]
    NoBranchCrossing,
    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
