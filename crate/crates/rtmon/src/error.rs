//! Error types for the front end, analyzer, engines, and trace readers.

use thiserror::Error;

/// Syntax-level failure with source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: syntax error: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub expected: String,
    pub found: String,
}

/// Static analysis failures (name resolution, typing, pacing, scheduling,
/// memory and buffer sizing).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("access rule {rule} violation: `{reader}` accessing `{target}`")]
    AccessRuleViolation {
        rule: u8,
        reader: String,
        target: String,
    },
    #[error("frequency mismatch: {0}")]
    FrequencyMismatch(String),
    #[error("cannot type expression of `{stream}`: {detail}")]
    UntypedExpression { stream: String, detail: String },
    #[error("pacing of `{0}` cannot be derived from its accesses")]
    PacingUnderconstrained(String),
    #[error("cyclic synchronous dependency: {}", .0.join(" -> "))]
    CyclicDependency(Vec<String>),
    #[error("sliding window in event-based stream `{0}`")]
    WindowInEventBasedStream(String),
    #[error("window of {duration}s in a {freq}Hz stream has non-integer bucket count")]
    FractionalBucketCount { duration: String, freq: String },
    #[error("buffer sizing diverges: delta_min-1 < dld_bound ({delta_min}-1 < {dld_bound})")]
    Unbounded { delta_min: u64, dld_bound: u64 },
    #[error("{0} is not representable on the nanosecond grid")]
    OffGrid(String),
}

/// Runtime failures of the simulated monitor.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("malformed queue entry: expected {expected} bits, got {got}")]
    MalformedEntry { expected: usize, got: usize },
    #[error("evaluation of unextended dependency: stream `{0}` (layering bug)")]
    EvaluationOfUnextendedDependency(String),
    #[error("internal assertion: {0}")]
    Internal(String),
}

/// Trace file problems, reported with a 1-based row number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("trace row {row}: {msg}")]
pub struct TraceError {
    pub row: usize,
    pub msg: String,
}

impl TraceError {
    pub fn new(row: usize, msg: impl Into<String>) -> Self {
        TraceError {
            row,
            msg: msg.into(),
        }
    }
}
