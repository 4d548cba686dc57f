//! Crate-wide error type.

/// Everything that can go wrong across the library.
///
/// The CLI maps these onto distinct process exit codes (see `cli::exit_code`),
/// so variants are grouped by failure class rather than by module.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A candidate order that is not a permutation of `0..m`.
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    /// Mismatched vector or histogram lengths.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A request outside what the implementation supports (candidate-count
    /// limits, missing exact density, ...).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Structurally valid input on which the operation is meaningless,
    /// e.g. normalizing a histogram whose total mass is not positive.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A candidate pair (i, j) with i == j or an id out of range.
    #[error("invalid candidate pair ({0}, {1})")]
    InvalidPair(usize, usize),

    /// The closed-form tau has no interior stationary point for these
    /// parameters; callers fall back to a direct search.
    #[error("no interior minimum for these parameters")]
    NoInteriorMinimum,

    /// A parameter outside its mathematical domain (epsilon <= 0, N < 2, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A malformed ballot or config file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A syntactically valid configuration that asks for something
    /// inconsistent (missing keys, two sweep axes, rule/candidate mismatch).
    #[error("config error: {0}")]
    Config(String),

    /// A cross-check the program promises to uphold failed at run time,
    /// e.g. the bound dominance chain ordering out of sequence.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
