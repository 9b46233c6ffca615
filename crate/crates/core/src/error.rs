use thiserror::Error;

/// Errors produced by measure, relation, and solver operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Two values that must live on the same ground space do not.
    #[error("ground space mismatch: {0}")]
    SpaceMismatch(&'static str),

    /// A block list is not a partition of the atoms.
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    /// A mass vector violates the invariants of its declared kind.
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// Exact division by zero.
    #[error("division by zero")]
    DivisionByZero,

    /// A rational literal could not be parsed.
    #[error("invalid rational '{input}': {reason}")]
    InvalidRational { input: String, reason: String },

    /// Pairs given with `close = false` do not already form an equivalence relation.
    #[error("pairs do not form an equivalence relation: {0}; pass close=true to take the closure")]
    NotAnEquivalence(String),

    /// The relation is not measurable for the product sigma-algebra
    /// (some class is not a union of sigma blocks), violated precondition: is_measurable.
    #[error("equivalence relation is not measurable (violated precondition: is_measurable)")]
    NonMeasurableRelation,

    /// A claimed sub-coupling is not dominated by the requested marginals.
    #[error("not a sub-coupling of the given marginals: {0}")]
    NotSubcoupling(String),

    /// A chain of relations is empty, mixes spaces, or is not increasing.
    #[error("invalid chain: {0}")]
    InvalidChain(String),

    /// An internal invariant that the algorithms guarantee was observed broken.
    /// This is a defect in the library, never a user error.
    #[error("internal invariant breach: {0}")]
    InternalInvariant(String),

    /// Poisson truncation leaves too much mass outside the grid.
    #[error("truncation too coarse: retained product mass {retained} is below 1 - 1e-9")]
    TruncationTooCoarse { retained: f64 },

    /// Miscellaneous invalid argument; the message names the violated hypothesis.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
