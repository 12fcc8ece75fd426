use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The signature would generate more worlds than the configured cap
    /// allows. Every solver materializes vectors over the world set, so this
    /// is a hard error rather than a silent truncation.
    #[error("signature spans {world_count} worlds, exceeding the cap of {cap}")]
    WorldCapExceeded { world_count: u128, cap: u64 },

    /// A syntactic or semantic error in a knowledge-base file.
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// Ill-formed signature (duplicate names, undersized domains, ...).
    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    /// Ill-formed knowledge base (dangling literal, duplicate label, bad
    /// probability, ...).
    #[error("invalid knowledge base: {0}")]
    InvalidKnowledgeBase(String),

    /// A constraint that no distribution can satisfy non-vacuously, e.g.
    /// conditioning a positive probability on a contradiction.
    #[error("constraint {index} is not self-consistent: {text}")]
    SelfInconsistent { index: usize, text: String },

    /// Probability vector length does not match the knowledge base.
    #[error("expected {expected} probabilities, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// Subset enumeration (minimal inconsistent subsets, Shapley values)
    /// refused because 2^n would be too large.
    #[error("{n} constraints exceed the subset enumeration cap of {cap}")]
    SubsetCapExceeded { n: usize, cap: usize },

    /// The lattice oracle would have to enumerate too many points.
    #[error("lattice of {points} points exceeds the enumeration budget of {budget}")]
    LatticeBudgetExceeded { points: u128, budget: u64 },

    /// The repaired knowledge base failed its consistency verification.
    /// This signals a solver defect and is never silently returned.
    #[error("repaired knowledge base failed the consistency check")]
    RepairVerificationFailed,

    /// Invalid solver configuration.
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    /// Numerical failure inside the linear-programming core.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
