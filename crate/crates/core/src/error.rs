use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two signals (or a signal and an operator) live in different spaces.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },

    /// The new atom has no component outside W⊥, so V ∩ W⊥ ≠ {0}.
    #[error("direct-sum violation: atom lies in W⊥ (relative W-component {relative_norm:.3e})")]
    DirectSumViolation { relative_norm: f64 },

    #[error("index {index} out of range for {len} atoms")]
    IndexOutOfRange { index: usize, len: usize },

    /// The redundant-atom downdate would divide by 1 − ⟨u_j, ũ_j⟩ ≈ 0.
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed state document: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
