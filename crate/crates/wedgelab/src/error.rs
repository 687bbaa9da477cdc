use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("budget exceeded while {what} (limit {limit})")]
    BudgetExceeded { what: String, limit: usize },

    #[error("coset enumeration overflowed (max_cosets = {max_cosets})")]
    Overflowed { max_cosets: usize },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("subgroup is not normal in its parent")]
    NotNormal,

    #[error("generator images do not define a homomorphism: {0}")]
    NotAMorphism(String),

    #[error("parameter violation: {0}")]
    ParameterViolation(String),

    #[error("no Schur cover construction for this family: {0}")]
    UnsupportedFamily(String),

    #[error("automorphism is not an AI-automorphism")]
    NotAi,

    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
