use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("universe too large: {size} exceeds the cap of {max}")]
    UniverseTooLarge { size: usize, max: usize },
    #[error("arity cap {requested} exceeds the configured cap {max}")]
    ArityCapExceeded { requested: usize, max: usize },
    #[error("domain too large for exhaustive enumeration: {size} > {max}")]
    DomainTooLarge { size: usize, max: usize },
    #[error("growth budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("requirement starved: {unmet} requirement(s) unmet at budget {budget}")]
    RequirementStarved { unmet: usize, budget: usize },
    #[error("element {0} out of universe")]
    OutOfUniverse(usize),
    #[error("base amalgam failed: {0}")]
    BaseAmalgamFailed(String),
    #[error("coloring clash: {0}")]
    ColoringClash(String),
    #[error("back-and-forth condition ({condition}) violated at stage {stage}: {detail}")]
    ConditionViolation {
        condition: usize,
        stage: usize,
        detail: String,
    },
    #[error("certificate failed at clause ({clause}): {detail}")]
    CertificateFailed { clause: String, detail: String },
    #[error("permutation is not equivariant: {0}")]
    NotEquivariant(String),
    #[error("domain too small: {0}")]
    DomainTooSmall(String),
    #[error("window mismatch: {0}")]
    WindowMismatch(String),
    #[error("unknown builtin: {0}")]
    UnknownBuiltin(String),
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}
