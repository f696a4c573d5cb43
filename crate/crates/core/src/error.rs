use thiserror::Error;

/// Errors surfaced by every module of the crate.
///
/// `HypothesisNotMet` is kept separate from the other variants so that batch
/// drivers can tell "this theorem does not apply" apart from real failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate rate label `{0}`")]
    DuplicateLabel(String),
    #[error("reaction `{0}` has identical reactant and product")]
    ReactantEqualsProduct(String),
    #[error("duplicate reaction {0}")]
    DuplicateReaction(String),
    #[error("rate label clash: {0}")]
    LabelClash(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("network is not monomolecular: {0}")]
    NotMonomolecular(String),
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("Groebner basis budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("internal assertion failed: {0}")]
    Internal(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable machine-readable code for reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::DuplicateLabel(_) => "duplicate-label",
            Error::ReactantEqualsProduct(_) => "reactant-equals-product",
            Error::DuplicateReaction(_) => "duplicate-reaction",
            Error::LabelClash(_) => "label-clash",
            Error::Precondition(_) => "precondition",
            Error::NotMonomolecular(_) => "not-monomolecular",
            Error::HypothesisNotMet(_) => "hypothesis-not-met",
            Error::BudgetExceeded(_) => "budget-exceeded",
            Error::Internal(_) => "internal",
            Error::Invalid(_) => "invalid",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
