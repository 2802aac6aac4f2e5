use thiserror::Error;

/// Position-aware parse failure for field elements, matrices and sign patterns.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn at(input: &str, offset: usize, message: impl Into<String>) -> Self {
        let before = &input[..offset.min(input.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Error {
    /// A norm comparison could not be separated within the configured precision cap.
    #[error("precision exhausted after {bits} bits (separation needs about {needed} bits)")]
    PrecisionExhausted { bits: u64, needed: u64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("field mismatch")]
    FieldMismatch,
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("element {0} does not belong to the field")]
    NotInField(String),
    #[error("vector violates the unit-ball condition (sum of norms exceeds 1)")]
    NotInModule,
    #[error("element does not have norm 1")]
    NotUnitNorm,
    #[error("matrix is not idempotent")]
    NotIdempotent,
    #[error("enumeration of {needed} items exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("unsupported unit group of order {0}: only mu_2 and mu_4 are realised")]
    UnsupportedUnitGroup(u32),
    #[error("unsupported degree {0}")]
    UnsupportedDegree(usize),
    #[error("stable stem pi_{0}^s is not in the configured table")]
    UnsupportedStem(usize),
    #[error("no single-entry row after normalisation: {0}")]
    NormalFormFailure(String),
    #[error("witness failed: {0}")]
    WitnessFailure(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
