use thiserror::Error;

/// Errors raised while validating a behavior's own invariants.
///
/// Kept separate from no-signaling failures: a behavior that is not a
/// probability table is malformed, not signaling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("negative probability {value} at settings {settings}, outcomes {outcomes}")]
    Negative {
        settings: String,
        outcomes: String,
        value: f64,
    },
    #[error("settings {settings} sum to {sum}, expected 1 within {tol}")]
    Normalization { settings: String, sum: f64, tol: f64 },
    #[error("table has {actual} entries, scenario requires {expected}")]
    TableSize { expected: usize, actual: usize },
    #[error("distribution over {n} events has {actual} atoms, expected {expected}")]
    DistributionSize {
        n: usize,
        expected: usize,
        actual: usize,
    },
    #[error("distribution sums to {sum}, expected 1")]
    Unnormalized { sum: f64 },
}

/// Linear programming failures. Both signal a formulation bug for the
/// no-signaling polytope, which is nonempty and bounded.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex exceeded {0} iterations")]
    IterationLimit(usize),
    #[error("basis matrix is singular")]
    SingularBasis,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("unsupported scenario: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("enumeration of {count} strategies exceeds the cap of {cap}")]
    CountTooLarge { count: u128, cap: u128 },
    #[error("linear program with {variables} variables exceeds the cap of {cap}")]
    SizeCap { variables: usize, cap: usize },
    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),
    #[error("internal formulation error: {0}")]
    Lp(#[from] LpError),
    #[error("optimality certificate rejected: {0}")]
    Certificate(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Unsupported(_) => "unsupported",
            Error::Validation(_) => "validation",
            Error::CountTooLarge { .. } => "count_too_large",
            Error::SizeCap { .. } => "size_cap",
            Error::ScenarioMismatch(_) => "scenario_mismatch",
            Error::Lp(_) => "lp_formulation",
            Error::Certificate(_) => "certificate",
            Error::Structural(_) => "structural",
            Error::Parse { .. } => "parse",
            Error::UnknownPreset(_) => "unknown_preset",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
