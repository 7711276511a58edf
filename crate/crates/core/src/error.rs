use thiserror::Error;

/// Errors produced by the library. Every variant carries enough context to
/// point at the offending input or the numerical step that refused to run.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coefficient a_{index} = {value} is not strictly positive")]
    NonPositiveCoefficient { index: usize, value: f64 },

    #[error("quotient q_{index} = {value} is not strictly positive")]
    NonPositiveQuotient { index: usize, value: f64 },

    #[error("series spec field `{field}`: {message}")]
    SpecField { field: String, message: String },

    #[error(
        "contour |z| = {radius} passes too close to a zero: min modulus {min_modulus:e} \
         does not exceed {guard_factor} x evaluation error {error_bound:e}"
    )]
    ContourTooClose {
        radius: f64,
        min_modulus: f64,
        error_bound: f64,
        guard_factor: f64,
    },

    #[error("evaluation at x = {x} could not certify its tail (no term decay by degree {degree})")]
    UncertainEvaluation { x: f64, degree: usize },

    #[error("threshold bracket [{lo}, {hi}] for n = {n} shows no witness flip")]
    NoSignFlip { n: usize, lo: f64, hi: f64 },

    #[error("monotonicity violated: {0}")]
    Monotonicity(String),

    #[error("unknown {kind} `{name}`")]
    UnknownStrategy { kind: &'static str, name: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::SpecField {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::NonPositiveCoefficient { .. } => "non-positive-coefficient",
            Error::NonPositiveQuotient { .. } => "non-positive-quotient",
            Error::SpecField { .. } => "spec-field",
            Error::ContourTooClose { .. } => "contour-too-close",
            Error::UncertainEvaluation { .. } => "uncertain-evaluation",
            Error::NoSignFlip { .. } => "no-sign-flip",
            Error::Monotonicity(_) => "monotonicity",
            Error::UnknownStrategy { .. } => "unknown-strategy",
            Error::Io(_) => "io",
        }
    }

    /// Whether this error comes from a numerical guard rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ContourTooClose { .. }
                | Error::UncertainEvaluation { .. }
                | Error::NoSignFlip { .. }
                | Error::Monotonicity(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
