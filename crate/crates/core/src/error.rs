use thiserror::Error;

/// Errors raised by the solver and the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A structural condition on the bump or the constructed weight was violated.
    #[error("condition {clause} violated: {detail}")]
    Validation { clause: String, detail: String },

    /// Hypotheses required by a check do not hold for the given weight.
    #[error("hypothesis gate failed: {0}")]
    HypothesisGate(String),

    #[error("weight not evaluable at r = {r}")]
    WeightEvaluation { r: f64 },

    #[error("step size collapsed at r = {r} (h = {h})")]
    StepCollapse { r: f64, h: f64 },

    #[error("step budget of {steps} exhausted at r = {r}")]
    StepBudget { steps: usize, r: f64 },

    #[error("quadrature failed to converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn validation(clause: &str, detail: impl Into<String>) -> Self {
        Error::Validation {
            clause: clause.to_string(),
            detail: detail.into(),
        }
    }

    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::WeightEvaluation { .. }
                | Error::StepCollapse { .. }
                | Error::StepBudget { .. }
                | Error::Quadrature { .. }
                | Error::InsufficientData(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
