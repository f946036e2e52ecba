use thiserror::Error;

/// Errors raised by the solver, simulators, and config loader.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error(
        "single premium {rate} per unit of benefit is not below 1 (the loading must satisfy r > theta * (lambda_x + lambda_y))"
    )]
    PremiumNotViable { rate: f64 },

    #[error("loss probability {q} exceeds {max}, the value implied by actuarially fair pricing")]
    LossProbabilityTooHigh { q: f64, max: f64 },

    #[error(
        "willingness to pay {willingness_to_pay} has no risk-aversion solution; it must lie strictly between {lower} and {upper}"
    )]
    NoSolution {
        willingness_to_pay: f64,
        lower: f64,
        upper: f64,
    },

    #[error("the pre-death drift needs an interior optimum, but the optimal benefit is zero")]
    InteriorOptimumRequired,

    #[error("singular parameter combination: {0}")]
    SingularParameter(String),

    #[error(
        "variational inequality violated at w = {w}, D = {benefit}: {check} = {value:e} exceeds tolerance {tol:e}"
    )]
    VerificationFailed {
        w: f64,
        benefit: f64,
        check: String,
        value: f64,
        tol: f64,
    },

    #[error("invalid simulation config: {0}")]
    ConfigInvalid(String),

    #[error("config document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// Name of the offending input field, when the error refers to one.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::InvalidParameter { field, .. } => Some(field),
            Error::PremiumNotViable { .. } => Some("premium"),
            Error::LossProbabilityTooHigh { .. } => Some("loss_probability"),
            Error::NoSolution { .. } => Some("willingness_to_pay"),
            _ => None,
        }
    }
}
