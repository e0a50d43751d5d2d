use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("sensor index {index} out of range for a field of {count} sensors")]
    SensorIndex { index: usize, count: usize },

    #[error(
        "quadrature did not converge: partial value {value:e}, error estimate {error_estimate:e} after {evaluations} evaluations"
    )]
    Quadrature {
        value: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    #[error("infeasible altitude: {0}")]
    InfeasibleAltitude(String),

    #[error("net transmit power is negative ({net:e} W); the UAV cannot sustain itself at this altitude")]
    NegativeNetPower { net: f64 },

    #[error("closed-form approximation not applicable: {0}")]
    ApproximationInvalid(String),

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::SensorIndex { .. } => "sensor_index",
            Error::Quadrature { .. } => "quadrature",
            Error::InfeasibleAltitude(_) => "infeasible_altitude",
            Error::NegativeNetPower { .. } => "negative_net_power",
            Error::ApproximationInvalid(_) => "approximation_invalid",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
