use core::fmt;

/// Errors raised by parameter validation and estimator inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside its admissible range.
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    /// A weight passed to a monotone accumulator was negative.
    NegativeIncrement(f64),
    /// A heavy-hitter report was requested without a norm value.
    MissingNorm,
    /// A moment estimate handed to the entropy interpolation was not positive.
    NonPositiveMoment { node: usize, value: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidParameter { name, reason }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::NegativeIncrement(w) => write!(f, "negative accumulator increment {w}"),
            Error::MissingNorm => f.write_str("heavy-hitter report requires a norm value"),
            Error::NonPositiveMoment { node, value } => {
                write!(f, "moment estimate at node {node} is not positive ({value})")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
