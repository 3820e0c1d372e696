use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("arm count must be at least 2, got {0}")]
    TooFewArms(usize),

    #[error("parameter set is empty")]
    EmptyParameterSet,

    #[error("value set is empty")]
    EmptyValueSet,

    #[error("parameter `{name}` has {got} means, expected {expected}")]
    WrongLength { name: String, got: usize, expected: usize },

    #[error("parameter `{name}`: mean {value} of arm index {arm} is outside [0, 1]")]
    MeanOutOfRange { name: String, arm: usize, value: f64 },

    #[error("duplicate parameter identifier `{0}`")]
    DuplicateName(String),

    #[error("parameter `{name}`, arm index {arm}: {reason}")]
    InvalidDistribution { name: String, arm: usize, reason: String },

    #[error("tie epsilon must be finite and nonnegative, got {0}")]
    InvalidTieEpsilon(f64),

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("parameter index {index} out of range ({count} parameters)")]
    ParameterOutOfRange { index: usize, count: usize },

    #[error("arm index {arm} out of range ({arms} arms)")]
    ArmOutOfRange { arm: usize, arms: usize },

    #[error("unknown policy `{0}` (valid: fp-ucb, ucb1, thompson)")]
    UnknownPolicy(String),

    #[error("horizon {horizon} is shorter than the initialization phase ({arms} pulls)")]
    HorizonTooShort { horizon: u64, arms: usize },

    #[error("policy stepped beyond its horizon {0}")]
    HorizonExceeded(u64),

    #[error("arm index {0} has not been pulled yet")]
    UnpulledArm(usize),

    #[error("parameter `{0}` cannot be distinguished from the true parameter on any exploration arm")]
    Indistinguishable(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors caused by an instance that violates a model invariant.
    pub fn is_invalid_instance(&self) -> bool {
        matches!(
            self,
            Error::TooFewArms(_)
                | Error::EmptyParameterSet
                | Error::EmptyValueSet
                | Error::WrongLength { .. }
                | Error::MeanOutOfRange { .. }
                | Error::DuplicateName(_)
                | Error::InvalidDistribution { .. }
                | Error::InvalidTieEpsilon(_)
                | Error::UnknownParameter(_)
                | Error::ParameterOutOfRange { .. }
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
