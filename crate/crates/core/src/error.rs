use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {modulus:#b} is not an irreducible polynomial of degree {degree}")]
    ReducibleModulus { modulus: u64, degree: u32 },
    #[error("invalid extension degree {0}")]
    InvalidDegree(u32),
    #[error("field order {0} exceeds the supported maximum of 2^20")]
    FieldTooLarge(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operation requires a binary extension field")]
    NotBinaryField,
    #[error("value {value} is not an element of a field of order {order}")]
    ElementOutOfRange { value: u64, order: u32 },
    #[error("expected length {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("decoding failed: {0}")]
    DecodeFailure(String),
    #[error(
        "no {epsilon}-synchronization string of length {n} found over {alphabet} symbols within the retry budget"
    )]
    RetryExhausted { n: usize, epsilon: f64, alphabet: u32 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("enumeration of {size} candidates exceeds the cap of {cap}")]
    EnumerationCap { size: u128, cap: u128 },
    #[error("nearest codeword is not unique")]
    Tie,
    #[error("inner code search exhausted after {attempts} attempts")]
    SearchExhausted { attempts: usize },
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("malformed input: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn decode(msg: impl Into<String>) -> Self {
        Error::DecodeFailure(msg.into())
    }

    pub(crate) fn params(msg: impl Into<String>) -> Self {
        Error::InvalidParameters(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
