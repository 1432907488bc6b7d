use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("element is not a unit")]
    NotUnit,
    #[error("division by a value that is zero to precision")]
    ZeroDivision,
    #[error("coordinate has valuation {0}; points must lie in pW")]
    OutsideDisc(i64),
    #[error("integrality violation at degree {degree}: coefficient valuation {valuation}")]
    Integrality { degree: usize, valuation: i64 },
    #[error("caps too small: {0}")]
    Caps(String),
    #[error("series has a constant term in x")]
    ConstantTerm,
    #[error("linear coefficient is not invertible")]
    NotInvertible,
    #[error("operands belong to different rings")]
    RingMismatch,
    #[error("exponential does not converge: valuation {0} is too small")]
    ExpConvergence(i64),
    #[error("iteration budget exhausted: {0}")]
    Budget(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
