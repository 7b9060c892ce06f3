use num_rational::BigRational;
use thiserror::Error;

/// Hypotheses checked before evaluating a theorem-backed formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Hypothesis {
    OddClassNumber { disc: i64, class_number: u64 },
    SquarefreeLevel { n: u64 },
    CoprimeToDisc { n: u64, disc: i64 },
    PrimeDiscriminant { disc: i64 },
    ClassNumberOne { disc: i64, class_number: u64 },
    EvenWeight { k: u32 },
    OddDiscriminant { disc: i64 },
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hypothesis::OddClassNumber { disc, class_number } => {
                write!(f, "odd class number (h_K = {class_number} for D_K = {disc})")
            }
            Hypothesis::SquarefreeLevel { n } => write!(f, "square-free level (N = {n})"),
            Hypothesis::CoprimeToDisc { n, disc } => {
                write!(f, "level coprime to discriminant (N = {n}, D_K = {disc})")
            }
            Hypothesis::PrimeDiscriminant { disc } => {
                write!(f, "D_K = -p with p prime, p = 3 mod 4 (got {disc})")
            }
            Hypothesis::ClassNumberOne { disc, class_number } => {
                write!(f, "class number one (h_K = {class_number} for D_K = {disc})")
            }
            Hypothesis::EvenWeight { k } => write!(f, "even weight (k = {k})"),
            Hypothesis::OddDiscriminant { disc } => {
                write!(f, "odd discriminant (D_K = {disc})")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("exponent {0} exceeds the supported maximum of 64")]
    ExponentTooLarge(u32),
    #[error("weight must be at least 2 (got {0})")]
    InvalidWeight(u32),
    #[error("dimension formula gave non-integral value {0}")]
    FormulaNonIntegral(BigRational),
    #[error("dimension formula gave negative value {0}")]
    FormulaNegative(BigRational),
    #[error("no d-part entry for D_K = {disc}, d = {d}")]
    MissingDPart { disc: i64, d: u64 },
    #[error("no supercuspidal constants for p = {0}")]
    MissingScConstants(u64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(Hypothesis),
    #[error("unsupported character: {0}")]
    UnsupportedCharacter(String),
    #[error("malformed HNF [{a}, {b}, {c}]: {reason}")]
    MalformedHnf { a: u64, b: u64, c: u64, reason: String },
    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },
    #[error("duplicate key at row {row}: {key}")]
    DuplicateKey { row: usize, key: String },
    #[error("negative genuine dimension at row {row}: {detail}")]
    NegativeGenuine { row: usize, detail: String },
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
