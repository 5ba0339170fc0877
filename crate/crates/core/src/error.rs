use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields: {0} and {1}")]
    FieldMismatch(String, String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds the 2^61 limit")]
    ModulusTooLarge(u64),
    #[error("cannot parse scalar {0:?}: {1}")]
    ParseScalar(String, String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {0} outside supported range 1..=16")]
    DimensionOutOfRange(usize),
    #[error("index ({0}) out of range for dimension {1}")]
    IndexOutOfRange(String, usize),
    #[error("polynomial degree {found} exceeds guard {bound}")]
    DegreeGuard { found: u32, bound: u32 },
    #[error("the associativity criterion applies to bilinear operations only; this operation has linear terms (use randomized testing via the `axioms` command)")]
    NotBilinear,
    #[error("malformed bracket tree: {0}")]
    MalformedTree(String),
    #[error("unknown built-in model {0:?}")]
    UnknownModel(String),
    #[error("missing parameters for model {0}")]
    MissingParams(String),
    #[error("coefficient is not a constant: {0}")]
    NonConstantCoefficient(String),
    #[error("unsupported term in component formula: {0}")]
    UnsupportedTerm(String),
    #[error("the zero vector has no stratum")]
    ZeroVector,
    #[error("space too large to enumerate: {p}^{n} exceeds 2^24")]
    EnumerationGuard { p: u64, n: usize },
    #[error("operation requires a prime field")]
    RequiresPrimeField,
    #[error("no stratification available: {0}")]
    NoStrata(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid model specification: {0}")]
    InvalidModel(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
