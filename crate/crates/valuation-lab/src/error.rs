use std::fmt;

/// Crate-wide error type. `code()` is the stable machine-readable name that
/// the CLI serializes; `Display` adds the human context.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DomainMismatch(String),
    ZeroPoly(String),
    TowerDepth(String),
    NotPrime(String),
    PrecisionExhausted(String),
    UncertifiedDescriptor(String),
    DuplicateValuations(String),
    NotIrreducible(String),
    RefinementLimit(String),
    IndexOutOfRange(String),
    HenselPrecondition(String),
    PrecisionOverflow(String),
    NotSimpleRoot(String),
    NotIntegral(String),
    NotAMember(String),
    MissingOne(String),
    NotSubgroup(String),
    InfiniteIndex(String),
    MalformedStage(String),
    NotFormallyPadic(String),
    TriggerUnmet(String),
    DegreeBound(String),
    ParseError { offset: usize, message: String },
    /// An internal certification check failed. Should never escape on inputs
    /// within the documented bounds; kept loud rather than papered over.
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::DomainMismatch(_) => "DOMAIN_MISMATCH",
            Error::ZeroPoly(_) => "ZERO_POLY",
            Error::TowerDepth(_) => "TOWER_DEPTH",
            Error::NotPrime(_) => "NOT_PRIME",
            Error::PrecisionExhausted(_) => "PRECISION_EXHAUSTED",
            Error::UncertifiedDescriptor(_) => "UNCERTIFIED_DESCRIPTOR",
            Error::DuplicateValuations(_) => "DUPLICATE_VALUATIONS",
            Error::NotIrreducible(_) => "NOT_IRREDUCIBLE",
            Error::RefinementLimit(_) => "REFINEMENT_LIMIT",
            Error::IndexOutOfRange(_) => "INDEX_OUT_OF_RANGE",
            Error::HenselPrecondition(_) => "HENSEL_PRECONDITION",
            Error::PrecisionOverflow(_) => "PRECISION_OVERFLOW",
            Error::NotSimpleRoot(_) => "NOT_SIMPLE_ROOT",
            Error::NotIntegral(_) => "NOT_INTEGRAL",
            Error::NotAMember(_) => "NOT_A_MEMBER",
            Error::MissingOne(_) => "MISSING_ONE",
            Error::NotSubgroup(_) => "NOT_SUBGROUP",
            Error::InfiniteIndex(_) => "INFINITE_INDEX",
            Error::MalformedStage(_) => "MALFORMED_STAGE",
            Error::NotFormallyPadic(_) => "NOT_FORMALLY_PADIC",
            Error::TriggerUnmet(_) => "TRIGGER_UNMET",
            Error::DegreeBound(_) => "DEGREE_BOUND",
            Error::ParseError { .. } => "PARSE_ERROR",
            Error::Internal(_) => "INTERNAL",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ParseError { offset, message } => {
                write!(f, "{}: {} (byte offset {})", self.code(), message, offset)
            }
            Error::DomainMismatch(m)
            | Error::ZeroPoly(m)
            | Error::TowerDepth(m)
            | Error::NotPrime(m)
            | Error::PrecisionExhausted(m)
            | Error::UncertifiedDescriptor(m)
            | Error::DuplicateValuations(m)
            | Error::NotIrreducible(m)
            | Error::RefinementLimit(m)
            | Error::IndexOutOfRange(m)
            | Error::HenselPrecondition(m)
            | Error::PrecisionOverflow(m)
            | Error::NotSimpleRoot(m)
            | Error::NotIntegral(m)
            | Error::NotAMember(m)
            | Error::MissingOne(m)
            | Error::NotSubgroup(m)
            | Error::InfiniteIndex(m)
            | Error::MalformedStage(m)
            | Error::NotFormallyPadic(m)
            | Error::TriggerUnmet(m)
            | Error::DegreeBound(m)
            | Error::Internal(m) => write!(f, "{}: {}", self.code(), m),
        }
    }
}

impl std::error::Error for Error {}
