use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid ring context: {0}")]
    InvalidContext(String),
    #[error("operands come from different ring contexts")]
    ContextMismatch,
    #[error("element is zero at the working precision")]
    ZeroElement,
    #[error("division by an element that is zero at the working precision")]
    ZeroDivisor,
    #[error("element is not a unit on the requested interval")]
    NotAUnit,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("overlap hypothesis failed: {0}")]
    BadOverlap(String),
    #[error("matrix is singular at the working precision")]
    SingularAtPrecision,
    #[error("c = {c} and d = {d} are not coprime")]
    NotCoprime { c: i64, d: i64 },
    #[error("determinant has slopes on the module's radius interval")]
    DetHasSlopes,
    #[error("no cyclic vector found after {0} attempts")]
    NoCyclicVectorFound(usize),
    #[error("matrix has negative u-support; the specialization route needs a power-series model")]
    NegativeSupport,
    #[error("specialization at u = 0 is singular")]
    SingularSpecialization,
    #[error("matrix entries are not integral")]
    NonIntegralMatrix,
    #[error("polygon endpoints differ: {0}")]
    EndpointMismatch(String),
    #[error("window overflow: {0}")]
    WindowOverflow(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
