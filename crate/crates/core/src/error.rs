use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HilbError {
    #[error("degenerate pairing: {0}")]
    DegeneratePairing(String),
    #[error("product is not associative on basis triple ({0}, {1}, {2})")]
    NonAssociative(String, String, String),
    #[error("product is not graded-commutative on basis pair ({0}, {1})")]
    NonCommutative(String, String),
    #[error("unit axiom fails: {0}")]
    NonUnital(String),
    #[error("grading violation: {0}")]
    GradingViolation(String),
    #[error("unknown surface: {0}")]
    UnknownName(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("tensor arity {got} does not match {expected} weights")]
    ArityMismatch { expected: usize, got: usize },
    #[error("odd class rejected: {0}")]
    OddClassRejected(String),
    #[error("odd cohomology is not supported by the orbifold ring")]
    OddCohomologyUnsupported,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("word basis failed to span weight {n}, degree {d}")]
    SpanFailure { n: usize, d: usize },
    #[error("generators failed to span weight {n}, degree {d}")]
    GenerationFailure { n: usize, d: usize },
    #[error("integrand has weighted degree {got}, expected {expected}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("interpolation disagrees with held-out sample {0}")]
    InterpolationInconsistent(String),
    #[error("invalid Betti numbers: {0}")]
    InvalidBetti(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, HilbError>;
