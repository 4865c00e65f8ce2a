use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("size mismatch in {context}: expected {expected}, found {found}")]
    SizeMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("element index {index} out of range for magma of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: String },

    #[error("empty function family")]
    EmptyFamily,

    #[error("not a point of the simplex: {0}")]
    NotInSimplex(String),

    #[error("invalid target interval [{lo}, {hi}]: need 0 < lo <= hi < 1")]
    InvalidInterval { lo: String, hi: String },

    #[error("term depth guard of {limit} exceeded")]
    DepthExceeded { limit: usize },

    #[error("ratio {target} is not reachable by powers of the base ratios")]
    UnreachableRatio { target: String },

    #[error("malformed term at byte {offset}: {message}")]
    TermSyntax { offset: usize, message: String },

    #[error("function {index} ({name}) is not convex for the given operation")]
    NotConvex { index: usize, name: String },

    #[error("pointwise maximum is negative at element {element}")]
    MaxNegative { element: usize },

    #[error("objective value at x0 is {value}, expected 0")]
    ObjectiveNotZero { value: String },

    #[error("x0 = {x0} is not a solution of the constrained problem")]
    NotASolution { x0: usize },

    #[error("degenerate multiplier: lambda_0 = 0, converse inapplicable")]
    DegenerateMultiplier,

    #[error("exactly two functions required, got {0}")]
    TwoFunctionsRequired(usize),

    #[error("unknown function {0:?}")]
    UnknownFunction(String),

    #[error("generator produced no instance: {0}")]
    Generator(String),

    /// A guaranteed mathematical conclusion failed to hold. Indicates a bug.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
