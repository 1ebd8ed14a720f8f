use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CascadeError {
    #[error("{name} = {value} is outside the open interval (0.5, 1)")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("(i + 1) / a is within 1e-12 of an integer at i = {i} (a = {a}); the constant may be rational")]
    NearIntegerAmbiguity { i: u64, a: f64 },

    #[error("walk already absorbed in a cascade")]
    SteppedAfterCascade,

    #[error("walk is not in play")]
    NotInPlay,

    #[error("series tolerance {tol} needs more than {max_terms} terms")]
    ToleranceUnreachable { tol: f64, max_terms: u64 },

    #[error("fraction {r}/{q} does not match cascade constant {a}")]
    ConstantMismatch { r: u64, q: u64, a: f64 },

    #[error("{r}/{q} is not a reduced fraction")]
    NotCoprime { r: u64, q: u64 },

    #[error("cascade constant {a} has no rational representation within tolerance")]
    NotRational { a: f64 },

    #[error("no p2 in [{p1}, 1) gives cascade constant {target}")]
    NoSolution { p1: f64, target: f64 },

    #[error("path not absorbed after {cap} steps")]
    StepCapExceeded { cap: u64 },

    #[error("budget {budget} is not below 1 - p2 = {limit}")]
    RegimeViolation { budget: f64, limit: f64 },

    #[error("budget {budget} is below the quality spread {spread}; equalizing needs c2 < 0")]
    InfeasibleEqualize { budget: f64, spread: f64 },

    #[error("sweep leaves the monotonicity domain at c = {c}: {detail}")]
    DomainViolation { c: f64, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = CascadeError> = std::result::Result<T, E>;
