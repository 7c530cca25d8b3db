use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("job {job} assigned to machine {machine} where it cannot run")]
    ForbiddenAssignment { job: usize, machine: usize },
    #[error("assignment has {got} entries for {expected} jobs")]
    AssignmentLength { expected: usize, got: usize },
    #[error("integral release and processing times required: {0}")]
    NonIntegral(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed linear program: {0}")]
    MalformedLp(String),
    #[error("missing value for variable {0}")]
    MissingValue(String),
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("sign sequence has an uncolored entry at index {0}")]
    Uncolored(usize),
    #[error("brute force limit exceeded: n = {n} > {limit}")]
    LimitExceeded { n: usize, limit: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
