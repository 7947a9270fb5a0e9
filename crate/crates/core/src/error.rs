use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("non-convergence: {0}")]
    NonConvergence(String),
    #[error("sampling exhausted after {draws} draws ({context})")]
    Exhausted { draws: usize, context: String },
    #[error("invalid modulus: Im tau = {0} must be positive")]
    InvalidModulus(f64),
    #[error("pole hit at {0}")]
    PoleHit(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("cycle path crossing a cut: {0}")]
    PathCrossesCut(String),
    #[error("blow-up at node {node:?}: {reason}")]
    BlowUp { node: Vec<usize>, reason: String },
    #[error("endpoint condition violated: {0}")]
    EndpointCondition(String),
    #[error("rank unstable: {0}")]
    RankUnstable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
