use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The characteristic bound must satisfy `c > 1`.
    #[error("invalid parameter: c must be finite and > 1, got {0}")]
    Parameter(f64),

    /// A weight product `t = wv` outside `[1, c]`, or a nonpositive weight.
    #[error("point outside the weight domain: {0}")]
    Domain(String),

    #[error("building block index must be in 1..=6, got {0}")]
    Index(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid tree: {0}")]
    Tree(String),

    #[error("internal error: {0}")]
    Internal(String),
}
