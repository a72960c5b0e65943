use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter is outside its allowed range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The parameters describe a regime the model does not cover.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// The bare van der Waals potential diverges at zero separation.
    #[error("potential is singular at r = {0}")]
    Singularity(f64),

    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The request needs a capability the closed form does not provide.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A numerical routine failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The oracle state space would be too large.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A root search found no crossing in its window.
    #[error("not found: {0}")]
    NotFound(String),

    /// Malformed or incomplete configuration.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
