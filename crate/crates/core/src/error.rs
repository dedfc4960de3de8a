use thiserror::Error;

/// Failure categories surfaced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid run description: bad coefficients, missing surface entries, bad flags.
    #[error("configuration error: {0}")]
    Config(String),

    /// Geometry that cannot form a valid domain or mesh.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Non-physical material data (conductivity must be positive).
    #[error("material error: {0}")]
    Material(String),

    /// Element shape outside what the requested formulation supports.
    #[error("unsupported element: {0}")]
    UnsupportedElement(String),

    /// Linear system could not be solved to the required residual.
    #[error("solver error: {0}")]
    Solver(String),

    /// Reference quadrature failed to converge to its tolerance.
    #[error("oracle non-convergence: {0}")]
    OracleNonConvergence(String),

    /// Evaluation outside the domain of an analytic solution.
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
