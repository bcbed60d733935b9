//! Crate-wide error type.

/// Errors surfaced by the numerics, oracles and data ingestion.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violates its domain (p, r, b, gamma, radius, tolerances).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Series summation would exceed the configured hard cap on terms.
    #[error("series truncation failure: window would exceed {cap} terms (p={p}, t={t:.3e})")]
    TruncationFailure { p: u32, t: f64, cap: usize },

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge to {tol:e} within {max_subdivisions} subdivisions")]
    QuadratureNonConvergence { tol: f64, max_subdivisions: u32 },

    /// A point lies outside the region an inequality is stated on.
    #[error("region precondition of {what} fails: {detail}")]
    RegionPrecondition { what: String, detail: String },

    /// The sampling region is empty under the given parameters.
    #[error("empty region: {0}")]
    EmptyRegion(String),

    /// A finite-difference stencil would leave the domain.
    #[error("stencil out of domain: {0}")]
    StencilOutOfDomain(String),

    /// A least-squares fit was requested on degenerate input.
    #[error("degenerate fit input: {0}")]
    DegenerateFit(String),

    /// Basis file schema violation.
    #[error("basis format error: {0}")]
    BasisFormat(String),

    /// A q-expansion has a nonzero constant term.
    #[error("cusp condition violated: {0}")]
    CuspCondition(String),

    /// A q-expansion is truncated too early for reliable evaluation.
    #[error("insufficient truncation: {0}")]
    InsufficientTruncation(String),

    /// A Gram matrix came out non-Hermitian or non-positive-definite.
    #[error("gram matrix error: {0}")]
    GramMatrix(String),

    /// The kernel function underflowed to zero where a log is needed.
    #[error("vanishing kernel: {0}")]
    VanishingKernel(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
