use thiserror::Error;

/// Errors produced by formula construction, verification and integration.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter combination violates one of the `FormulaParams` invariants.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The formula does not annihilate the seminorm kernel closely enough
    /// for the norm identity to apply.
    #[error("formula is not admissible: constraint residual {residual:.3e} exceeds tolerance {tolerance:.3e} (row {row})")]
    Admissibility {
        row: usize,
        residual: f64,
        tolerance: f64,
    },

    /// Quadrature refinement failed to settle.
    #[error("quadrature did not converge after {panels} panels (last relative change {change:.3e})")]
    NonConvergence { panels: usize, change: f64 },

    #[error("dimension error: {0}")]
    Dimension(String),

    /// A pivot vanished at working precision.
    #[error("singular system: pivot {pivot:.3e} at column {column} is below working precision")]
    SingularSystem { column: usize, pivot: f64 },

    #[error("root with modulus {modulus} lies on the unit circle (degenerate step)")]
    RootOnCircle { modulus: f64 },

    /// Root extraction produced an inconsistent root set.
    #[error("root finding failed: {0}")]
    RootFinding(String),

    /// Spectral amplitudes do not reproduce the direct coefficients. The
    /// Euler polynomial convention in the characteristic polynomial is the
    /// first thing to check when this fires.
    #[error("spectral fit failed: reconstruction residual {residual:.3e} exceeds {tolerance:.3e} (check the Euler polynomial convention and the root set)")]
    FitFailure { residual: f64, tolerance: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("exact startup requested but the problem has no exact solution")]
    StartupUnavailable,

    /// Convergence fit impossible because errors sit at roundoff.
    #[error("degenerate fit: method is exact on this problem (max error {max_error:.3e})")]
    DegenerateFit { max_error: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
