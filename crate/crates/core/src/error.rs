use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical modules.
///
/// Every variant belongs to exactly one module; [`Error::module`] names it so
/// the command line can report where a failure originated.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("symbol is not contractive: boundary sup-norm {sup_norm} exceeds 1")]
    NotContractive { sup_norm: f64 },

    #[error("{op} does not support {variant} symbols")]
    UnsupportedVariant {
        op: &'static str,
        variant: &'static str,
    },

    #[error("point {point} is outside the allowed domain ({detail})")]
    DomainViolation { point: Complex64, detail: String },

    #[error("quadrature rule too coarse: {0}")]
    RuleTooCoarse(String),

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix has negative spectrum (min eigenvalue {min_eigenvalue:e})")]
    NegativeSpectrum { min_eigenvalue: f64 },

    #[error("vector is outside the numerical range (residual {residual:e} > {threshold:e})")]
    NotInRange { residual: f64, threshold: f64 },

    #[error("dimension mismatch in {module}: {detail}")]
    DimensionMismatch { module: &'static str, detail: String },

    #[error("Gram subsystem is singular (rank {rank} of {size})")]
    SingularGram { rank: usize, size: usize },

    #[error("preimage solve is ill-conditioned (effective rank {rank}, need {needed})")]
    IllConditioned { rank: usize, needed: usize },
}

impl Error {
    /// Name of the module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Parse { .. }
            | Error::NotContractive { .. }
            | Error::UnsupportedVariant { .. }
            | Error::DomainViolation { .. } => "symbols",
            Error::RuleTooCoarse(_) => "moments",
            Error::NotHermitian { .. }
            | Error::NegativeSpectrum { .. }
            | Error::NotInRange { .. } => "operators",
            Error::DimensionMismatch { module, .. } => module,
            Error::SingularGram { .. } | Error::IllConditioned { .. } => "spaces",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
