use thiserror::Error;

/// Errors raised anywhere in the crate.
///
/// Variant names are stable: the CLI prints them verbatim on stderr.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Shape(String),
    #[error("Hermitian form is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("Hermitian form is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("Im H is not integral on the lattice (residual {residual:e} > {tolerance:e})")]
    IntegralityViolation { residual: f64, tolerance: f64 },
    #[error("lattice basis is not linearly independent over R")]
    DegenerateBasis,
    #[error("radius {radius} needs more than {cap} lattice vectors (packing estimate {required})")]
    RadiusTooLarge { radius: f64, cap: usize, required: usize },
    #[error("at least 100 integration steps are required, got {steps}")]
    StepCountTooSmall { steps: usize },
    #[error("transport modulus does not cancel the automorphy factor (residual {residual:e})")]
    ModulusMismatch { residual: f64 },
    #[error("quadrature did not converge: {coarse} at res {res} vs {fine} at res {fine_res}")]
    QuadratureUnconverged { res: usize, coarse: f64, fine_res: usize, fine: f64 },
    #[error("no theta characteristics reproduce the semicharacter (residual {residual:e})")]
    CharacteristicSolveFailed { residual: f64 },
    #[error("theta series cutoff {given} is below the required {required}")]
    CutoffTooSmall { given: usize, required: usize },
    #[error("Gram matrix is singular")]
    SingularGram,
    #[error("Gram matrix did not converge under refinement (relative change {change:e})")]
    GramUnconverged { change: f64 },
    #[error("holonomy system is inconsistent")]
    InconsistentSystem,
    #[error("holonomy target vectors are linearly dependent")]
    DependentVectors,
    #[error("lattice vector {0:?} is not primitive")]
    NotPrimitive(Vec<i64>),
    #[error("push-forward fit residual {residual:e} exceeds tolerance")]
    FitResidualTooLarge { residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config parse error: {0}")]
    ConfigParseError(String),
}

impl Error {
    /// The variant name, used as the machine-readable diagnostic.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Shape(_) => "Shape",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::IntegralityViolation { .. } => "IntegralityViolation",
            Error::DegenerateBasis => "DegenerateBasis",
            Error::RadiusTooLarge { .. } => "RadiusTooLarge",
            Error::StepCountTooSmall { .. } => "StepCountTooSmall",
            Error::ModulusMismatch { .. } => "ModulusMismatch",
            Error::QuadratureUnconverged { .. } => "QuadratureUnconverged",
            Error::CharacteristicSolveFailed { .. } => "CharacteristicSolveFailed",
            Error::CutoffTooSmall { .. } => "CutoffTooSmall",
            Error::SingularGram => "SingularGram",
            Error::GramUnconverged { .. } => "GramUnconverged",
            Error::InconsistentSystem => "InconsistentSystem",
            Error::DependentVectors => "DependentVectors",
            Error::NotPrimitive(_) => "NotPrimitive",
            Error::FitResidualTooLarge { .. } => "FitResidualTooLarge",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::ConfigParseError(_) => "ConfigParseError",
        }
    }

    /// True for errors caused by bad input data rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Shape(_)
                | Error::NotHermitian { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::IntegralityViolation { .. }
                | Error::DegenerateBasis
                | Error::InvalidArgument(_)
                | Error::ConfigParseError(_)
                | Error::NotPrimitive(_)
                | Error::DependentVectors
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
