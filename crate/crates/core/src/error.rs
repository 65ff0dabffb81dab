use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HvError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector is not on the sphere of radius sqrt(2) (norm {norm})")]
    OffSphere { norm: f64 },
    #[error("states are not on the same ray (|<<phi,psi>>| = {modulus})")]
    NotSameRay { modulus: f64 },
    #[error("operator is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("eigen solver did not converge")]
    EigSolverFailure,
    #[error("operator is not an orthogonal projector (defect {defect:e})")]
    NotProjector { defect: f64 },
    #[error("projectors do not form a resolution of the identity: {reason}")]
    NotAResolution { reason: String },
    #[error("path endpoints are not orthogonal (|<<phi,psi>>| = {modulus:e})")]
    NotOrthogonal { modulus: f64 },
    #[error("adaptive quadrature exceeded its refinement budget")]
    QuadratureFailure,
    #[error("integration step {step} too large: energy drift {drift:e}")]
    StepTooLarge { step: f64, drift: f64 },
    #[error("step must be positive")]
    NonPositiveStep,
    #[error("map is neither complex linear nor conjugate linear")]
    NotComplexOrConjugateLinear,
    #[error("map is not an isometry (defect {defect:e})")]
    NotIsometry { defect: f64 },
    #[error("phase speed is not constant on orbits (spread {spread:e})")]
    PhaseNotOrbitConstant { spread: f64 },
    #[error("propositions use different gauge sections")]
    GaugeMismatch,
    #[error("family contains non-commuting projectors")]
    IncompatibleFamily,
    #[error("frame function demo needs complex dimension >= 3, got {0}")]
    NeedsDimensionThree(usize),
    #[error("no two supplied bases share a common ray")]
    NoSharedVector,
    #[error("basis {index} is not orthonormal (defect {defect:e})")]
    NotOrthonormal { index: usize, defect: f64 },
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("invalid literal: {0}")]
    InvalidLiteral(String),
}

pub type Result<T, E = HvError> = std::result::Result<T, E>;
