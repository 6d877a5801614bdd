use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("even dimension required, got {0}")]
    OddDimension(usize),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("fields live on different geometries")]
    GeometryMismatch,
    #[error("component count mismatch: expected {expected}, got {got}")]
    ComponentMismatch { expected: usize, got: usize },
    #[error("deformation function must be real-valued")]
    ComplexDeformation,
    #[error("not integrable to a periodic function: average along axis {axis} is {average:e}")]
    NotPeriodicIntegrable { axis: usize, average: f64 },
    #[error("field varies along axis {axis} (deviation {deviation:e}); expected dependence on axis {expected} only")]
    NotSingleAxis { axis: usize, expected: usize, deviation: f64 },
    #[error("operator dimension {dim} exceeds dense limit {limit}")]
    DimensionGuard { dim: usize, limit: usize },
    #[error("operator `{0}` is not flagged self-adjoint")]
    NotSelfAdjoint(String),
    #[error("zero field")]
    ZeroField,
    #[error("t = {t} is below the validity threshold {threshold} for the computed truncation")]
    TBelowThreshold { t: f64, threshold: f64 },
    #[error("no nodal set: deformation is sign-definite on the grid")]
    NoNodalSet,
    #[error("average value mu = {mu:e} is nonzero; the product solutions are not periodic and are not genuine zero modes")]
    NonPeriodicSolution { mu: f64 },
    #[error("cross-section spinor is not in the kernel of the transverse Dirac operator (residual {residual:e})")]
    NotInKernel { residual: f64 },
    #[error("uniform gradient condition holds but the deformation changes sign (witness point {witness})")]
    ImplicationViolated { witness: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
