use thiserror::Error;

/// Errors raised by the geometric kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point is singular (D = {d:e})")]
    Singular { d: f64 },
    #[error("point ({x}, {y}) is outside the evaluable region")]
    OutOfDomain { x: f64, y: f64 },
    #[error("trace start is singular (D = {d:e})")]
    StartSingular { d: f64 },
    #[error("terminal point does not lie on a singular curve")]
    NotOnSingularCurve,
    #[error("limiting tangent could not be estimated (residual {residual:e})")]
    AmbiguousTangent { residual: f64 },
    #[error("point is not singular (|G| = {residual:e})")]
    NotSingular { residual: f64 },
    #[error("winding number did not stabilise under radius refinement")]
    UnstableWinding,
    #[error("U has full rank at ({x}, {y}); no singular curve passes here")]
    RankFull { x: f64, y: f64 },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("ruling is vertical at this point")]
    VerticalRuling,
    #[error("variation support violates the admissibility certificate: {0}")]
    SupportViolation(String),
    #[error("field is not p-minimal on the support (|P| = {residual:e})")]
    NotMinimal { residual: f64 },
    #[error("field has a singular point in the domain near ({x}, {y})")]
    SingularInDomain { x: f64, y: f64 },
    #[error("point is not on the unit sphere (|p| = {norm})")]
    NotOnSphere { norm: f64 },
    #[error("vector pair does not define a Legendrian great circle (defect {defect:e})")]
    InvalidPair { defect: f64 },
    #[error("point is the pole of the Cayley transform")]
    AtPole,
    #[error("Newton iteration did not converge at eps = {eps:e} (residual {residual:e})")]
    NonConvergence { eps: f64, residual: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
