use thiserror::Error;

/// Errors raised by the geometric kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("normal vector is (numerically) zero")]
    ZeroNormal,
    #[error("point ({x}, {y}) lies inside the singular guard")]
    SingularPoint { x: f64, y: f64 },
    #[error("least-squares fit degenerate, residual {residual:e}")]
    DegenerateFit { residual: f64 },
    #[error("no valid samples on the circle")]
    EmptyIntersection,
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("terms share no common domain")]
    DomainMismatch,
    #[error("degenerate family: a1 = a3 = 0")]
    DegenerateFamily,
    #[error("surface is not immersed at ({u}, {v})")]
    NonImmersed { u: f64, v: f64 },
    #[error("tangent plane maps to the ideal line")]
    IdealImage,
    #[error("need at least 3 entries, got {0}")]
    TooFew(usize),
    #[error("restriction to circle is not linear, residual {residual:e}")]
    NotLinearOnCircle { residual: f64 },
    #[error("circle coefficient vectors are linearly dependent")]
    DependentCircles,
    #[error("circles have no common point")]
    NoCommonPoint,
    #[error("three or more circles lie in one pencil")]
    PencilDegeneracy,
    #[error("model does not fit, residual {residual:e}")]
    BadFit { residual: f64 },
    #[error("cone is degenerate")]
    DegenerateCone,
    #[error("Gaussian curvature vanishes")]
    ZeroGaussCurvature,
    #[error("line family does not match the surface")]
    ProvenanceMismatch,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
