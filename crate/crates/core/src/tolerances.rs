//! Tolerances and sampling constants used by the checks. The CLI config
//! file can override the report tolerances; the acceptance suite pins them.

/// `|K|` at or below this counts as zero Gaussian curvature.
pub const ZERO_CURVATURE: f64 = 1e-12;
/// Per side of the tensor-product Gauss–Legendre rule on a bump.
pub const QUADRATURE_NODES: usize = 16;
/// Base step of the first-variation difference quotient.
pub const VARIATION_EPS: f64 = 1e-4;
/// Minimum distance of sample points from singular points.
pub const SAFE_MARGIN: f64 = 0.1;
/// Relative bracket width for ruling root-finding.
pub const BISECTION: f64 = 1e-12;
/// Step for the finite-difference fundamental forms.
pub const CURVATURE_FD_STEP: f64 = 1e-4;

/// Stationarity bumps: centers drawn from this window, fixed radius.
pub const BUMP_U: (f64, f64) = (1.4, 2.0);
pub const BUMP_V: (f64, f64) = (0.6, 1.2);
pub const BUMP_RADIUS: f64 = 0.2;

pub const BIHARMONIC: f64 = 1e-9;
pub const GAUSSMAP: f64 = 1e-8;
pub const RULING: f64 = 1e-8;
pub const TANGENCY: f64 = 1e-5;
pub const CURVATURE_REL: f64 = 1e-5;
pub const STATIONARITY_RATIO: f64 = 0.1;
pub const ROUND_TRIP: f64 = 1e-8;
