//! Scalar fields `F(x, y)` with exact jets to order 4: the classified
//! biharmonic families, bilaplacian evaluation, restriction fits and the
//! Kelvin-type pushforward under inversion.

mod grammar;

pub use grammar::{parse_field, parse_number};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isotropic::IMSphere;
use crate::jet::{Jet, MAX_ORDER};
use crate::linalg::lstsq;
use crate::pencils::Cycle;
use crate::scalar::{lit, to64, Real};

/// Default exclusion radius around singular loci.
pub const DEFAULT_GUARD: f64 = 1e-6;
/// Number of samples used by the restriction fits.
pub const RESTRICTION_SAMPLES: usize = 50;

/// Family tag of a field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyTag {
    Elliptic,
    Hyperbolic,
    Parabolic,
    Exceptional,
    RemarkCounterexample,
    Polynomial,
    CustomSum,
    Inverted,
}

/// Coefficients of the 12-parameter elliptic form
/// `(a1 ρ² + a2 x + a3 + a4 y) θ + (b1 y² + b2 xy + b3 x²)/ρ²
///  + c1 y² + c2 xy + c3 x² + d1 x + d2 y`, with `θ` the polar angle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EllipticCoeffs<T> {
    pub a: [T; 4],
    pub b: [T; 3],
    pub c: [T; 3],
    pub d: [T; 2],
}

/// Coefficients of `a(r) cos φ + b(r) sin φ + c(r)` with
/// `a(r) = α1 r + α2 r ln r + α3/r + α4 r³` (same for `b` with `β`) and
/// `c(r) = γ1 + γ2 r² + γ3 ln r + γ4 r² ln r`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicCoeffs<T> {
    pub alpha: [T; 4],
    pub beta: [T; 4],
    pub gamma: [T; 4],
}

impl<T: Real> HyperbolicCoeffs<T> {
    /// The reduced form `(a1 ρ² + a2 x + a3) ln ρ² + (b1 y + b2 x)/ρ²
    /// + (c1 y + c2 x) ρ²` expressed in the radial basis.
    #[allow(clippy::too_many_arguments)]
    pub fn reduced(a1: T, a2: T, a3: T, b1: T, b2: T, c1: T, c2: T) -> Self {
        let two = lit::<T>(2.0);
        let z = T::zero();
        HyperbolicCoeffs {
            alpha: [z, two * a2, b2, c2],
            beta: [z, z, b1, c1],
            gamma: [z, z, two * a3, two * a1],
        }
    }
}

/// Coefficients of `a(x) y² + b(x) y + c(x)` with cubic `a`, `b` and
/// `c(x) = γ0 + γ1 x + γ2 x² + γ3 x³ − α2 x⁴/3 − α3 x⁵/5`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCoeffs<T> {
    pub alpha: [T; 4],
    pub beta: [T; 4],
    pub gamma: [T; 4],
}

/// `A((x−a)² + (y−b)²) + (B(x−c)² + C(x−c)(y−d) + D(y−d)²)/((x−c)² + (y−d)²)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalCoeffs<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub big_a: T,
    pub big_b: T,
    pub big_c: T,
    pub big_d: T,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldKind<T> {
    Elliptic(EllipticCoeffs<T>),
    Hyperbolic(HyperbolicCoeffs<T>),
    Parabolic(ParabolicCoeffs<T>),
    Exceptional(ExceptionalCoeffs<T>),
    Remark,
    /// Monomials `coef · x^i y^j`.
    Poly(Vec<(T, u32, u32)>),
    Sum(Vec<(T, ScalarField<T>)>),
    /// `ρ² F(x/ρ², y/ρ²)`.
    Inverted(Box<ScalarField<T>>),
}

/// A (possibly multi-valued) field with exact jets.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    pub kind: FieldKind<T>,
    /// Branch of the polar angle: `θ = atan2(y, x) + k π`.
    pub branch: i64,
    /// Exclusion radius around singular points.
    pub guard: T,
}

pub fn make_elliptic_field<T: Real>(c: EllipticCoeffs<T>) -> ScalarField<T> {
    ScalarField::new(FieldKind::Elliptic(c))
}

pub fn make_hyperbolic_field<T: Real>(c: HyperbolicCoeffs<T>) -> ScalarField<T> {
    ScalarField::new(FieldKind::Hyperbolic(c))
}

pub fn make_parabolic_field<T: Real>(c: ParabolicCoeffs<T>) -> ScalarField<T> {
    ScalarField::new(FieldKind::Parabolic(c))
}

pub fn make_exceptional_field<T: Real>(c: ExceptionalCoeffs<T>) -> ScalarField<T> {
    ScalarField::new(FieldKind::Exceptional(c))
}

/// `sqrt((x² + y²)² − x² + 1)`: linear on every circle
/// `x² + y² − t x − sqrt(t² − 1) = 0`, yet not biharmonic.
pub fn make_remark_counterexample<T: Real>() -> ScalarField<T> {
    ScalarField::new(FieldKind::Remark)
}

pub fn make_polynomial<T: Real>(terms: Vec<(T, u32, u32)>) -> ScalarField<T> {
    ScalarField::new(FieldKind::Poly(terms))
}

pub fn make_sum<T: Real>(terms: Vec<(T, ScalarField<T>)>) -> ScalarField<T> {
    ScalarField::new(FieldKind::Sum(terms))
}

/// `G(x, y) = (x² + y²) F(x/(x² + y²), y/(x² + y²))`.
pub fn pushforward_inversion<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    ScalarField {
        kind: FieldKind::Inverted(Box::new(f.clone())),
        branch: 0,
        guard: f.guard,
    }
}

/// Polar angle `atan2(y, x) + k π`.
fn angle<T: Real>(x: &Jet<T>, y: &Jet<T>, k: i64) -> Jet<T> {
    Jet::atan2(y, x) + T::PI() * lit::<T>(k as f64)
}

impl<T: Real> ScalarField<T> {
    pub fn new(kind: FieldKind<T>) -> Self {
        ScalarField { kind, branch: 0, guard: lit(DEFAULT_GUARD) }
    }

    pub fn with_branch(mut self, k: i64) -> Self {
        self.set_branch(k);
        self
    }

    fn set_branch(&mut self, k: i64) {
        self.branch = k;
        match &mut self.kind {
            FieldKind::Sum(terms) => terms.iter_mut().for_each(|(_, f)| f.set_branch(k)),
            FieldKind::Inverted(f) => f.set_branch(k),
            _ => {}
        }
    }

    pub fn with_guard(mut self, eps: T) -> Self {
        self.set_guard(eps);
        self
    }

    fn set_guard(&mut self, eps: T) {
        self.guard = eps;
        match &mut self.kind {
            FieldKind::Sum(terms) => terms.iter_mut().for_each(|(_, f)| f.set_guard(eps)),
            FieldKind::Inverted(f) => f.set_guard(eps),
            _ => {}
        }
    }

    pub fn tag(&self) -> FamilyTag {
        match self.kind {
            FieldKind::Elliptic(_) => FamilyTag::Elliptic,
            FieldKind::Hyperbolic(_) => FamilyTag::Hyperbolic,
            FieldKind::Parabolic(_) => FamilyTag::Parabolic,
            FieldKind::Exceptional(_) => FamilyTag::Exceptional,
            FieldKind::Remark => FamilyTag::RemarkCounterexample,
            FieldKind::Poly(_) => FamilyTag::Polynomial,
            FieldKind::Sum(_) => FamilyTag::CustomSum,
            FieldKind::Inverted(_) => FamilyTag::Inverted,
        }
    }

    /// Whether the field uses the multi-valued polar angle.
    pub fn has_angle(&self) -> bool {
        match &self.kind {
            FieldKind::Elliptic(c) => c.a.iter().any(|v| *v != T::zero()),
            FieldKind::Sum(terms) => terms.iter().any(|(w, f)| *w != T::zero() && f.has_angle()),
            FieldKind::Inverted(f) => f.has_angle(),
            _ => false,
        }
    }

    /// Singular points of the field (each guarded by a disk of radius `guard`).
    pub fn singular_points(&self) -> Vec<(T, T)> {
        let origin = (T::zero(), T::zero());
        match &self.kind {
            FieldKind::Elliptic(_) | FieldKind::Hyperbolic(_) => vec![origin],
            FieldKind::Exceptional(c) => vec![(c.c, c.d)],
            FieldKind::Parabolic(_) | FieldKind::Remark | FieldKind::Poly(_) => Vec::new(),
            FieldKind::Sum(terms) => {
                let mut pts: Vec<(T, T)> = Vec::new();
                for (_, f) in terms {
                    for p in f.singular_points() {
                        if !pts.contains(&p) {
                            pts.push(p);
                        }
                    }
                }
                pts
            }
            FieldKind::Inverted(f) => {
                let mut pts = vec![origin];
                for (x, y) in f.singular_points() {
                    let q = x * x + y * y;
                    if q > T::zero() {
                        pts.push((x / q, y / q));
                    }
                }
                pts
            }
        }
    }

    /// Distance from `(x, y)` to the nearest singular point.
    pub fn singular_distance(&self, x: T, y: T) -> T {
        self.singular_points()
            .into_iter()
            .map(|(a, b)| ((x - a) * (x - a) + (y - b) * (y - b)).sqrt())
            .fold(T::infinity(), T::min)
    }

    pub fn check_guard(&self, x: T, y: T) -> Result<()> {
        if self.singular_distance(x, y) < self.guard {
            Err(Error::SingularPoint { x: to64(x), y: to64(y) })
        } else {
            Ok(())
        }
    }

    /// Jet of order 4 at `(x, y)`.
    pub fn eval_jet(&self, x: T, y: T) -> Result<Jet<T>> {
        self.eval_jet_order(x, y, MAX_ORDER)
    }

    pub fn eval_jet_order(&self, x: T, y: T, order: usize) -> Result<Jet<T>> {
        self.check_guard(x, y)?;
        Ok(self.eval_on(&Jet::var_x(x, order), &Jet::var_y(y, order)))
    }

    pub fn value(&self, x: T, y: T) -> Result<T> {
        Ok(self.eval_jet_order(x, y, 0)?.value())
    }

    /// Evaluates the field on jet arguments (composition).
    ///
    /// No guard check is made here; callers check the base point.
    pub fn eval_on(&self, x: &Jet<T>, y: &Jet<T>) -> Jet<T> {
        let order = x.order().min(y.order());
        let zero = Jet::constant(T::zero(), order);
        let (x, y) = (*x, *y);
        match &self.kind {
            FieldKind::Elliptic(c) => {
                let r2 = x * x + y * y;
                let mut f = zero;
                if c.a.iter().any(|v| *v != T::zero()) {
                    let lin = r2 * c.a[0] + x * c.a[1] + y * c.a[3] + c.a[2];
                    f += lin * angle(&x, &y, self.branch);
                }
                if c.b.iter().any(|v| *v != T::zero()) {
                    let q = y * y * c.b[0] + x * y * c.b[1] + x * x * c.b[2];
                    f += q / r2;
                }
                f + y * y * c.c[0] + x * y * c.c[1] + x * x * c.c[2] + x * c.d[0] + y * c.d[1]
            }
            FieldKind::Hyperbolic(c) => {
                let r2 = x * x + y * y;
                let ln_r = r2.ln() * lit::<T>(0.5);
                let inv = r2.recip();
                let radial = |k: &[T; 4]| {
                    ln_r * k[1] + inv * k[2] + r2 * k[3] + k[0]
                };
                x * radial(&c.alpha)
                    + y * radial(&c.beta)
                    + r2 * c.gamma[1]
                    + ln_r * c.gamma[2]
                    + r2 * ln_r * c.gamma[3]
                    + c.gamma[0]
            }
            FieldKind::Parabolic(c) => {
                let cubic = |k: &[T; 4]| ((x * k[3] + k[2]) * x + k[1]) * x + k[0];
                let x4 = x.powi(4);
                let cx = cubic(&c.gamma) - x4 * (c.alpha[2] / lit(3.0))
                    - x4 * x * (c.alpha[3] / lit(5.0));
                y * y * cubic(&c.alpha) + y * cubic(&c.beta) + cx
            }
            FieldKind::Exceptional(c) => {
                let (dxa, dyb) = (x - c.a, y - c.b);
                let (dxc, dyd) = (x - c.c, y - c.d);
                let para = (dxa * dxa + dyb * dyb) * c.big_a;
                let num = dxc * dxc * c.big_b + dxc * dyd * c.big_c + dyd * dyd * c.big_d;
                para + num / (dxc * dxc + dyd * dyd)
            }
            FieldKind::Remark => {
                let r2 = x * x + y * y;
                (r2 * r2 - x * x + T::one()).sqrt()
            }
            FieldKind::Poly(terms) => {
                let mut f = zero;
                for &(k, i, j) in terms {
                    f += x.powi(i) * y.powi(j) * k;
                }
                f
            }
            FieldKind::Sum(terms) => {
                let mut f = zero;
                for (w, g) in terms {
                    f += g.eval_on(&x, &y) * *w;
                }
                f
            }
            FieldKind::Inverted(g) => {
                let r2 = x * x + y * y;
                let inv = r2.recip();
                r2 * g.eval_on(&(x * inv), &(y * inv))
            }
        }
    }

    /// `F_xxxx + 2 F_xxyy + F_yyyy` from the exact jet.
    pub fn bilaplacian(&self, x: T, y: T) -> Result<T> {
        let j = self.eval_jet(x, y)?;
        Ok(j.partial(4, 0) + lit::<T>(2.0) * j.partial(2, 2) + j.partial(0, 4))
    }

    /// 13-point finite-difference bilaplacian with step `h`.
    pub fn fd_bilaplacian(&self, x: T, y: T, h: T) -> Result<T> {
        let two = lit::<T>(2.0);
        let reach = two * h * T::SQRT_2();
        if self.singular_distance(x, y) < reach + self.guard {
            return Err(Error::SingularPoint { x: to64(x), y: to64(y) });
        }
        let f = |i: i32, j: i32| -> T {
            let px = x + h * lit(i as f64);
            let py = y + h * lit(j as f64);
            self.eval_on(&Jet::constant(px, 0), &Jet::constant(py, 0)).value()
        };
        let centre = f(0, 0) * lit(20.0);
        let edges = f(1, 0) + f(-1, 0) + f(0, 1) + f(0, -1);
        let corners = f(1, 1) + f(1, -1) + f(-1, 1) + f(-1, -1);
        let far = f(2, 0) + f(-2, 0) + f(0, 2) + f(0, -2);
        let h2 = h * h;
        Ok((centre - edges * lit(8.0) + corners * two + far) / (h2 * h2))
    }

    /// RMS residual of fitting the field on a circle by `1, x, y`
    /// (degree 1) or additionally by the second harmonics of the circle
    /// angle (degree 2).
    pub fn restrict_to_circle(&self, s: &Cycle<T>, degree: usize) -> Result<T> {
        let (cx, cy, r) = s.center_radius().ok_or(Error::EmptyIntersection)?;
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for k in 0..RESTRICTION_SAMPLES {
            let t = lit::<T>(k as f64 * std::f64::consts::TAU / RESTRICTION_SAMPLES as f64);
            let (ct, st) = (t.cos(), t.sin());
            let (x, y) = (cx + r * ct, cy + r * st);
            let Ok(v) = self.value(x, y) else { continue };
            let mut row = vec![T::one(), x, y];
            if degree >= 2 {
                row.push(ct * ct - st * st);
                row.push(lit::<T>(2.0) * ct * st);
            }
            rows.push(row);
            rhs.push(v);
        }
        fit_rms(&rows, &rhs)
    }

    /// RMS residual of fitting the field on the segment `p0 → p1` by a
    /// polynomial of the given degree in the arclength.
    pub fn restrict_to_segment(&self, p0: (T, T), p1: (T, T), degree: usize) -> Result<T> {
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let len = ((p1.0 - p0.0) * (p1.0 - p0.0) + (p1.1 - p0.1) * (p1.1 - p0.1)).sqrt();
        for k in 0..RESTRICTION_SAMPLES {
            let s = lit::<T>(k as f64 / (RESTRICTION_SAMPLES - 1) as f64);
            let (x, y) = (p0.0 + (p1.0 - p0.0) * s, p0.1 + (p1.1 - p0.1) * s);
            let Ok(v) = self.value(x, y) else { continue };
            let arc = s * len;
            rows.push((0..=degree).map(|e| arc.powi(e as i32)).collect());
            rhs.push(v);
        }
        fit_rms(&rows, &rhs)
    }
}

fn fit_rms<T: Real>(rows: &[Vec<T>], rhs: &[T]) -> Result<T> {
    let width = rows.first().map_or(0, |r| r.len());
    if rows.len() <= width {
        return Err(Error::EmptyIntersection);
    }
    Ok(lstsq(rows, rhs, 1e-13).rms)
}

fn rotate_form<T: Real>(p: T, q: T, s: T, cs: T, sn: T) -> (T, T, T) {
    // p x² + q xy + s y² with (x, y) = R(ψ)(x', y')
    let two = lit::<T>(2.0);
    (
        p * cs * cs + q * cs * sn + s * sn * sn,
        -two * p * cs * sn + q * (cs * cs - sn * sn) + two * s * cs * sn,
        p * sn * sn - q * cs * sn + s * cs * cs,
    )
}

impl<T: Real> EllipticCoeffs<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(a: [T; 4], b: [T; 3], c: [T; 3], d: [T; 2]) -> Self {
        EllipticCoeffs { a, b, c, d }
    }

    /// Normalization towards the 7-parameter reduced form.
    ///
    /// Returns `(ψ, reduced, sphere)` such that for `(x, y) = R(ψ)(x', y')`
    /// (away from the angle cut) `F(x, y) = reduced(x', y') + sphere(x', y')`,
    /// with `a4 = b3 = c3 = d1 = d2 = 0` in `reduced`. The angle `ψ` is
    /// `atan2(a4, a2)`; when `a2 = a4 = 0` it is `0`, which is not canonical.
    pub fn reduce(&self) -> (T, EllipticCoeffs<T>, IMSphere<T>) {
        let psi = if self.a[1] == T::zero() && self.a[3] == T::zero() {
            T::zero()
        } else {
            self.a[3].atan2(self.a[1])
        };
        let (sn, cs) = psi.sin_cos();
        let a2 = self.a[1] * cs + self.a[3] * sn;
        // b and c are stored as (y², xy, x²)
        let (b3, b2, b1) = rotate_form(self.b[2], self.b[1], self.b[0], cs, sn);
        let (c3, c2, c1) = rotate_form(self.c[2], self.c[1], self.c[0], cs, sn);
        let d1 = self.d[0] * cs + self.d[1] * sn;
        let d2 = -self.d[0] * sn + self.d[1] * cs;
        // θ = θ' + ψ contributes ψ (a1 ρ² + a2 x' + a3)
        let (c1, c3) = (c1 + self.a[0] * psi, c3 + self.a[0] * psi);
        let d1 = d1 + a2 * psi;
        let (b1, b3) = (b1 + self.a[2] * psi, b3 + self.a[2] * psi);
        let sphere = IMSphere::new(lit::<T>(2.0) * c3, d1, d2, b3);
        let z = T::zero();
        let reduced = EllipticCoeffs {
            a: [self.a[0], a2, self.a[2], z],
            b: [b1 - b3, b2, z],
            c: [c1 - c3, c2, z],
            d: [z, z],
        };
        (psi, reduced, sphere)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ell(a: [f64; 4], b: [f64; 3], c: [f64; 3], d: [f64; 2]) -> ScalarField<f64> {
        make_elliptic_field(EllipticCoeffs::new(a, b, c, d))
    }

    #[test]
    fn x2y_jet() {
        let f = make_polynomial::<f64>(vec![(1.0, 2, 1)]);
        let j = f.eval_jet(1.0, 2.0).unwrap();
        assert_eq!(j.value(), 2.0);
        assert_eq!(j.partial(1, 0), 4.0);
        assert_eq!(j.partial(0, 1), 1.0);
        assert_eq!(j.partial(4, 0), 0.0);
    }

    #[test]
    fn helicoid_field_value() {
        let f = ell([1.0, 0.0, -1.0, 0.0], [0.0; 3], [0.0; 3], [0.0; 2]);
        let v = f.value(1.0, 1.0).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let g = f.clone().with_branch(1);
        let w = g.value(1.0, 1.0).unwrap();
        assert!((w - 5.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-14);
    }

    #[test]
    fn guard_rejects_origin() {
        let f = ell([1.0, 0.0, -1.0, 0.0], [0.0; 3], [0.0; 3], [0.0; 2]);
        assert!(matches!(f.eval_jet(0.5e-6, 0.0), Err(Error::SingularPoint { .. })));
        let p: ScalarField<f64> = make_polynomial::<f64>(vec![(1.0, 1, 0)]);
        assert!(p.eval_jet(0.0, 0.0).is_ok());
    }

    #[test]
    fn bilaplacian_examples() {
        let f = make_polynomial::<f64>(vec![(1.0, 2, 1)]);
        assert_eq!(f.bilaplacian(0.3, -0.7).unwrap(), 0.0);
        let f = make_polynomial::<f64>(vec![(1.0, 4, 0)]);
        assert!((f.bilaplacian(0.3, -0.7).unwrap() - 24.0).abs() < 1e-12);
    }

    #[test]
    fn fd_examples() {
        let f = make_polynomial::<f64>(vec![(1.0, 4, 0)]);
        assert!((f.fd_bilaplacian(0.4, 0.2, 1e-2).unwrap() - 24.0).abs() < 1e-6);
        let f = make_polynomial::<f64>(vec![(1.0, 2, 1)]);
        // rounding of the stencil is about 25 ulp(F)/h⁴; keep |F| small
        let v = f.fd_bilaplacian(0.1, 0.2, 1e-2).unwrap();
        assert!(v.abs() < 1e-8, "{v}");
        let e = ell([0.3, -0.2, 0.5, 0.1], [0.4, -0.3, 0.2], [0.1, 0.2, 0.3], [0.5, -0.5]);
        assert!(e.bilaplacian(2.0, 1.0).unwrap().abs() < 1e-12);
        assert!(e.fd_bilaplacian(2.0, 1.0, 1e-2).unwrap().abs() < 1e-4);
        // at h = 1e-3 rounding dominates: about 25 ulp(F) / h⁴
        let bound = 25.0 * f64::EPSILON * e.value(2.0, 1.0).unwrap().abs() / 1e-12;
        assert!(e.fd_bilaplacian(2.0, 1.0, 1e-3).unwrap().abs() < 4.0 * bound);
    }

    #[test]
    fn elliptic_line_restriction_is_quadratic() {
        let e = ell([0.3, -0.2, 0.5, 0.1], [0.4, -0.3, 0.2], [0.1, 0.2, 0.3], [0.5, -0.5]);
        let r = e.restrict_to_segment((0.1, 0.2), (1.5, 3.0), 2).unwrap();
        assert!(r < 1e-9, "{r}");
        let r1 = e.restrict_to_segment((0.1, 0.2), (1.5, 3.0), 1).unwrap();
        assert!(r1 > 1e-6);
    }

    #[test]
    fn hyperbolic_table_row_and_circle() {
        let c = HyperbolicCoeffs { alpha: [0.0; 4], beta: [0.0; 4], gamma: [-1.0, -1.0, -1.0, 1.0] };
        let f = make_hyperbolic_field(c);
        let (x, y) = (0.7_f64, -1.3_f64);
        let q = x * x + y * y;
        let expect = (q - 1.0) * (q.ln() - 2.0) / 2.0 - 2.0;
        assert!((f.value(x, y).unwrap() - expect).abs() < 1e-14);
        let circle = Cycle::new(1.0, 0.0, 0.0, -4.0);
        assert!(f.restrict_to_circle(&circle, 1).unwrap() < 1e-9);
        let zero = make_hyperbolic_field(HyperbolicCoeffs::<f64>::default());
        assert_eq!(zero.value(1.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn hyperbolic_reduced_matches_formula() {
        let c = HyperbolicCoeffs::reduced(0.5, -0.25, 1.5, 0.7, -0.3, 0.2, 0.9);
        let f = make_hyperbolic_field(c);
        let (x, y) = (0.8_f64, 0.6_f64 * 1.7);
        let q = x * x + y * y;
        let expect = (0.5 * q - 0.25 * x + 1.5) * q.ln() + (0.7 * y - 0.3 * x) / q + (0.2 * y + 0.9 * x) * q;
        assert!((f.value(x, y).unwrap() - expect).abs() < 1e-13);
    }

    #[test]
    fn parabolic_examples() {
        let mut c = ParabolicCoeffs::default();
        c.alpha[3] = 1.0;
        let f = make_parabolic_field(c);
        let (x, y) = (1.2_f64, -0.4_f64);
        assert!((f.value(x, y).unwrap() - (x.powi(3) * y * y - x.powi(5) / 5.0)).abs() < 1e-13);
        assert!(f.bilaplacian(x, y).unwrap().abs() < 1e-12);
        let r = f.restrict_to_segment((3.0, -2.0), (3.0, 2.0), 2).unwrap();
        assert!(r < 1e-9);
    }

    #[test]
    fn exceptional_examples() {
        let e = ExceptionalCoeffs::<f64> { big_a: 1.0, big_b: 1.0, ..Default::default() };
        let f = make_exceptional_field(e);
        // circle x² + y² − 2x = 0 passes through the singular point
        let circle = Cycle::new(1.0, -2.0, 0.0, 0.0);
        assert!(f.restrict_to_circle(&circle, 1).unwrap() < 1e-9);
        let g = make_exceptional_field(ExceptionalCoeffs::<f64> { a: 1.0, b: 2.0, big_a: 3.0, ..Default::default() });
        assert!((g.value(1.0, 2.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn remark_examples() {
        let f: ScalarField<f64> = make_remark_counterexample();
        assert_eq!(f.value(0.0, 0.0).unwrap(), 1.0);
        assert!(f.bilaplacian(1.0, 1.0).unwrap().abs() > 1e-3);
        let t = 2.0_f64;
        let circle = Cycle::new(1.0, -t, 0.0, -(t * t - 1.0).sqrt());
        assert!(f.restrict_to_circle(&circle, 1).unwrap() < 1e-9);
    }

    #[test]
    fn restriction_examples() {
        let f = make_polynomial::<f64>(vec![(1.0, 4, 0)]);
        let unit = Cycle::new(1.0, 0.0, 0.0, -1.0);
        assert!(f.restrict_to_circle(&unit, 1).unwrap() > 1e-2);
        let five = make_polynomial::<f64>(vec![(5.0, 0, 0)]);
        let r = five.restrict_to_circle(&unit, 1).unwrap();
        assert!(r < 1e-14, "{r}");
    }

    #[test]
    fn kelvin_examples() {
        let one = pushforward_inversion(&make_polynomial::<f64>(vec![(1.0, 0, 0)]));
        assert!((one.value(0.3, 0.4).unwrap() - 0.25).abs() < 1e-15);
        let x = pushforward_inversion(&make_polynomial::<f64>(vec![(1.0, 1, 0)]));
        assert!((x.value(0.3, 0.4).unwrap() - 0.3).abs() < 1e-15);
        let e = ell([0.3, -0.2, 0.5, 0.1], [0.4, -0.3, 0.2], [0.1, 0.2, 0.3], [0.5, -0.5]);
        let g = pushforward_inversion(&e);
        assert!(g.bilaplacian(0.9, -0.4).unwrap().abs() < 1e-9);
        let back = pushforward_inversion(&g);
        assert!((back.value(0.9, -0.4).unwrap() - e.value(0.9, -0.4).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn elliptic_reduction_recombines() {
        let c = EllipticCoeffs::<f64>::new([0.3, -0.2, 0.5, 0.4], [0.4, -0.3, 0.2], [0.1, 0.2, 0.3], [0.5, -0.5]);
        let f = make_elliptic_field(c);
        let (psi, red, sphere) = c.reduce();
        assert_eq!(red.a[3], 0.0);
        let g = make_elliptic_field(red);
        for &(xp, yp) in &[(0.8, 0.3), (1.5, -0.2), (0.9, 0.2)] {
            let (s, cs) = f64::sin_cos(psi);
            let (x, y) = (cs * xp - s * yp, s * xp + cs * yp);
            let lhs = f.value(x, y).unwrap();
            let rhs = g.value(xp, yp).unwrap() + sphere.eval(xp, yp);
            assert!((lhs - rhs).abs() < 1e-12, "{lhs} {rhs}");
        }
    }

    proptest::proptest! {
        #[test]
        fn hyperbolic_fields_are_biharmonic(
            alpha in proptest::array::uniform4(-1.0..1.0f64),
            beta in proptest::array::uniform4(-1.0..1.0f64),
            gamma in proptest::array::uniform4(-1.0..1.0f64),
            x in -2.0..2.0f64,
            y in -2.0..2.0f64,
        ) {
            proptest::prop_assume!(x.hypot(y) > 0.3);
            let f = make_hyperbolic_field(HyperbolicCoeffs { alpha, beta, gamma });
            proptest::prop_assert!(f.bilaplacian(x, y).unwrap().abs() < 1e-9);
        }

        #[test]
        fn inversion_is_an_involution(
            c in proptest::array::uniform3(-1.0..1.0f64),
            d in proptest::array::uniform2(-1.0..1.0f64),
            x in -2.0..2.0f64,
            y in -2.0..2.0f64,
        ) {
            proptest::prop_assume!(x.hypot(y) > 0.2);
            let f = make_elliptic_field(EllipticCoeffs::new([0.0; 4], [0.0; 3], c, d));
            let g = pushforward_inversion(&pushforward_inversion(&f));
            let (u, v) = (f.value(x, y).unwrap(), g.value(x, y).unwrap());
            proptest::prop_assert!((u - v).abs() < 1e-12 * (1.0 + u.abs()));
        }
    }
}
