//! Parametrized surfaces with derivative jets, the reconstruction of a
//! surface from its isotropic graph `z = F(x, y)`, and the inverse map taking
//! a surface back to isotropic space.

use serde::{Deserialize, Serialize};

use crate::biharmonic::{FamilyTag, ScalarField};
use crate::error::{Error, Result};
use crate::geom::{OrientedPlane, Vec3};
use crate::isotropic::{inverse_stereo, plane_to_ipoint, IsoPoint};
use crate::jet::Jet;
use crate::scalar::{lit, to64, Real};
use crate::surfaces::{block_eval, Block, RuledPatch};

/// `|r_u × r_v|` at or below this is treated as a singular point of the map.
pub const IMMERSION_EPS: f64 = 1e-10;
/// Highest jet order available for surface points (fields need one more).
pub const MAX_SURFACE_ORDER: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceKind<T> {
    /// Reconstruction of the graph of a field.
    Field(ScalarField<T>),
    /// A closed-form building block, rotated by `theta`.
    Block { block: Block, theta: T, branch: i64 },
    /// Pointwise sum in Gauss coordinates.
    Convolution(Vec<(T, ParamSurface<T>)>),
    /// `R(φ, λ)` in its own parameters (not Gauss coordinates).
    Ruled(RuledPatch<T>),
}

/// Where a surface came from; serializable summary of [`SurfaceKind`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Reconstructed(FamilyTag),
    Block { name: String, theta: f64 },
    Convolution(Vec<(f64, Provenance)>),
    Ruled { a: f64, b: f64, c: f64, d: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamSurface<T> {
    pub kind: SurfaceKind<T>,
    /// Exclusion radius around singular parameter points.
    pub guard: T,
}

/// First-order frame at a point.
#[derive(Clone, Copy, Debug)]
pub struct Frame<T> {
    pub r: Vec3<T>,
    pub ru: Vec3<T>,
    pub rv: Vec3<T>,
}

fn vec_of<T: Real>(j: &[Jet<T>; 3], i: usize, k: usize) -> Vec3<T> {
    Vec3::new(j[0].partial(i, k), j[1].partial(i, k), j[2].partial(i, k))
}

impl<T: Real> ParamSurface<T> {
    pub fn new(kind: SurfaceKind<T>) -> Self {
        let guard = match &kind {
            SurfaceKind::Field(f) => f.guard,
            _ => lit(crate::biharmonic::DEFAULT_GUARD),
        };
        ParamSurface { kind, guard }
    }

    pub fn provenance(&self) -> Provenance {
        match &self.kind {
            SurfaceKind::Field(f) => Provenance::Reconstructed(f.tag()),
            SurfaceKind::Block { block, theta, .. } => {
                Provenance::Block { name: block.name().to_string(), theta: to64(*theta) }
            }
            SurfaceKind::Convolution(terms) => Provenance::Convolution(
                terms.iter().map(|(a, s)| (to64(*a), s.provenance())).collect(),
            ),
            SurfaceKind::Ruled(p) => Provenance::Ruled {
                a: to64(p.a),
                b: to64(p.b),
                c: to64(p.c),
                d: to64(p.d),
            },
        }
    }

    /// Whether `(u, v)` are Gauss coordinates (the normal is `inverse_stereo(u, v)`).
    pub fn gauss_coordinates(&self) -> bool {
        !matches!(self.kind, SurfaceKind::Ruled(_))
    }

    /// False for surfaces that are curves (the cycloid block).
    pub fn immersed(&self) -> bool {
        match &self.kind {
            SurfaceKind::Block { block, .. } => *block != Block::R2,
            SurfaceKind::Convolution(terms) => {
                terms.iter().any(|(a, s)| *a != T::zero() && s.immersed())
            }
            _ => true,
        }
    }

    /// Whether some term uses the polar angle (meshes skip the branch cut).
    pub fn has_angle(&self) -> bool {
        match &self.kind {
            SurfaceKind::Field(f) => f.has_angle(),
            SurfaceKind::Block { block, .. } => block.has_angle(),
            SurfaceKind::Convolution(terms) => {
                terms.iter().any(|(a, s)| *a != T::zero() && s.has_angle())
            }
            SurfaceKind::Ruled(_) => false,
        }
    }

    pub fn with_branch(mut self, k: i64) -> Self {
        self.kind = match self.kind {
            SurfaceKind::Field(f) => SurfaceKind::Field(f.with_branch(k)),
            SurfaceKind::Block { block, theta, .. } => SurfaceKind::Block { block, theta, branch: k },
            SurfaceKind::Convolution(terms) => SurfaceKind::Convolution(
                terms.into_iter().map(|(a, s)| (a, s.with_branch(k))).collect(),
            ),
            other => other,
        };
        self
    }

    pub fn with_guard(mut self, eps: T) -> Self {
        self.guard = eps;
        self.kind = match self.kind {
            SurfaceKind::Field(f) => SurfaceKind::Field(f.with_guard(eps)),
            SurfaceKind::Convolution(terms) => SurfaceKind::Convolution(
                terms.into_iter().map(|(a, s)| (a, s.with_guard(eps))).collect(),
            ),
            other => other,
        };
        self
    }

    /// Singular parameter points, each excluded by a disk of radius `guard`.
    pub fn singular_points(&self) -> Vec<(T, T)> {
        match &self.kind {
            SurfaceKind::Field(f) => f.singular_points(),
            SurfaceKind::Block { block, .. } => {
                if block.singular_at_origin() {
                    vec![(T::zero(), T::zero())]
                } else {
                    Vec::new()
                }
            }
            SurfaceKind::Convolution(terms) => {
                let mut pts: Vec<(T, T)> = Vec::new();
                for (a, s) in terms {
                    if *a == T::zero() {
                        continue;
                    }
                    for p in s.singular_points() {
                        if !pts.contains(&p) {
                            pts.push(p);
                        }
                    }
                }
                pts
            }
            SurfaceKind::Ruled(_) => Vec::new(),
        }
    }

    pub fn check_guard(&self, u: T, v: T) -> Result<()> {
        for (a, b) in self.singular_points() {
            if ((u - a) * (u - a) + (v - b) * (v - b)).sqrt() < self.guard {
                return Err(Error::SingularPoint { x: to64(u), y: to64(v) });
            }
        }
        Ok(())
    }

    /// Jets of the three coordinates of `r` at `(u, v)`, to `order ≤ 3`.
    pub fn jets(&self, u: T, v: T, order: usize) -> Result<[Jet<T>; 3]> {
        let order = order.min(MAX_SURFACE_ORDER);
        self.check_guard(u, v)?;
        match &self.kind {
            SurfaceKind::Field(f) => {
                let fj = f.eval_jet_order(u, v, order + 1)?;
                Ok(reconstruct_jets(&fj, u, v, order))
            }
            SurfaceKind::Block { block, theta, branch } => {
                let x = Jet::var_x(u, order);
                let y = Jet::var_y(v, order);
                Ok(rotated_block(*block, *theta, *branch, &x, &y))
            }
            SurfaceKind::Convolution(terms) => {
                let zero = Jet::constant(T::zero(), order);
                let mut acc = [zero; 3];
                for (a, s) in terms {
                    if *a == T::zero() {
                        continue;
                    }
                    let j = s.jets(u, v, order)?;
                    for i in 0..3 {
                        acc[i] += j[i].scale(*a);
                    }
                }
                Ok(acc)
            }
            SurfaceKind::Ruled(p) => Ok(p.eval_on(&Jet::var_x(u, order), &Jet::var_y(v, order))),
        }
    }

    pub fn point(&self, u: T, v: T) -> Result<Vec3<T>> {
        let j = self.jets(u, v, 0)?;
        Ok(Vec3::new(j[0].value(), j[1].value(), j[2].value()))
    }

    pub fn frame(&self, u: T, v: T) -> Result<Frame<T>> {
        let j = self.jets(u, v, 1)?;
        Ok(Frame { r: vec_of(&j, 0, 0), ru: vec_of(&j, 1, 0), rv: vec_of(&j, 0, 1) })
    }

    /// Unit normal; in Gauss coordinates oriented so that `n · inverse_stereo(u, v) > 0`.
    pub fn normal(&self, u: T, v: T) -> Result<Vec3<T>> {
        let f = self.frame(u, v)?;
        self.orient(u, v, f.ru.cross(&f.rv))
    }

    pub(crate) fn orient(&self, u: T, v: T, c: Vec3<T>) -> Result<Vec3<T>> {
        let len = c.norm();
        if !(len > lit::<T>(IMMERSION_EPS)) || !self.immersed() {
            return Err(Error::NonImmersed { u: to64(u), v: to64(v) });
        }
        let n = c * (T::one() / len);
        if self.gauss_coordinates() && n.dot(&inverse_stereo(u, v)) < T::zero() {
            Ok(-n)
        } else {
            Ok(n)
        }
    }
}

/// `r(x, y)` from the jets of `F` (which must have order `order + 1`).
pub fn reconstruct_jets<T: Real>(f: &Jet<T>, x0: T, y0: T, order: usize) -> [Jet<T>; 3] {
    let fx = f.dx().truncate(order);
    let fy = f.dy().truncate(order);
    let f = f.truncate(order);
    let x = Jet::var_x(x0, order);
    let y = Jet::var_y(y0, order);
    let two = lit::<T>(2.0);
    let xx = x * x;
    let yy = y * y;
    let xy2 = x * y * two;
    let inv = (xx + yy + T::one()).recip();
    [
        ((xx - yy - T::one()) * fx + xy2 * fy - (x * f).scale(two)) * inv,
        ((yy - xx - T::one()) * fy + xy2 * fx - (y * f).scale(two)) * inv,
        ((x * fx + y * fy - f).scale(two)) * inv,
    ]
}

fn rotated_block<T: Real>(b: Block, theta: T, branch: i64, x: &Jet<T>, y: &Jet<T>) -> [Jet<T>; 3] {
    if theta == T::zero() {
        return block_eval(b, x, y, branch);
    }
    let (s, c) = theta.sin_cos();
    let xr = x.scale(c) + y.scale(s);
    let yr = y.scale(c) - x.scale(s);
    let [p, q, z] = block_eval(b, &xr, &yr, branch);
    [p.scale(c) - q.scale(s), p.scale(s) + q.scale(c), z]
}

/// The surface whose isotropic image is the graph of `f`.
pub fn reconstruct_surface<T: Real>(f: &ScalarField<T>) -> ParamSurface<T> {
    ParamSurface::new(SurfaceKind::Field(f.clone()))
}

/// Image in isotropic space of the oriented tangent plane at `(u, v)`.
pub fn isotropic_image<T: Real>(s: &ParamSurface<T>, u: T, v: T) -> Result<IsoPoint<T>> {
    let f = s.frame(u, v)?;
    let n = s.orient(u, v, f.ru.cross(&f.rv))?;
    if n.z + T::one() <= lit(1e-12) {
        return Err(Error::IdealImage);
    }
    Ok(plane_to_ipoint(&OrientedPlane { n, h: -n.dot(&f.r) }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biharmonic::{make_elliptic_field, make_polynomial, EllipticCoeffs};

    fn unit_sphere() -> ScalarField<f64> {
        make_polynomial::<f64>(vec![(0.5, 2, 0), (0.5, 0, 2), (0.5, 0, 0)])
    }

    #[test]
    fn sphere_examples() {
        let s = reconstruct_surface(&unit_sphere());
        let p = s.point(0.0, 0.0).unwrap();
        assert!((p - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-15);
        for &(x, y) in &[(0.3, -1.2), (2.0, 0.5), (-4.0, 3.0)] {
            assert!((s.point(x, y).unwrap().norm() - 1.0).abs() < 1e-14);
        }
        match isotropic_image(&s, 0.0, 0.0).unwrap() {
            IsoPoint::Finite { x, y, z } => {
                assert!(x.abs() < 1e-15 && y.abs() < 1e-15 && (z - 0.5).abs() < 1e-15)
            }
            IsoPoint::Ideal(_) => panic!(),
        }
    }

    #[test]
    fn point_and_zero() {
        let s = reconstruct_surface(&make_polynomial::<f64>(vec![(1.0, 1, 0)]));
        for &(x, y) in &[(0.3, -1.2), (2.0, 0.5)] {
            assert!((s.point(x, y).unwrap() - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-15);
        }
        let z = reconstruct_surface(&make_polynomial::<f64>(vec![]));
        assert_eq!(z.point(0.4, 0.1).unwrap(), Vec3::zero());
    }

    #[test]
    fn round_trip_elliptic() {
        let f = make_elliptic_field(EllipticCoeffs::new(
            [1.0, 0.3, -1.0, 0.2],
            [0.5, -0.2, 0.1],
            [0.7, 0.1, -0.4],
            [0.2, 0.3],
        ));
        let s = reconstruct_surface(&f);
        for &(x, y) in &[(0.3f64, -1.2f64), (2.0, 0.5), (-1.5, 0.7)] {
            let q = isotropic_image(&s, x, y).unwrap();
            let (a, b, c) = q.as_finite().unwrap();
            assert!((a - x).abs() < 1e-10 && (b - y).abs() < 1e-10);
            assert!((c - f.value(x, y).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn jets_match_finite_differences() {
        let f = make_elliptic_field(EllipticCoeffs::<f64>::new([1.0, 0.0, -1.0, 0.0], [0.0; 3], [0.2, 0.0, 0.0], [0.0; 2]));
        let s = reconstruct_surface(&f);
        let (u, v, h) = (0.8, 0.6, 1e-5);
        let j = s.jets(u, v, 2).unwrap();
        let p = |a: f64, b: f64| s.point(a, b).unwrap();
        let ru = (p(u + h, v) - p(u - h, v)) * (0.5 / h);
        let ruv = (p(u + h, v + h) - p(u + h, v - h) - p(u - h, v + h) + p(u - h, v - h)) * (0.25 / (h * h));
        assert!((vec_of(&j, 1, 0) - ru).norm() < 1e-8);
        assert!((vec_of(&j, 1, 1) - ruv).norm() < 1e-4);
    }

    proptest::proptest! {
        #[test]
        fn isotropic_image_is_graph(
            a in proptest::array::uniform4(-1.0..1.0f64),
            c in proptest::array::uniform3(-1.0..1.0f64),
            x in -2.0..2.0f64,
            y in -2.0..2.0f64,
        ) {
            proptest::prop_assume!(x.hypot(y) > 0.1);
            let f = make_elliptic_field(EllipticCoeffs::new(a, [0.3, -0.2, 0.5], c, [0.1, -0.4]));
            let s = reconstruct_surface(&f);
            if let Ok(q) = isotropic_image(&s, x, y) {
                let (qx, qy, qz) = q.as_finite().unwrap();
                let z = f.value(x, y).unwrap();
                proptest::prop_assert!((qx - x).abs() + (qy - y).abs() + (qz - z).abs() < 1e-9 * (1.0 + z.abs()));
            }
        }

        #[test]
        fn gauss_normal_is_inverse_stereo(x in -2.0..2.0f64, y in -2.0..2.0f64) {
            let s = reconstruct_surface(&unit_sphere());
            let n = s.normal(x, y).unwrap();
            proptest::prop_assert!((n - inverse_stereo(x, y)).norm() < 1e-12);
        }
    }
}
