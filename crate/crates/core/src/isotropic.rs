//! The isotropic model: oriented planes as points of isotropic space, images
//! of spheres and lines, and the generating isotropic Möbius maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{lambda_transform, Line3, OrientedPlane, OrientedSphere, Vec3};
use crate::linalg::lstsq;
use crate::scalar::{lit, to64, Real};

/// Below this squared top-view radius the inversion sends a point to ℓ∞.
pub const INVERSION_EPS: f64 = 1e-14;
/// Residual bound for the line-to-circle fit.
pub const LINE_FIT_TOL: f64 = 1e-8;

/// A point of isotropic space or of the ideal line ℓ∞.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum IsoPoint<T> {
    Finite { x: T, y: T, z: T },
    Ideal(T),
}

impl<T: Real> IsoPoint<T> {
    pub fn finite(x: T, y: T, z: T) -> Self {
        IsoPoint::Finite { x, y, z }
    }

    pub fn as_finite(&self) -> Option<(T, T, T)> {
        match *self {
            IsoPoint::Finite { x, y, z } => Some((x, y, z)),
            IsoPoint::Ideal(_) => None,
        }
    }

    /// Euclidean distance for finite points, label distance on ℓ∞,
    /// infinity for mixed pairs.
    pub fn distance(&self, other: &Self) -> T {
        match (*self, *other) {
            (IsoPoint::Finite { x, y, z }, IsoPoint::Finite { x: a, y: b, z: c }) => {
                Vec3::new(x - a, y - b, z - c).norm()
            }
            (IsoPoint::Ideal(h), IsoPoint::Ideal(k)) => (h - k).abs(),
            _ => T::infinity(),
        }
    }
}

/// The i-M-sphere `z = (a/2)(x²+y²) + b x + c y + d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IMSphere<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> IMSphere<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        IMSphere { a, b, c, d }
    }

    pub fn eval(&self, x: T, y: T) -> T {
        self.a * lit(0.5) * (x * x + y * y) + self.b * x + self.c * y + self.d
    }

    /// Signed vertical offset of `q` from the graph; for ideal points, the
    /// offset of the label from the i-mean curvature.
    pub fn residual(&self, q: &IsoPoint<T>) -> T {
        match *q {
            IsoPoint::Finite { x, y, z } => z - self.eval(x, y),
            IsoPoint::Ideal(h) => h - self.a,
        }
    }
}

/// Generators of the isotropic Möbius group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum IMGenerator<T> {
    /// Rotation about the z-axis by `theta` (counterclockwise).
    Rotation(T),
    /// `z ↦ z + a x + b y`.
    Shear { a: T, b: T },
    /// `z ↦ z + x² + y² − 1`.
    Paraboloid,
    /// `z ↦ z + h`.
    Offset(T),
    /// `z ↦ a z`.
    ScaleZ(T),
    /// `(x, y, z) ↦ (x, y, z)/(x² + y²)`.
    Inversion,
    /// `(x, y, z) ↦ (x, y, z)/√2`.
    Shrink,
    /// `x ↦ x + 1`.
    TranslateX,
}

/// A composition word of generators, applied left to right.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IMTransform<T> {
    pub word: Vec<IMGenerator<T>>,
}

impl<T: Real> IMTransform<T> {
    pub fn identity() -> Self {
        IMTransform { word: Vec::new() }
    }

    pub fn single(g: IMGenerator<T>) -> Self {
        IMTransform { word: vec![g] }
    }

    pub fn then(mut self, g: IMGenerator<T>) -> Self {
        self.word.push(g);
        self
    }
}

/// Π: plane `(n, h)` ↦ `(n1, n2, h)/(n3 + 1)`, or `ideal(h)` for `n = (0,0,−1)`.
pub fn plane_to_ipoint<T: Real>(p: &OrientedPlane<T>) -> IsoPoint<T> {
    let den = p.n.z + T::one();
    if den == T::zero() {
        return IsoPoint::Ideal(p.h);
    }
    IsoPoint::finite(p.n.x / den, p.n.y / den, p.h / den)
}

/// Inverse stereographic projection from the south pole.
pub fn inverse_stereo<T: Real>(x: T, y: T) -> Vec3<T> {
    let q = x * x + y * y;
    let den = T::one() + q;
    Vec3::new(lit::<T>(2.0) * x / den, lit::<T>(2.0) * y / den, (T::one() - q) / den)
}

/// Stereographic projection from the south pole, `n ↦ (n1, n2)/(1 + n3)`.
pub fn stereo<T: Real>(n: &Vec3<T>) -> (T, T) {
    let den = T::one() + n.z;
    (n.x / den, n.y / den)
}

/// Inverse of Π.
pub fn ipoint_to_plane<T: Real>(q: &IsoPoint<T>) -> OrientedPlane<T> {
    match *q {
        IsoPoint::Finite { x, y, z } => {
            let n = inverse_stereo(x, y);
            OrientedPlane { n, h: lit::<T>(2.0) * z / (T::one() + x * x + y * y) }
        }
        IsoPoint::Ideal(h) => OrientedPlane { n: Vec3::new(T::zero(), T::zero(), -T::one()), h },
    }
}

/// Isotropic image of an oriented sphere.
pub fn sphere_to_imsphere<T: Real>(s: &OrientedSphere<T>) -> IMSphere<T> {
    IMSphere {
        a: s.r + s.m.z,
        b: -s.m.x,
        c: -s.m.y,
        d: (s.r - s.m.z) * lit(0.5),
    }
}

/// Image of a line: two i-M-spheres of the form
/// `z = m3 (x² + y² − 1) − m1 x − m2 y` meeting along the image circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IMCircle<T> {
    pub first: IMSphere<T>,
    pub second: IMSphere<T>,
    /// Coefficients `(m1, m2, m3)` and `(n1, n2, n3)` of the two equations.
    pub m: [T; 3],
    pub n: [T; 3],
    /// Largest absolute fit residual over the sampled planes.
    pub residual: T,
}

fn line_form<T: Real>(m: [T; 3]) -> IMSphere<T> {
    IMSphere::new(lit::<T>(2.0) * m[2], -m[0], -m[1], -m[2])
}

fn orthonormal_pair<T: Real>(d: &Vec3<T>) -> (Vec3<T>, Vec3<T>) {
    let pick = if d.x.abs() <= d.y.abs() && d.x.abs() <= d.z.abs() {
        Vec3::new(T::one(), T::zero(), T::zero())
    } else if d.y.abs() <= d.z.abs() {
        Vec3::new(T::zero(), T::one(), T::zero())
    } else {
        Vec3::new(T::zero(), T::zero(), T::one())
    };
    let e1 = d.cross(&pick);
    let e1 = e1 * (T::one() / e1.norm());
    let e2 = d.cross(&e1);
    (e1, e2)
}

/// Oriented planes containing `line`, at `count` equally spaced angles.
pub fn planes_through_line<T: Real>(line: &Line3<T>, count: usize) -> Vec<OrientedPlane<T>> {
    let (e1, e2) = orthonormal_pair(&line.d);
    (0..count)
        .map(|k| {
            let t = lit::<T>((k as f64 + 0.5) * std::f64::consts::TAU / count as f64);
            let n = e1 * t.cos() + e2 * t.sin();
            OrientedPlane { n, h: -n.dot(&line.p) }
        })
        .collect()
}

/// Fits the i-M-circle image of a line from 16 sampled planes through it.
pub fn line_to_imcircle<T: Real>(line: &Line3<T>) -> Result<IMCircle<T>> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for p in planes_through_line(line, 16) {
        if let IsoPoint::Finite { x, y, z } = plane_to_ipoint(&p) {
            if (p.n.z + T::one()).abs() < lit(1e-9) {
                continue;
            }
            rows.push(vec![-x, -y, x * x + y * y - T::one()]);
            rhs.push(z);
        }
    }
    let fit = lstsq(&rows, &rhs, 1e-10);
    let m = [fit.coeffs[0], fit.coeffs[1], fit.coeffs[2]];
    let dir = fit
        .null_space
        .first()
        .cloned()
        .ok_or(Error::DegenerateFit { residual: to64(fit.max_abs) })?;
    let n = [m[0] + dir[0], m[1] + dir[1], m[2] + dir[2]];
    let mut residual = fit.max_abs;
    for (row, z) in rows.iter().zip(&rhs) {
        let r = row[0] * n[0] + row[1] * n[1] + row[2] * n[2] - *z;
        residual = residual.max(r.abs());
    }
    if to64(residual) > LINE_FIT_TOL {
        return Err(Error::DegenerateFit { residual: to64(residual) });
    }
    Ok(IMCircle { first: line_form(m), second: line_form(n), m, n, residual })
}

fn apply_one<T: Real>(g: &IMGenerator<T>, q: IsoPoint<T>) -> IsoPoint<T> {
    let two = lit::<T>(2.0);
    match (*g, q) {
        (IMGenerator::Rotation(t), IsoPoint::Finite { x, y, z }) => {
            let (s, c) = t.sin_cos();
            IsoPoint::finite(c * x - s * y, s * x + c * y, z)
        }
        (IMGenerator::Shear { a, b }, IsoPoint::Finite { x, y, z }) => {
            IsoPoint::finite(x, y, z + a * x + b * y)
        }
        (IMGenerator::Paraboloid, IsoPoint::Finite { x, y, z }) => {
            IsoPoint::finite(x, y, z + x * x + y * y - T::one())
        }
        (IMGenerator::Paraboloid, IsoPoint::Ideal(h)) => IsoPoint::Ideal(h + two),
        (IMGenerator::Offset(h), IsoPoint::Finite { x, y, z }) => IsoPoint::finite(x, y, z + h),
        (IMGenerator::ScaleZ(a), IsoPoint::Finite { x, y, z }) => IsoPoint::finite(x, y, a * z),
        (IMGenerator::ScaleZ(a), IsoPoint::Ideal(h)) => IsoPoint::Ideal(a * h),
        (IMGenerator::Inversion, IsoPoint::Finite { x, y, z }) => {
            let q2 = x * x + y * y;
            if q2 <= lit(INVERSION_EPS) {
                IsoPoint::Ideal(two * z)
            } else {
                IsoPoint::finite(x / q2, y / q2, z / q2)
            }
        }
        (IMGenerator::Inversion, IsoPoint::Ideal(h)) => {
            IsoPoint::finite(T::zero(), T::zero(), h * lit(0.5))
        }
        (IMGenerator::Shrink, IsoPoint::Finite { x, y, z }) => {
            let s = T::SQRT_2().recip();
            IsoPoint::finite(x * s, y * s, z * s)
        }
        (IMGenerator::Shrink, IsoPoint::Ideal(h)) => IsoPoint::Ideal(h * T::SQRT_2()),
        (IMGenerator::TranslateX, IsoPoint::Finite { x, y, z }) => {
            IsoPoint::finite(x + T::one(), y, z)
        }
        // rotations, shears, offsets and x-translations fix ℓ∞ pointwise
        (_, ideal @ IsoPoint::Ideal(_)) => ideal,
    }
}

/// Applies the generator word to a point, left to right.
pub fn imtransform_apply<T: Real>(t: &IMTransform<T>, q: &IsoPoint<T>) -> IsoPoint<T> {
    t.word.iter().fold(*q, |acc, g| apply_one(g, acc))
}

fn map_one<T: Real>(g: &IMGenerator<T>, s: IMSphere<T>) -> IMSphere<T> {
    let IMSphere { a, b, c, d } = s;
    let two = lit::<T>(2.0);
    match *g {
        IMGenerator::Rotation(t) => {
            let (sn, cs) = t.sin_cos();
            IMSphere::new(a, b * cs - c * sn, b * sn + c * cs, d)
        }
        IMGenerator::Shear { a: p, b: q } => IMSphere::new(a, b + p, c + q, d),
        IMGenerator::Paraboloid => IMSphere::new(a + two, b, c, d - T::one()),
        IMGenerator::Offset(h) => IMSphere::new(a, b, c, d + h),
        IMGenerator::ScaleZ(k) => IMSphere::new(a * k, b * k, c * k, d * k),
        IMGenerator::Inversion => IMSphere::new(two * d, b, c, a * lit(0.5)),
        IMGenerator::Shrink => IMSphere::new(a * T::SQRT_2(), b, c, d / T::SQRT_2()),
        IMGenerator::TranslateX => IMSphere::new(a, b - a, c, a * lit(0.5) - b + d),
    }
}

/// Image of an i-M-sphere under the word, in closed form per generator.
pub fn imsphere_map<T: Real>(t: &IMTransform<T>, s: &IMSphere<T>) -> IMSphere<T> {
    t.word.iter().fold(*s, |acc, g| map_one(g, acc))
}

/// Pushes `count` graph points of `s` (plus its ideal point) through the word
/// and returns the largest deviation from the closed-form image sphere.
pub fn imsphere_map_residual<T: Real>(t: &IMTransform<T>, s: &IMSphere<T>, count: usize) -> T {
    let image = imsphere_map(t, s);
    let mut worst = image.residual(&imtransform_apply(t, &IsoPoint::Ideal(s.a))).abs();
    for k in 0..count {
        let ang = lit::<T>(k as f64 * 2.399_963_229_728_653);
        let rad = lit::<T>(0.4 + 1.7 * ((k as f64 * 0.618_033_988_749_895) % 1.0));
        let (x, y) = (rad * ang.cos(), rad * ang.sin());
        let q = IsoPoint::finite(x, y, s.eval(x, y));
        let r = image.residual(&imtransform_apply(t, &q)).abs();
        worst = worst.max(r);
    }
    worst
}

/// One row of the comparison between the paper's generator list and the
/// maps induced on isotropic space by the paired Laguerre transformations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorPairing {
    pub generator: String,
    pub laguerre_map: String,
    /// Map induced by the Laguerre transformation under Π, in this convention.
    pub induced_map: String,
    pub samples: usize,
    /// Largest distance between the induced map and the listed generator.
    pub max_deviation: f64,
    pub matches: bool,
}

type PlaneMap = Box<dyn Fn(&OrientedPlane<f64>) -> Option<OrientedPlane<f64>>>;

/// Compares each listed generator with the map that its paired Laguerre
/// transformation induces through Π, on random planes.
pub fn generator_pairing_report(seed: u64, samples: usize) -> Vec<GeneratorPairing> {
    let theta = 0.7;
    let (ta, tb) = (0.3, -0.5);
    let delta = 0.4;
    let k = 1.7;
    let rows: Vec<(&str, &str, &str, IMGenerator<f64>, PlaneMap)> = vec![
        (
            "rotation R(theta) about the z-axis",
            "rotation R(theta)",
            "(x,y,z) -> R(theta)(x,y,z)",
            IMGenerator::Rotation(theta),
            Box::new(move |p| Some(OrientedPlane { n: p.n.rotate_z(theta), h: p.h })),
        ),
        (
            "(x,y,z) -> (x,y,z+ax+by)",
            "translation by (a,b,0)",
            "(x,y,z) -> (x,y,z-ax-by)",
            IMGenerator::Shear { a: ta, b: tb },
            Box::new(move |p| Some(OrientedPlane { n: p.n, h: p.h - p.n.x * ta - p.n.y * tb })),
        ),
        (
            "(x,y,z) -> (x,y,z+x^2+y^2-1)",
            "translation by (0,0,1)",
            "(x,y,z) -> (x,y,z+(x^2+y^2-1)/2)",
            IMGenerator::Paraboloid,
            Box::new(|p| Some(OrientedPlane { n: p.n, h: p.h - p.n.z })),
        ),
        (
            "(x,y,z) -> (x,y,z+h)",
            "h-offset",
            "(x,y,z) -> (x,y,z-h(1+x^2+y^2)/2)",
            IMGenerator::Offset(delta),
            Box::new(move |p| Some(OrientedPlane { n: p.n, h: p.h - delta })),
        ),
        (
            "(x,y,z) -> (x,y,az)",
            "homothety with coefficient a",
            "(x,y,z) -> (x,y,az)",
            IMGenerator::ScaleZ(k),
            Box::new(move |p| Some(OrientedPlane { n: p.n, h: p.h * k })),
        ),
        (
            "(x,y,z) -> (x,y,z)/(x^2+y^2)",
            "reflection in the plane z=0",
            "(x,y,z) -> (x,y,z)/(x^2+y^2)",
            IMGenerator::Inversion,
            Box::new(|p| Some(OrientedPlane { n: Vec3::new(p.n.x, p.n.y, -p.n.z), h: p.h })),
        ),
        (
            "(x,y,z) -> (x,y,z)/sqrt(2)",
            "transformation Lambda",
            "(x,y,z) -> (x,y,z)(1+n3)/((3n3+1)/2+sqrt(5n3^2+6n3+5)/2), n3=(1-x^2-y^2)/(1+x^2+y^2)",
            IMGenerator::Shrink,
            Box::new(|p| lambda_transform(p).ok()),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planes: Vec<OrientedPlane<f64>> = (0..samples)
        .map(|_| {
            let x: f64 = rng.gen_range(-2.0..2.0);
            let y: f64 = rng.gen_range(-2.0..2.0);
            let h: f64 = rng.gen_range(-2.0..2.0);
            OrientedPlane { n: inverse_stereo(x, y), h }
        })
        .collect();
    rows.into_iter()
        .map(|(generator, laguerre_map, induced, g, lmap)| {
            let word = IMTransform::single(g);
            let mut worst: f64 = 0.0;
            let mut used = 0;
            for p in &planes {
                let Some(img) = lmap(p) else { continue };
                let lhs = plane_to_ipoint(&img);
                let rhs = imtransform_apply(&word, &plane_to_ipoint(p));
                let d = lhs.distance(&rhs);
                if d.is_finite() {
                    worst = worst.max(d);
                    used += 1;
                }
            }
            GeneratorPairing {
                generator: generator.to_string(),
                laguerre_map: laguerre_map.to_string(),
                induced_map: induced.to_string(),
                samples: used,
                max_deviation: worst,
                matches: worst < 1e-9,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane(n: (f64, f64, f64), h: f64) -> OrientedPlane<f64> {
        OrientedPlane { n: Vec3::new(n.0, n.1, n.2), h }
    }

    #[test]
    fn pi_examples() {
        assert_eq!(plane_to_ipoint(&plane((0.0, 0.0, 1.0), 5.0)), IsoPoint::finite(0.0, 0.0, 2.5));
        assert_eq!(plane_to_ipoint(&plane((1.0, 0.0, 0.0), 0.0)), IsoPoint::finite(1.0, 0.0, 0.0));
        assert_eq!(plane_to_ipoint(&plane((0.0, 0.0, -1.0), 7.0)), IsoPoint::Ideal(7.0));
    }

    #[test]
    fn inverse_pi_examples() {
        let p = ipoint_to_plane(&IsoPoint::finite(0.0, 0.0, 2.5));
        assert_eq!(p, plane((0.0, 0.0, 1.0), 5.0));
        let p = ipoint_to_plane(&IsoPoint::finite(1.0, 0.0, 0.0));
        assert_eq!(p, plane((1.0, 0.0, 0.0), 0.0));
        let p = ipoint_to_plane(&IsoPoint::Ideal(7.0));
        assert_eq!(p, plane((0.0, 0.0, -1.0), 7.0));
    }

    #[test]
    fn imsphere_examples() {
        let s = sphere_to_imsphere(&OrientedSphere { m: Vec3::zero(), r: 1.0 });
        assert_eq!(s, IMSphere::new(1.0, 0.0, 0.0, 0.5));
        let s = sphere_to_imsphere(&OrientedSphere { m: Vec3::new(0.0, 0.0, 1.0), r: 1.0 });
        assert_eq!(s, IMSphere::new(2.0, 0.0, 0.0, 0.0));
        let s = sphere_to_imsphere(&OrientedSphere { m: Vec3::new(-1.0, 0.0, 0.0), r: 0.0 });
        assert_eq!(s, IMSphere::new(0.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn line_examples() {
        let z_axis = Line3::<f64>::new(Vec3::zero(), Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let c = line_to_imcircle(&z_axis).unwrap();
        assert!(c.residual < 1e-8);
        assert!(c.m.iter().all(|v| v.abs() < 1e-12));
        assert!(c.n[0].abs() < 1e-12 && c.n[1].abs() < 1e-12 && (c.n[2].abs() - 1.0).abs() < 1e-12);

        for p in [Vec3::<f64>::zero(), Vec3::new(0.0, 0.0, 5.0)] {
            let l = Line3::<f64>::new(p, Vec3::new(1.0, 0.0, 0.0)).unwrap();
            let c = line_to_imcircle(&l).unwrap();
            assert!(c.residual < 1e-8);
            assert_ne!(c.first, c.second);
        }
    }

    #[test]
    fn apply_examples() {
        let inv = IMTransform::single(IMGenerator::Inversion);
        assert_eq!(
            imtransform_apply(&inv, &IsoPoint::finite(1.0, 1.0, 4.0)),
            IsoPoint::finite(0.5, 0.5, 2.0)
        );
        let par = IMTransform::single(IMGenerator::Paraboloid);
        assert_eq!(
            imtransform_apply(&par, &IsoPoint::finite(0.0, 0.0, 0.0)),
            IsoPoint::finite(0.0, 0.0, -1.0)
        );
        let rot = IMTransform::single(IMGenerator::Rotation(std::f64::consts::FRAC_PI_2));
        let q = imtransform_apply(&rot, &IsoPoint::finite(1.0, 0.0, 3.0));
        assert!(q.distance(&IsoPoint::finite(0.0, 1.0, 3.0)) < 1e-15);
        assert_eq!(imtransform_apply(&inv, &IsoPoint::finite(0.0, 0.0, 3.0)), IsoPoint::Ideal(6.0));
        assert_eq!(imtransform_apply(&inv, &IsoPoint::Ideal(6.0)), IsoPoint::finite(0.0, 0.0, 3.0));
    }

    #[test]
    fn map_examples() {
        let t = IMTransform::single(IMGenerator::ScaleZ(2.0));
        assert_eq!(imsphere_map(&t, &IMSphere::new(1.0, 0.0, 0.0, 0.0)), IMSphere::new(2.0, 0.0, 0.0, 0.0));
        let t = IMTransform::single(IMGenerator::Inversion);
        assert_eq!(imsphere_map(&t, &IMSphere::new(0.0, 0.0, 0.0, 1.0)), IMSphere::new(2.0, 0.0, 0.0, 0.0));
        let th = 0.3_f64;
        let t = IMTransform::single(IMGenerator::Rotation(th));
        let s = imsphere_map(&t, &IMSphere::new(1.0, 2.0, 3.0, 4.0));
        assert!((s.b - (2.0 * th.cos() - 3.0 * th.sin())).abs() < 1e-15);
        assert!((s.c - (2.0 * th.sin() + 3.0 * th.cos())).abs() < 1e-15);
    }

    #[test]
    fn closed_form_images_match_point_pushing() {
        let gens = [
            IMGenerator::Rotation(0.9),
            IMGenerator::Shear { a: 0.5, b: -1.5 },
            IMGenerator::Paraboloid,
            IMGenerator::Offset(2.5),
            IMGenerator::ScaleZ(-0.7),
            IMGenerator::Inversion,
            IMGenerator::Shrink,
            IMGenerator::TranslateX,
        ];
        let s = IMSphere::new(0.8, -0.3, 1.1, 0.25);
        for g in gens {
            let t = IMTransform::single(g);
            assert!(imsphere_map_residual(&t, &s, 20) < 1e-9, "{g:?}");
        }
        let word = IMTransform::identity()
            .then(IMGenerator::TranslateX)
            .then(IMGenerator::Inversion)
            .then(IMGenerator::Rotation(0.2))
            .then(IMGenerator::Shrink);
        assert!(imsphere_map_residual(&word, &s, 20) < 1e-9);
    }

    #[test]
    fn pairing_report_flags_known_rows() {
        let rows = generator_pairing_report(3, 64);
        let flags: Vec<bool> = rows.iter().map(|r| r.matches).collect();
        assert_eq!(flags, vec![true, false, false, false, true, true, false]);
        let lambda = plane((0.0, 0.0, 1.0), 1.0);
        let q = plane_to_ipoint(&lambda_transform(&lambda).unwrap());
        assert!(q.distance(&IsoPoint::finite(0.0, 0.0, 0.25)) < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn pi_round_trip(x in -5.0..5.0f64, y in -5.0..5.0f64, z in -5.0..5.0f64) {
            let q = IsoPoint::finite(x, y, z);
            let p = ipoint_to_plane(&q);
            proptest::prop_assert!((p.n.norm() - 1.0).abs() < 1e-14);
            proptest::prop_assert!(plane_to_ipoint(&p).distance(&q) < 1e-12 * (1.0 + x * x + y * y));
        }

        #[test]
        fn stereo_inverts(x in -20.0..20.0f64, y in -20.0..20.0f64) {
            let (u, v) = stereo(&inverse_stereo(x, y));
            proptest::prop_assert!((u - x).abs() + (v - y).abs() < 1e-12 * (1.0 + x.abs() + y.abs()));
        }

        #[test]
        fn tangent_planes_on_imsphere(
            m in proptest::array::uniform3(-3.0..3.0f64),
            r in -3.0..3.0f64,
            x in -4.0..4.0f64,
            y in -4.0..4.0f64,
        ) {
            let s = OrientedSphere { m: Vec3::new(m[0], m[1], m[2]), r };
            let plane = crate::geom::sphere_tangent_plane(&s, inverse_stereo(x, y)).plane;
            let q = plane_to_ipoint(&plane);
            proptest::prop_assert!(sphere_to_imsphere(&s).residual(&q).abs() < 1e-11 * (1.0 + x * x + y * y));
        }
    }
}
