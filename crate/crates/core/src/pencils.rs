//! Circles and lines as cycles `a(x²+y²) + bx + cy + d = 0`, pencil
//! classification, and the linear recovery constructions for fields that are
//! linear on every circle of a family.

use serde::{Deserialize, Serialize};

use crate::biharmonic::ScalarField;
use crate::error::{Error, Result};
use crate::linalg::{lstsq, right_singular_vectors};
use crate::scalar::{lit, to64, Real};
use crate::surfaces::CycloLine;

/// `σ3/σ1` below this declares rank ≤ 2 (and `σ2/σ1` rank 1).
pub const RANK_TOL: f64 = 1e-9;
/// Relative discriminant below this is a double root (parabolic pencil).
pub const DISC_TOL: f64 = 1e-9;
/// Per-circle linear-fit residual bound for the recovery constructions.
pub const LINEAR_TOL: f64 = 1e-8;
/// Incidence tolerance for common-point detection.
pub const COMMON_POINT_TOL: f64 = 1e-8;
/// Residual bound certifying the nested-circle form.
pub const NESTED_TOL: f64 = 1e-7;
/// Linear-fit bound used by the centre-constraint check.
pub const CENTER_CHECK_TOL: f64 = 1e-9;

/// The cycle `a(x² + y²) + b x + c y + d = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cycle<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> Cycle<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Cycle { a, b, c, d }
    }

    pub fn circle(cx: T, cy: T, r: T) -> Self {
        let two = lit::<T>(2.0);
        Cycle::new(T::one(), -two * cx, -two * cy, cx * cx + cy * cy - r * r)
    }

    pub fn as_array(&self) -> [T; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn from_array(v: &[T]) -> Self {
        Cycle::new(v[0], v[1], v[2], v[3])
    }

    /// Inversive quadratic form `b² + c² − 4ad`.
    pub fn q(&self) -> T {
        self.b * self.b + self.c * self.c - lit::<T>(4.0) * self.a * self.d
    }

    /// Polar form of [`Cycle::q`].
    pub fn bilinear(&self, o: &Self) -> T {
        self.b * o.b + self.c * o.c - lit::<T>(2.0) * (self.a * o.d + o.a * self.d)
    }

    pub fn is_line(&self) -> bool {
        self.a == T::zero()
    }

    pub fn is_genuine_circle(&self) -> bool {
        self.a != T::zero() && self.q() > T::zero()
    }

    pub fn eval(&self, x: T, y: T) -> T {
        self.a * (x * x + y * y) + self.b * x + self.c * y + self.d
    }

    /// Centre and radius of a genuine circle.
    pub fn center_radius(&self) -> Option<(T, T, T)> {
        if !self.is_genuine_circle() {
            return None;
        }
        let two_a = lit::<T>(2.0) * self.a;
        Some((-self.b / two_a, -self.c / two_a, self.q().sqrt() / two_a.abs()))
    }

    /// Scaled so that the first nonzero of `(a, b, c)` equals 1.
    pub fn canonical(&self) -> Self {
        let lead = [self.a, self.b, self.c].into_iter().find(|v| *v != T::zero());
        match lead {
            Some(s) => Cycle::new(self.a / s, self.b / s, self.c / s, self.d / s),
            None => *self,
        }
    }

    fn scaled(&self, s: T) -> Self {
        Cycle::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    fn add(&self, o: &Self) -> Self {
        Cycle::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

/// A point of the plane or the ideal point ∞.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanePoint<T> {
    Finite { x: T, y: T },
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PencilTag {
    Elliptic,
    Hyperbolic,
    Parabolic,
    NotAPencil,
    Degenerate,
}

/// Classification result.
///
/// Base points: the two common points (elliptic), the two limit points
/// (hyperbolic), or the double point (parabolic, with `tangent_circle` a
/// member through it).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PencilClass<T> {
    pub tag: PencilTag,
    pub base_points: Vec<PlanePoint<T>>,
    pub tangent_circle: Option<Cycle<T>>,
    pub rank: usize,
    pub singular_values: Vec<T>,
}

/// The point of a degenerate member (`Q = 0`).
fn point_of_null_cycle<T: Real>(c: &Cycle<T>) -> PlanePoint<T> {
    let scale = c.as_array().iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if c.a.abs() <= scale * lit(RANK_TOL) {
        PlanePoint::Infinity
    } else {
        let two_a = lit::<T>(2.0) * c.a;
        PlanePoint::Finite { x: -c.b / two_a, y: -c.c / two_a }
    }
}

/// Real intersection points of two cycles (lines meet at ∞ as well).
pub fn intersect_cycles<T: Real>(p: &Cycle<T>, q: &Cycle<T>) -> Vec<PlanePoint<T>> {
    let (p, q) = if p.is_line() && !q.is_line() { (*q, *p) } else { (*p, *q) };
    if p.is_line() {
        // two lines
        let det = p.b * q.c - p.c * q.b;
        if det == T::zero() {
            return vec![PlanePoint::Infinity];
        }
        let x = (p.c * q.d - p.d * q.c) / det;
        let y = (p.d * q.b - p.b * q.d) / det;
        return vec![PlanePoint::Finite { x, y }, PlanePoint::Infinity];
    }
    // p is a circle; reduce q against it to a line (radical axis)
    let line = if q.is_line() { q } else { q.add(&p.scaled(-q.a / p.a)) };
    let (cx, cy, r) = match p.center_radius() {
        Some(v) => v,
        None => return Vec::new(),
    };
    let n2 = line.b * line.b + line.c * line.c;
    if n2 == T::zero() {
        return Vec::new();
    }
    // foot of the centre on the line b x + c y + d = 0
    let dist = (line.b * cx + line.c * cy + line.d) / n2.sqrt();
    let (ux, uy) = (line.b / n2.sqrt(), line.c / n2.sqrt());
    let (fx, fy) = (cx - ux * dist, cy - uy * dist);
    let h2 = r * r - dist * dist;
    let tol = r * r * lit(DISC_TOL);
    if h2 < -tol {
        Vec::new()
    } else if h2 <= tol {
        vec![PlanePoint::Finite { x: fx, y: fy }]
    } else {
        let h = h2.sqrt();
        vec![
            PlanePoint::Finite { x: fx - uy * h, y: fy + ux * h },
            PlanePoint::Finite { x: fx + uy * h, y: fy - ux * h },
        ]
    }
}

/// Rank and type of a family of cycles.
pub fn classify_family<T: Real>(cycles: &[Cycle<T>]) -> Result<PencilClass<T>> {
    if cycles.len() < 3 {
        return Err(Error::TooFew(cycles.len()));
    }
    let rows: Vec<Vec<T>> = cycles
        .iter()
        .map(|c| {
            let v = c.as_array();
            let n = v.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
            v.iter().map(|x| *x / n).collect()
        })
        .collect();
    let (s, v) = right_singular_vectors(&rows);
    let s: Vec<T> = s.into_iter().take(cycles.len().min(4)).collect();
    let s1 = s[0];
    let rank = s.iter().filter(|x| **x > s1 * lit(RANK_TOL)).count();
    let mut out = PencilClass {
        tag: PencilTag::NotAPencil,
        base_points: Vec::new(),
        tangent_circle: None,
        rank,
        singular_values: s.clone(),
    };
    if rank >= 3 {
        return Ok(out);
    }
    if rank <= 1 {
        out.tag = PencilTag::Degenerate;
        return Ok(out);
    }
    let c1 = Cycle::from_array(&v[0]);
    let c2 = Cycle::from_array(&v[1]);
    let (q11, q22, b12) = (c1.q(), c2.q(), c1.bilinear(&c2));
    let disc = b12 * b12 - q11 * q22;
    // size of the restricted form; b12² + |q11 q22| collapses when one basis
    // vector is close to the null member of a parabolic pencil
    let norm = q11.abs() + q22.abs() + b12.abs();
    let scale = norm * norm;
    let rel = if scale > T::zero() { disc / scale } else { T::zero() };
    // members μ C1 + λ C2 with Q = 0
    let null_members = |sq: T| -> Vec<Cycle<T>> {
        if q11 == T::zero() && q22 == T::zero() {
            return vec![c1, c2];
        }
        if q22.abs() >= q11.abs() {
            [-b12 + sq, -b12 - sq]
                .iter()
                .map(|l| c1.add(&c2.scaled(*l / q22)))
                .collect()
        } else {
            [-b12 + sq, -b12 - sq]
                .iter()
                .map(|m| c1.scaled(*m / q11).add(&c2))
                .collect()
        }
    };
    if rel.abs() <= lit(DISC_TOL) {
        out.tag = PencilTag::Parabolic;
        let d = null_members(T::zero())[0];
        out.base_points = vec![point_of_null_cycle(&d)];
        let member = if (c1.q() - T::zero()).abs() > (c2.q()).abs() { c1 } else { c2 };
        out.tangent_circle = Some(member.canonical());
    } else if rel > T::zero() {
        out.tag = PencilTag::Hyperbolic;
        out.base_points = null_members(disc.sqrt()).iter().map(point_of_null_cycle).collect();
    } else {
        out.tag = PencilTag::Elliptic;
        out.base_points = intersect_cycles(&c1, &c2);
    }
    Ok(out)
}

fn fit_linear<T: Real>(pts: &[(T, T, T)]) -> Result<[T; 3]> {
    let rows: Vec<Vec<T>> = pts.iter().map(|&(x, y, _)| vec![T::one(), x, y]).collect();
    let rhs: Vec<T> = pts.iter().map(|p| p.2).collect();
    if rows.len() < 3 {
        return Err(Error::EmptyIntersection);
    }
    let fit = lstsq(&rows, &rhs, 1e-13);
    if to64(fit.max_abs) > LINEAR_TOL {
        return Err(Error::NotLinearOnCircle { residual: to64(fit.max_abs) });
    }
    Ok([fit.coeffs[0], fit.coeffs[1], fit.coeffs[2]])
}

/// Result of the crossing-circles construction:
/// `F = A((x − a)² + (y − b)²) + B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecovery<T> {
    pub big_a: T,
    /// `(a, b)`; `None` when `A = 0` and the centre is indeterminate.
    pub center: Option<(T, T)>,
    pub big_b: T,
    /// The recovered field as `A ρ² + e x + f y + g`: `[e, f, g]`.
    pub linear: [T; 3],
    /// Largest deviation from the input samples.
    pub residual: T,
}

/// Recovers `A((x−a)² + (y−b)²) + B` from samples on pairwise crossing circles.
pub fn recover_crossing<T: Real>(
    circles: &[Cycle<T>],
    samples: &[Vec<(T, T, T)>],
) -> Result<CrossingRecovery<T>> {
    if circles.len() < 3 || samples.len() != circles.len() {
        return Err(Error::TooFew(circles.len().min(samples.len())));
    }
    let norm: Vec<Cycle<T>> = circles
        .iter()
        .map(|c| {
            if c.a == T::zero() {
                Err(Error::DependentCircles)
            } else {
                Ok(c.scaled(T::one() / c.a))
            }
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<T>> = norm.iter().take(3).map(|c| c.as_array().to_vec()).collect();
    let (s, _) = right_singular_vectors(&rows);
    if s[2] <= s[0] * lit(RANK_TOL) {
        return Err(Error::DependentCircles);
    }
    let lin: Vec<[T; 3]> = samples.iter().map(|p| fit_linear(p)).collect::<Result<_>>()?;
    // l_1 - l_t = k (s_t - s_1) for all t; solve for k in least squares
    let mut num = T::zero();
    let mut den = T::zero();
    for t in 1..norm.len() {
        let u = [lin[0][0] - lin[t][0], lin[0][1] - lin[t][1], lin[0][2] - lin[t][2]];
        let w = [norm[t].d - norm[0].d, norm[t].b - norm[0].b, norm[t].c - norm[0].c];
        for i in 0..3 {
            num = num + u[i] * w[i];
            den = den + w[i] * w[i];
        }
    }
    let k = num / den;
    let s1 = norm[0];
    let e = k * s1.b + lin[0][1];
    let f = k * s1.c + lin[0][2];
    let g = k * s1.d + lin[0][0];
    let two = lit::<T>(2.0);
    let scale = e.abs().max(f.abs()).max(g.abs()).max(T::one());
    let (center, big_b) = if k.abs() <= scale * lit(1e-12) {
        (None, g)
    } else {
        let (a, b) = (-e / (two * k), -f / (two * k));
        (Some((a, b)), g - k * (a * a + b * b))
    };
    let mut residual = T::zero();
    for pts in samples {
        for &(x, y, v) in pts {
            let model = k * (x * x + y * y) + e * x + f * y + g;
            residual = residual.max((model - v).abs());
        }
    }
    Ok(CrossingRecovery { big_a: k, center, big_b, linear: [e, f, g], residual })
}

/// Result of the common-point construction: with `(c, d)` the common point,
/// `F = A((x−a)² + (y−b)²) + (B X² + C X Y + D Y²)/(X² + Y²)`,
/// `X = x − c`, `Y = y − d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonPointRecovery<T> {
    pub common_point: (T, T),
    pub big_a: T,
    /// `(a, b)`; `None` when `A = 0`.
    pub center: Option<(T, T)>,
    /// Linear part `(e, f)` of `A ρ² + e X + f Y` in shifted coordinates.
    pub linear: (T, T),
    pub big_b: T,
    pub big_c: T,
    pub big_d: T,
    pub residual: T,
}

fn radical_center<T: Real>(p: &Cycle<T>, q: &Cycle<T>, r: &Cycle<T>) -> Option<(T, T)> {
    let l1 = q.add(&p.scaled(-q.a / p.a));
    let l2 = r.add(&p.scaled(-r.a / p.a));
    let det = l1.b * l2.c - l1.c * l2.b;
    let scale = (l1.b.abs() + l1.c.abs()) * (l2.b.abs() + l2.c.abs());
    if det.abs() <= scale * lit(1e-12) {
        return None;
    }
    Some(((l1.c * l2.d - l1.d * l2.c) / det, (l1.d * l2.b - l1.b * l2.d) / det))
}

fn passes_through<T: Real>(c: &Cycle<T>, x: T, y: T) -> bool {
    match c.center_radius() {
        Some((cx, cy, r)) => {
            let d = ((x - cx) * (x - cx) + (y - cy) * (y - cy)).sqrt();
            (d - r).abs() <= lit::<T>(COMMON_POINT_TOL) * r.max(T::one())
        }
        None => false,
    }
}

/// Common point of the circles by radical centres of triples and a vote.
pub fn find_common_point<T: Real>(circles: &[Cycle<T>]) -> Result<(T, T)> {
    let n = circles.len();
    let mut best: Option<((T, T), usize)> = None;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let Some(p) = radical_center(&circles[i], &circles[j], &circles[k]) else {
                    continue;
                };
                let votes = circles.iter().filter(|c| passes_through(c, p.0, p.1)).count();
                if best.is_none_or(|(_, v)| votes > v) {
                    best = Some((p, votes));
                }
            }
        }
    }
    match best {
        Some((p, votes)) if votes == n => Ok(p),
        _ => Err(Error::NoCommonPoint),
    }
}

/// Recovers the exceptional form from samples on circles through one point,
/// by inverting at that point and fitting a quadratic through the images.
pub fn recover_common_point<T: Real>(
    circles: &[Cycle<T>],
    samples: &[Vec<(T, T, T)>],
) -> Result<CommonPointRecovery<T>> {
    if circles.len() < 3 || samples.len() != circles.len() {
        return Err(Error::TooFew(circles.len().min(samples.len())));
    }
    if circles.iter().any(|c| !c.is_genuine_circle()) {
        return Err(Error::NoCommonPoint);
    }
    let (ox, oy) = find_common_point(circles)?;
    for pts in samples {
        fit_linear(pts)?;
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for pts in samples {
        for &(x, y, v) in pts {
            let (px, py) = (x - ox, y - oy);
            let r2 = px * px + py * py;
            if r2 <= lit(1e-12) {
                continue;
            }
            let (xx, yy) = (px / r2, py / r2);
            rows.push(vec![xx * xx + yy * yy, xx, yy, xx * xx, xx * yy, yy * yy]);
            rhs.push(v / r2);
        }
    }
    // the basis has the redundancy ρ² = X² + Y²; drop one to keep it square-free
    let rows: Vec<Vec<T>> = rows.into_iter().map(|r| vec![T::one(), r[1], r[2], r[3], r[4], r[5]]).collect();
    let fit = lstsq(&rows, &rhs, 1e-11);
    if fit.rank < 6 {
        return Err(Error::PencilDegeneracy);
    }
    // G = u0 + u1 X + u2 Y + u3 X² + u4 XY + u5 Y²
    let u = &fit.coeffs;
    let big_a = u[0];
    let two = lit::<T>(2.0);
    let (center, shift) = if big_a.abs() <= lit(1e-12) {
        (None, T::zero())
    } else {
        let (a, b) = (-u[1] / (two * big_a), -u[2] / (two * big_a));
        (Some((a + ox, b + oy)), big_a * (a * a + b * b))
    };
    let mut residual = T::zero();
    for pts in samples {
        for &(x, y, v) in pts {
            let (px, py) = (x - ox, y - oy);
            let r2 = px * px + py * py;
            let model = u[0] * r2 + u[1] * px + u[2] * py + (u[3] * px * px + u[4] * px * py + u[5] * py * py) / r2;
            residual = residual.max((model - v).abs());
        }
    }
    Ok(CommonPointRecovery {
        common_point: (ox, oy),
        big_a,
        center,
        linear: (u[1], u[2]),
        big_b: u[3] - shift,
        big_c: u[4],
        big_d: u[5] - shift,
        residual,
    })
}

/// `(A, B, C, a, b, c)` of `F = (x² + y²)(A x + B y + C) + a x + b y + c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedFit<T> {
    pub coeffs: [T; 6],
    pub residual: T,
}

/// Fits the nested-circle form on `x²+y²=1`, `x²+y²=2` and 20 points between.
pub fn fit_nested<T: Real>(f: &ScalarField<T>) -> Result<NestedFit<T>> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for r2 in [T::one(), lit(2.0)] {
        let circle = Cycle::new(T::one(), T::zero(), T::zero(), -r2);
        let res = f.restrict_to_circle(&circle, 1)?;
        if to64(res) > LINEAR_TOL {
            return Err(Error::NotLinearOnCircle { residual: to64(res) });
        }
        let r = r2.sqrt();
        for k in 0..50 {
            let t = lit::<T>(k as f64 * std::f64::consts::TAU / 50.0);
            rows.push((r * t.cos(), r * t.sin()));
        }
    }
    for k in 0..20 {
        let r = lit::<T>(1.0 + (2f64.sqrt() - 1.0) * (k as f64 + 0.5) / 20.0);
        let t = lit::<T>(k as f64 * 2.399_963_229_728_653);
        rows.push((r * t.cos(), r * t.sin()));
    }
    let mut design = Vec::new();
    for &(x, y) in &rows {
        let Ok(v) = f.value(x, y) else { continue };
        let q = x * x + y * y;
        design.push(vec![q * x, q * y, q, x, y, T::one()]);
        rhs.push(v);
    }
    let fit = lstsq(&design, &rhs, 1e-13);
    let c = &fit.coeffs;
    let out = NestedFit { coeffs: [c[0], c[1], c[2], c[3], c[4], c[5]], residual: fit.rms };
    if to64(fit.rms) >= NESTED_TOL {
        return Err(Error::BadFit { residual: to64(fit.rms) });
    }
    Ok(out)
}

/// Whether `(x²+y²)(Ax+By+C) + ax + by + c` restricted to `s` is linear.
#[allow(clippy::too_many_arguments)]
pub fn center_constraint_check<T: Real>(coeffs: [T; 6], s: &Cycle<T>) -> bool {
    let [big_a, big_b, big_c, a, b, c] = coeffs;
    let Some((cx, cy, r)) = s.center_radius() else { return false };
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for k in 0..50 {
        let t = lit::<T>(k as f64 * std::f64::consts::TAU / 50.0);
        let (x, y) = (cx + r * t.cos(), cy + r * t.sin());
        let q = x * x + y * y;
        rows.push(vec![T::one(), x, y]);
        rhs.push(q * (big_a * x + big_b * y + big_c) + a * x + b * y + c);
    }
    to64(lstsq(&rows, &rhs, 1e-13).rms) < CENTER_CHECK_TOL
}

/// Top-view cycle of the Gauss circle of a cone (a line of spheres in R⁴).
///
/// The tangent planes common to the spheres have normals with
/// `n · (d1, d2, d3) = d4`; the stereographic image of that circle is
/// `((d4 + d3)/2) ρ² − d1 x − d2 y + (d4 − d3)/2 = 0`.
pub fn gauss_cycle<T: Real>(cone: &CycloLine<T>) -> Result<Cycle<T>> {
    let d = cone.dir;
    let dm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if dm <= lit(1e-12) || d[3].abs() >= dm * (T::one() - lit(1e-12)) {
        return Err(Error::DegenerateCone);
    }
    let half = lit::<T>(0.5);
    Ok(Cycle::new((d[3] + d[2]) * half, -d[0], -d[1], (d[3] - d[2]) * half))
}

/// Classifies the Gauss images of the cones of a one-parameter family.
pub fn gauss_pencil_of_cones<T: Real, F>(family: F, phis: &[T]) -> Result<PencilClass<T>>
where
    F: Fn(T) -> CycloLine<T>,
{
    if phis.len() < 3 {
        return Err(Error::TooFew(phis.len()));
    }
    let cycles: Vec<Cycle<T>> = phis.iter().map(|&p| gauss_cycle(&family(p))).collect::<Result<_>>()?;
    classify_family(&cycles)
}
