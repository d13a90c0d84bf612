//! Numerical certification: curvatures, the Laguerre energy integrand and
//! its first variation, and residual reports for the geometric identities.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biharmonic::{make_polynomial, make_sum, ScalarField};
use crate::error::{Error, Result};
use crate::geom::{OrientedSphere, Vec3};
use crate::isotropic::stereo;
use crate::jet::Jet;
use crate::mesh::{build_mesh, Grid, Mesh};
use crate::pencils::gauss_cycle;
use crate::reconstruct::{reconstruct_surface, ParamSurface, Provenance, SurfaceKind, IMMERSION_EPS};
use crate::scalar::{lit, to64, Real};
use crate::surfaces::{
    cyclographic_preimage, rulings_of_convolution, table_field, ConvolutionRulings, CycloFamily,
};
use crate::tolerances as tol;

/// Free-form report metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetaValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<bool> for MetaValue {
    fn from(v: bool) -> Self {
        MetaValue::Bool(v)
    }
}
impl From<i64> for MetaValue {
    fn from(v: i64) -> Self {
        MetaValue::Int(v)
    }
}
impl From<usize> for MetaValue {
    fn from(v: usize) -> Self {
        MetaValue::Int(v as i64)
    }
}
impl From<u64> for MetaValue {
    fn from(v: u64) -> Self {
        MetaValue::Int(v as i64)
    }
}
impl From<f64> for MetaValue {
    fn from(v: f64) -> Self {
        MetaValue::Float(v)
    }
}
impl From<&str> for MetaValue {
    fn from(v: &str) -> Self {
        MetaValue::Text(v.to_string())
    }
}
impl From<String> for MetaValue {
    fn from(v: String) -> Self {
        MetaValue::Text(v)
    }
}

/// Outcome of one check; `pass` is `max_residual ≤ tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub samples: usize,
    pub max_residual: f64,
    pub rms_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub meta: BTreeMap<String, MetaValue>,
}

impl CheckReport {
    /// Non-finite residuals count as failures and are reported as `f64::MAX`
    /// (JSON has no infinity).
    pub fn from_residuals(check: &str, residuals: &[f64], tolerance: f64) -> Self {
        let bad = residuals.iter().filter(|r| !r.is_finite()).count();
        let (max, rms) = if bad > 0 {
            (f64::MAX, f64::MAX)
        } else if residuals.is_empty() {
            (0.0, 0.0)
        } else {
            let max = residuals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            let ss: f64 = residuals.iter().map(|r| r * r).sum();
            (max, (ss / residuals.len() as f64).sqrt())
        };
        let mut meta = BTreeMap::new();
        if bad > 0 {
            meta.insert("non_finite".to_string(), MetaValue::from(bad));
        }
        CheckReport {
            check: check.to_string(),
            samples: residuals.len(),
            max_residual: max,
            rms_residual: rms,
            tolerance,
            pass: max <= tolerance,
            meta,
        }
    }

    pub fn with(mut self, key: &str, v: impl Into<MetaValue>) -> Self {
        self.meta.insert(key.to_string(), v.into());
        self
    }
}

fn vec_of<T: Real>(j: &[Jet<T>; 3], i: usize, k: usize) -> Vec3<T> {
    Vec3::new(j[0].partial(i, k), j[1].partial(i, k), j[2].partial(i, k))
}

/// First and second fundamental forms from `r` and its derivatives.
struct Forms<T> {
    e1: T,
    f1: T,
    g1: T,
    e2: T,
    f2: T,
    g2: T,
    area: T,
}

fn forms<T: Real>(ru: Vec3<T>, rv: Vec3<T>, ruu: Vec3<T>, ruv: Vec3<T>, rvv: Vec3<T>, n: Vec3<T>) -> Forms<T> {
    Forms {
        e1: ru.dot(&ru),
        f1: ru.dot(&rv),
        g1: rv.dot(&rv),
        e2: ruu.dot(&n),
        f2: ruv.dot(&n),
        g2: rvv.dot(&n),
        area: ru.cross(&rv).norm(),
    }
}

impl<T: Real> Forms<T> {
    fn hk(&self) -> (T, T) {
        let det = self.e1 * self.g1 - self.f1 * self.f1;
        let two = lit::<T>(2.0);
        let h = (self.e2 * self.g1 - two * self.f2 * self.f1 + self.g2 * self.e1) / (two * det);
        let k = (self.e2 * self.g2 - self.f2 * self.f2) / det;
        (h, k)
    }
}

fn forms_from_jets<T: Real>(s: &ParamSurface<T>, u: T, v: T, j: &[Jet<T>; 3]) -> Result<Forms<T>> {
    let ru = vec_of(j, 1, 0);
    let rv = vec_of(j, 0, 1);
    let n = s.orient(u, v, ru.cross(&rv))?;
    Ok(forms(ru, rv, vec_of(j, 2, 0), vec_of(j, 1, 1), vec_of(j, 0, 2), n))
}

/// Mean and Gaussian curvature with the reconstruction's normal orientation.
pub fn curvatures<T: Real>(s: &ParamSurface<T>, u: T, v: T) -> Result<(T, T)> {
    let j = s.jets(u, v, 2)?;
    Ok(forms_from_jets(s, u, v, &j)?.hk())
}

/// `(H, K)` from central differences of surface points with step `h`.
pub fn curvatures_fd<T: Real>(s: &ParamSurface<T>, u: T, v: T, h: T) -> Result<(T, T)> {
    let p = |a: T, b: T| s.point(u + a * h, v + b * h);
    let one = T::one();
    let z = T::zero();
    let two = lit::<T>(2.0);
    let c = p(z, z)?;
    let (pu, mu, pv, mv) = (p(one, z)?, p(-one, z)?, p(z, one)?, p(z, -one)?);
    let (pp, pm, mp, mm) = (p(one, one)?, p(one, -one)?, p(-one, one)?, p(-one, -one)?);
    let ru = (pu - mu) * (one / (two * h));
    let rv = (pv - mv) * (one / (two * h));
    let h2 = one / (h * h);
    let ruu = (pu + mu - c * two) * h2;
    let rvv = (pv + mv - c * two) * h2;
    let ruv = (pp - pm - mp + mm) * (h2 / lit(4.0));
    let n = s.orient(u, v, ru.cross(&rv))?;
    Ok(forms(ru, rv, ruu, ruv, rvv, n).hk())
}

/// `(H² − K)/K`, the integrand of the Laguerre energy.
pub fn omega_integrand<T: Real>(s: &ParamSurface<T>, u: T, v: T) -> Result<T> {
    let (h, k) = curvatures(s, u, v)?;
    if !(k.abs() > lit(tol::ZERO_CURVATURE)) {
        return Err(Error::ZeroGaussCurvature);
    }
    Ok((h * h - k) / k)
}

/// Compactly supported perturbation `amplitude · (1 − |p − c|²/radius²)⁴`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    /// `‖b‖_{L²} = |amplitude| · radius · √(π/9)`.
    pub fn l2_norm(&self) -> f64 {
        self.amplitude.abs() * self.radius * (std::f64::consts::PI / 9.0).sqrt()
    }

    /// The bump as a polynomial field (valid inside its support only).
    pub fn field<T: Real>(&self) -> ScalarField<T> {
        // base = 1 − ((x−cx)² + (y−cy)²)/r², a quadratic
        let r2 = self.radius * self.radius;
        let mut base: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        base.insert((0, 0), 1.0 - (self.cx * self.cx + self.cy * self.cy) / r2);
        base.insert((1, 0), 2.0 * self.cx / r2);
        base.insert((0, 1), 2.0 * self.cy / r2);
        base.insert((2, 0), -1.0 / r2);
        base.insert((0, 2), -1.0 / r2);
        let mut acc: BTreeMap<(u32, u32), f64> = BTreeMap::from([((0, 0), self.amplitude)]);
        for _ in 0..4 {
            let mut next = BTreeMap::new();
            for ((i, j), a) in &acc {
                for ((k, l), b) in &base {
                    *next.entry((i + k, j + l)).or_insert(0.0) += a * b;
                }
            }
            acc = next;
        }
        make_polynomial(acc.into_iter().map(|((i, j), c)| (lit::<T>(c), i, j)).collect())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// Polar tensor-product nodes `(x, y, weight)` on the bump's disk.
fn disk_nodes(b: &Bump, n: usize) -> Vec<(f64, f64, f64)> {
    let (xs, ws) = gauss_legendre(n);
    let mut out = Vec::with_capacity(n * n);
    for (xr, wr) in xs.iter().zip(&ws) {
        let r = 0.5 * b.radius * (xr + 1.0);
        for (xt, wt) in xs.iter().zip(&ws) {
            let t = std::f64::consts::PI * (xt + 1.0);
            let w = wr * 0.5 * b.radius * wt * std::f64::consts::PI * r;
            out.push((b.cx + r * t.cos(), b.cy + r * t.sin(), w));
        }
    }
    out
}

/// Ω over the bump disk for `r_F + ε r_B`, from precomputed jets.
/// Quadrature weight with the surface jets of `r_F` and `r_B` at one node.
type NodeJets<T> = (T, [Jet<T>; 3], [Jet<T>; 3]);

fn omega_local<T: Real>(jets: &[NodeJets<T>], eps: T) -> Result<T> {
    let mut acc = T::zero();
    for (w, jf, jb) in jets {
        let j = [jf[0] + jb[0].scale(eps), jf[1] + jb[1].scale(eps), jf[2] + jb[2].scale(eps)];
        let ru = vec_of(&j, 1, 0);
        let rv = vec_of(&j, 0, 1);
        let c = ru.cross(&rv);
        let len = c.norm();
        if !(len > lit(IMMERSION_EPS)) {
            return Err(Error::NonImmersed { u: f64::NAN, v: f64::NAN });
        }
        let n = c * (T::one() / len);
        let fm = forms(ru, rv, vec_of(&j, 2, 0), vec_of(&j, 1, 1), vec_of(&j, 0, 2), n);
        let (h, k) = fm.hk();
        if !(k.abs() > lit(tol::ZERO_CURVATURE)) {
            return Err(Error::ZeroGaussCurvature);
        }
        acc = acc + *w * (h * h - k) / k * fm.area;
    }
    Ok(acc)
}

/// Derivative of Ω along `F + ε·bump` at `ε = 0`: central differences at
/// `ε` and `ε/2` combined by Richardson extrapolation.
pub fn first_variation<T: Real>(f: &ScalarField<T>, bump: &Bump) -> Result<T> {
    let clearance = to64(f.singular_distance(lit(bump.cx), lit(bump.cy)));
    if clearance <= bump.radius + to64(f.guard) {
        return Err(Error::SingularPoint { x: bump.cx, y: bump.cy });
    }
    let sf = reconstruct_surface(f);
    let sb = reconstruct_surface(&bump.field::<T>());
    let jets: Vec<NodeJets<T>> = disk_nodes(bump, tol::QUADRATURE_NODES)
        .into_iter()
        .map(|(x, y, w)| {
            let (x, y) = (lit::<T>(x), lit::<T>(y));
            Ok((lit::<T>(w), sf.jets(x, y, 2)?, sb.jets(x, y, 2)?))
        })
        .collect::<Result<_>>()?;
    let eps = lit::<T>(tol::VARIATION_EPS);
    let two = lit::<T>(2.0);
    let d = |e: T| -> Result<T> { Ok((omega_local(&jets, e)? - omega_local(&jets, -e)?) / (two * e)) };
    let d1 = d(eps)?;
    let d2 = d(eps / two)?;
    Ok((lit::<T>(4.0) * d2 - d1) / lit(3.0))
}

/// `max |stereo(n(u, v)) − (u, v)|` over the grid.
pub fn gaussmap_identity_residual<T: Real>(s: &ParamSurface<T>, grid: Grid) -> CheckReport {
    let name = "gaussmap";
    let meta_grid = format!("{}x{} [{},{}]x[{},{}]", grid.nu, grid.nv, grid.u0, grid.u1, grid.v0, grid.v1);
    if !s.gauss_coordinates() {
        return CheckReport::from_residuals(name, &[], tol::GAUSSMAP)
            .with("grid", meta_grid)
            .with("skipped", "not in Gauss coordinates");
    }
    if !s.immersed() {
        return CheckReport::from_residuals(name, &[], tol::GAUSSMAP)
            .with("grid", meta_grid)
            .with("skipped", "NonImmersed");
    }
    let res: Vec<Option<f64>> = grid
        .points()
        .par_iter()
        .map(|&(u, v)| {
            let n = s.normal(lit(u), lit(v)).ok()?;
            let (a, b) = stereo(&n);
            Some(((to64(a) - u).powi(2) + (to64(b) - v).powi(2)).sqrt())
        })
        .collect();
    let skipped = res.iter().filter(|r| r.is_none()).count();
    let vals: Vec<f64> = res.into_iter().flatten().collect();
    CheckReport::from_residuals(name, &vals, tol::GAUSSMAP).with("grid", meta_grid).with("skipped_points", skipped)
}

#[derive(Clone, Debug, PartialEq)]
struct Term {
    w: f64,
    name: String,
    theta: f64,
}

fn flatten(p: &Provenance, w: f64, out: &mut Vec<Term>) -> bool {
    match p {
        Provenance::Block { name, theta } => {
            if w != 0.0 {
                out.push(Term { w, name: name.clone(), theta: *theta });
            }
            true
        }
        Provenance::Convolution(terms) => terms.iter().all(|(a, q)| flatten(q, w * a, out)),
        _ => false,
    }
}

fn same_terms(a: &Provenance, b: &Provenance) -> bool {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    if !flatten(a, 1.0, &mut x) || !flatten(b, 1.0, &mut y) || x.len() != y.len() {
        return false;
    }
    let key = |t: &Term| (t.name.clone(), (t.theta * 1e12).round() as i64);
    x.sort_by_key(key);
    y.sort_by_key(key);
    x.iter().zip(&y).all(|(p, q)| {
        p.name == q.name && (p.w - q.w).abs() <= 1e-12 * p.w.abs().max(1.0) && (p.theta - q.theta).abs() <= 1e-12
    })
}

/// Distance from `R(φ, λ)` to the surface point on the Gauss-coordinate ray
/// `s (cos φ, −sin φ)` whose projection on the ruling equals `λ`.
pub fn ruling_residual<T: Real>(
    s: &ParamSurface<T>,
    rulings: &ConvolutionRulings<T>,
    phis: &[T],
    lambdas: &[T],
) -> Result<CheckReport> {
    if !same_terms(&s.provenance(), &rulings.surface()?.provenance()) {
        return Err(Error::ProvenanceMismatch);
    }
    let mut res = Vec::new();
    let mut unbracketed = 0usize;
    for &phi in phis {
        let (sp, cp) = phi.sin_cos();
        let base = rulings.base(phi);
        let d = rulings.direction(phi);
        let at = |t: f64| s.point(lit::<T>(t) * cp, -lit::<T>(t) * sp);
        for &lam in lambdas {
            let g = |t: f64| at(t).map(|p| to64((p - base).dot(&d) - lam));
            match bracket_root(g, 1e-3, 1e3, 241).and_then(|t| at(t).ok()) {
                Some(p) => res.push(to64(p.dist(&rulings.at(phi, lam)))),
                None => {
                    unbracketed += 1;
                    res.push(f64::INFINITY);
                }
            }
        }
    }
    Ok(CheckReport::from_residuals("ruling", &res, tol::RULING)
        .with("phis", phis.len())
        .with("lambdas", lambdas.len())
        .with("unbracketed", unbracketed)
        .with("bisection_tol", tol::BISECTION))
}

/// First sign change of `g` on a geometric grid over `[lo, hi]`, refined by
/// bisection to relative width `tolerances::BISECTION`.
fn bracket_root(g: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, n: usize) -> Option<f64> {
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    let mut prev: Option<(f64, f64)> = None;
    let mut t = lo;
    for _ in 0..n {
        if let Ok(v) = g(t) {
            if v == 0.0 {
                return Some(t);
            }
            if let Some((a, ga)) = prev {
                if ga.signum() != v.signum() {
                    let (mut a, mut b, mut ga) = (a, t, ga);
                    while b - a > tol::BISECTION * b {
                        let m = 0.5 * (a + b);
                        let gm = g(m).ok()?;
                        if gm.signum() == ga.signum() {
                            a = m;
                            ga = gm;
                        } else {
                            b = m;
                        }
                    }
                    return Some(0.5 * (a + b));
                }
            }
            prev = Some((t, v));
        } else {
            prev = None;
        }
        t *= ratio;
    }
    None
}

/// Per sphere, the smallest `| |r − m| − |R| |` over valid mesh vertices;
/// the report's residuals are these minima.
pub fn tangency_residual<T: Real>(mesh: &Mesh<T>, spheres: &[OrientedSphere<T>]) -> CheckReport {
    let mins: Vec<f64> = spheres.par_iter().map(|sp| mesh_min(mesh, sp).0).collect();
    CheckReport::from_residuals("tangency", &mins, tol::TANGENCY)
        .with("grid", format!("{}x{}", mesh.grid.nu, mesh.grid.nv))
        .with("spheres", spheres.len())
}

fn sphere_gap<T: Real>(p: &Vec3<T>, sp: &OrientedSphere<T>) -> f64 {
    to64(((*p - sp.m).norm() - sp.r.abs()).abs())
}

/// Smallest gap and the vertex index attaining it.
fn mesh_min<T: Real>(mesh: &Mesh<T>, sp: &OrientedSphere<T>) -> (f64, usize) {
    mesh.vertices
        .iter()
        .enumerate()
        .filter_map(|(k, v)| v.as_ref().map(|p| (sphere_gap(p, sp), k)))
        .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
}

/// Largest `|r_u|`, `|r_v|` at an accepted contact point.
const CONTACT_MAX_SPEED: f64 = 10.0;
/// Contact miss above which a point is taken to lie on another sheet.
const SHEET_TOL: f64 = 1e-6;

/// Number of vertex-gap local minima refined per sphere.
const REFINE_SEEDS: usize = 8;

/// The `count` smallest local minima of the vertex gap (8-neighbourhood).
fn local_minima<T: Real>(mesh: &Mesh<T>, sp: &OrientedSphere<T>, count: usize) -> Vec<(f64, usize)> {
    let g = &mesh.grid;
    let gaps: Vec<Option<f64>> = mesh.vertices.iter().map(|v| v.as_ref().map(|p| sphere_gap(p, sp))).collect();
    let mut mins = Vec::new();
    for i in 0..g.nu {
        for j in 0..g.nv {
            let Some(c) = gaps[i * g.nv + j] else { continue };
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= g.nu as i64 || b >= g.nv as i64 {
                        continue;
                    }
                    if let Some(o) = gaps[a as usize * g.nv + b as usize] {
                        if o < c {
                            is_min = false;
                        }
                    }
                }
            }
            if is_min {
                mins.push((c, i * g.nv + j));
            }
        }
    }
    mins.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    mins.truncate(count);
    mins
}

/// A sphere of a cone together with the parameter point where it should
/// touch the surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactSample<T> {
    pub phi: T,
    pub lambda: T,
    pub u: T,
    pub v: T,
    pub sphere: OrientedSphere<T>,
    /// `|r(u, v) − (m − R n(u, v))|`: the predicted contact point's miss.
    pub contact_miss: T,
}

fn inside(grid: &Grid, u: f64, v: f64, margin: f64) -> bool {
    u > grid.u0 + margin && u < grid.u1 - margin && v > grid.v0 + margin && v < grid.v1 - margin
}

/// For each `φ`, up to `per_phi` spheres of the cone at `φ`: contact points
/// are spread along the cone's Gauss cycle inside `grid`, and `λ` is the
/// least-squares solution of `m(λ) − R(λ) n = r` there.
pub fn contact_spheres<T: Real>(
    s: &ParamSurface<T>,
    family: &CycloFamily<T>,
    phis: &[T],
    per_phi: usize,
    grid: &Grid,
) -> Result<Vec<ContactSample<T>>> {
    let margin = 0.05 * (grid.u1 - grid.u0);
    let mut out = Vec::new();
    for &phi in phis {
        let line = family.line(phi)?;
        let cyc = gauss_cycle(&line)?;
        let cands: Vec<(f64, f64)> = if let Some((cx, cy, r)) = cyc.center_radius() {
            let (cx, cy, r) = (to64(cx), to64(cy), to64(r));
            (0..72)
                .map(|k| {
                    let t = std::f64::consts::PI * (k as f64 + 0.5) / 36.0;
                    (cx + r * t.cos(), cy + r * t.sin())
                })
                .collect()
        } else if cyc.is_line() {
            let (b, c, d) = (to64(cyc.b), to64(cyc.c), to64(cyc.d));
            let nn = b * b + c * c;
            let p0 = (-d * b / nn, -d * c / nn);
            let dir = (-c / nn.sqrt(), b / nn.sqrt());
            let reach = (grid.u1 - grid.u0).max(grid.v1 - grid.v0);
            (0..=80)
                .map(|k| {
                    let t = reach * (k as f64 / 40.0 - 1.0);
                    (p0.0 + t * dir.0, p0.1 + t * dir.1)
                })
                .collect()
        } else {
            return Err(Error::DegenerateCone);
        };
        let mut ok: Vec<ContactSample<T>> = Vec::new();
        for (u, v) in cands {
            if !inside(grid, u, v, margin) || to64(s.singular_distance_surface(lit(u), lit(v))) < 0.3 {
                continue;
            }
            if s.has_angle() && u < 0.0 && v.abs() < 0.05 {
                continue;
            }
            let (uu, vv) = (lit::<T>(u), lit::<T>(v));
            let (Ok(f), Ok(n)) = (s.frame(uu, vv), s.normal(uu, vv)) else { continue };
            // fast parametrization makes vertex spacing coarse on the surface
            if to64(f.ru.norm().max(f.rv.norm())) > CONTACT_MAX_SPEED {
                continue;
            }
            let r = f.r;
            let m0 = Vec3::new(line.base[0], line.base[1], line.base[2]);
            let dm = Vec3::new(line.dir[0], line.dir[1], line.dir[2]);
            let w = dm - n * line.dir[3];
            let ww = w.dot(&w);
            if !(to64(ww) > 1e-20) {
                continue;
            }
            let lam = (r - m0 + n * line.base[3]).dot(&w) / ww;
            let sphere = line.sphere(lam);
            let miss = (r - (sphere.m - n * sphere.r)).norm();
            // on a multi-valued surface the cone touches the sheet whose
            // angle matches; other sheets' points are not contact points
            if s.has_angle() && to64(miss) > SHEET_TOL * (1.0 + to64(r.norm())) {
                continue;
            }
            ok.push(ContactSample { phi, lambda: lam, u: uu, v: vv, sphere, contact_miss: miss });
        }
        if ok.is_empty() {
            continue;
        }
        let k = per_phi.min(ok.len());
        for i in 0..k {
            let idx = if k == 1 { ok.len() / 2 } else { i * (ok.len() - 1) / (k - 1) };
            out.push(ok[idx]);
        }
    }
    Ok(out)
}

impl<T: Real> ParamSurface<T> {
    /// Distance from `(u, v)` to the nearest singular parameter point.
    pub fn singular_distance_surface(&self, u: T, v: T) -> T {
        self.singular_points()
            .into_iter()
            .map(|(a, b)| ((u - a) * (u - a) + (v - b) * (v - b)).sqrt())
            .fold(T::infinity(), T::min)
    }
}

/// Vertex-seeded Newton refinement of the stationary point of
/// `|r(u, v) − m|²` near vertex `k`; returns the smallest gap seen at any
/// surface point visited, so the result is always a genuine surface gap.
/// The walk stays within a tenth of the grid's extent from the vertex:
/// where a sphere hugs the surface along a shallow valley the best vertex
/// can sit well away from the touching point.
fn refine_gap<T: Real>(s: &ParamSurface<T>, mesh: &Mesh<T>, sp: &OrientedSphere<T>, k: usize, gap0: f64) -> f64 {
    let g = &mesh.grid;
    let (i, j) = (k / g.nv, k % g.nv);
    let (mut u, mut v) = (g.u(i), g.v(j));
    let cap = 0.1 * (g.u1 - g.u0).max(g.v1 - g.v0);
    let (u0, v0) = (u, v);
    let mut best = gap0;
    for _ in 0..50 {
        let Ok(jt) = s.jets(lit(u), lit(v), 2) else { break };
        let d = vec_of(&jt, 0, 0) - sp.m;
        let (ru, rv) = (vec_of(&jt, 1, 0), vec_of(&jt, 0, 1));
        let (ruu, ruv, rvv) = (vec_of(&jt, 2, 0), vec_of(&jt, 1, 1), vec_of(&jt, 0, 2));
        let gu = to64(d.dot(&ru));
        let gv = to64(d.dot(&rv));
        let a = to64(ru.dot(&ru) + d.dot(&ruu));
        let b = to64(ru.dot(&rv) + d.dot(&ruv));
        let c = to64(rv.dot(&rv) + d.dot(&rvv));
        let det = a * c - b * b;
        if !(det.abs() > 0.0) {
            break;
        }
        let du = -(c * gu - b * gv) / det;
        let dv = -(a * gv - b * gu) / det;
        u += du;
        v += dv;
        if (u - u0).abs() > cap || (v - v0).abs() > cap {
            break;
        }
        if let Ok(p) = s.point(lit(u), lit(v)) {
            best = best.min(sphere_gap(&p, sp));
        }
        if du.abs().max(dv.abs()) < 1e-15 {
            break;
        }
    }
    best
}

/// [`tangency_residual`] with each vertex minimum refined on the surface
/// itself; raw vertex minima are kept in `meta` as `mesh_max_min`.
pub fn tangency_residual_refined<T: Real>(
    s: &ParamSurface<T>,
    mesh: &Mesh<T>,
    spheres: &[OrientedSphere<T>],
) -> CheckReport {
    let pairs: Vec<(f64, f64)> = spheres
        .par_iter()
        .map(|sp| {
            let (gap, _) = mesh_min(mesh, sp);
            let best = local_minima(mesh, sp, REFINE_SEEDS)
                .into_iter()
                .map(|(g, k)| refine_gap(s, mesh, sp, k, g))
                .fold(gap, f64::min);
            (gap, best)
        })
        .collect();
    let refined: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let raw = pairs.iter().fold(0.0f64, |a, p| a.max(p.0));
    CheckReport::from_residuals("tangency", &refined, tol::TANGENCY)
        .with("grid", format!("{}x{}", mesh.grid.nu, mesh.grid.nv))
        .with("spheres", spheres.len())
        .with("refined", true)
        .with("mesh_max_min", raw)
}

/// Tangency check of a surface against spheres of a cone family: picks
/// `per_phi` contact spheres per `φ`, meshes `s` on `grid` and reports the
/// refined mesh minima. A sample set smaller than `phis.len() · per_phi`
/// fails the check.
pub fn tangency_report<T: Real>(
    s: &ParamSurface<T>,
    family: &CycloFamily<T>,
    phis: &[T],
    per_phi: usize,
    grid: Grid,
) -> Result<CheckReport> {
    let samples = contact_spheres(s, family, phis, per_phi, &grid)?;
    let mesh = build_mesh(s, grid);
    let spheres: Vec<OrientedSphere<T>> = samples.iter().map(|c| c.sphere).collect();
    let miss = samples.iter().fold(0.0f64, |a, c| a.max(to64(c.contact_miss)));
    let mut r = tangency_residual_refined(s, &mesh, &spheres)
        .with("contact_miss_max", miss)
        .with("phis", phis.len())
        .with("expected_spheres", phis.len() * per_phi);
    if spheres.len() < phis.len() * per_phi {
        r.pass = false;
    }
    Ok(r)
}

/// The field whose reconstruction is `s`, when `s` has one.
pub fn field_of_surface<T: Real>(s: &ParamSurface<T>) -> Option<ScalarField<T>> {
    match &s.kind {
        SurfaceKind::Field(f) => Some(f.clone()),
        SurfaceKind::Block { block, theta, branch } => {
            table_field(block.name(), *theta).ok().map(|f| f.with_branch(*branch).with_guard(s.guard))
        }
        SurfaceKind::Convolution(terms) => {
            let fs: Option<Vec<(T, ScalarField<T>)>> =
                terms.iter().map(|(a, t)| field_of_surface(t).map(|f| (*a, f))).collect();
            fs.map(make_sum)
        }
        SurfaceKind::Ruled(_) => None,
    }
}

/// Ruling family of a surface built from `r1`, `r2` and one rotated `r3`.
pub fn rulings_for<T: Real>(s: &ParamSurface<T>) -> Result<ConvolutionRulings<T>> {
    let mut terms = Vec::new();
    if !flatten(&s.provenance(), 1.0, &mut terms) {
        return Err(Error::ProvenanceMismatch);
    }
    let (mut a1, mut a2, mut a3, mut theta) = (0.0, 0.0, 0.0, None::<f64>);
    for t in terms {
        match t.name.as_str() {
            "r1" if t.theta == 0.0 => a1 += t.w,
            "r2" if t.theta == 0.0 => a2 += t.w,
            "r3" if theta.map_or(true, |th| th == t.theta) => {
                a3 += t.w;
                theta = Some(t.theta);
            }
            _ => return Err(Error::ProvenanceMismatch),
        }
    }
    rulings_of_convolution(lit(a1), lit(a2), lit(a3), lit(theta.unwrap_or(0.0)))
}

/// Named cone family enveloping an unrotated building block.
pub fn preimage_for<T: Real>(s: &ParamSurface<T>) -> Result<CycloFamily<T>> {
    match &s.kind {
        SurfaceKind::Block { block, theta, .. } if *theta == T::zero() => {
            cyclographic_preimage(&block.name().to_uppercase())
        }
        _ => Err(Error::ProvenanceMismatch),
    }
}

/// Exact bilaplacian at `n` seeded random points of `[-half, half]²` kept at
/// least `tolerances::SAFE_MARGIN` from singular points.
pub fn biharmonic_report<T: Real>(f: &ScalarField<T>, seed: u64, n: usize, half: f64) -> Result<CheckReport> {
    let pts = safe_points(seed, n, half, |x, y| {
        to64(f.singular_distance(lit(x), lit(y))) >= tol::SAFE_MARGIN
    });
    let res: Vec<f64> = pts
        .par_iter()
        .map(|&(x, y)| f.bilaplacian(lit(x), lit(y)).map(to64))
        .collect::<Result<_>>()?;
    Ok(CheckReport::from_residuals("biharmonic", &res, tol::BIHARMONIC)
        .with("seed", seed)
        .with("domain_half_width", half))
}

/// Seeded rejection sampling in `[-half, half]²`.
pub fn safe_points(seed: u64, n: usize, half: f64, keep: impl Fn(f64, f64) -> bool) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut tries = 0usize;
    while out.len() < n && tries < 1000 * n.max(1) {
        tries += 1;
        let x = rng.gen_range(-half..half);
        let y = rng.gen_range(-half..half);
        if keep(x, y) {
            out.push((x, y));
        }
    }
    out
}

/// Points where both curvature routes are trustworthy: away from singular
/// points, from the unit circle (where several blocks degenerate) and from
/// the angle cut.
fn curvature_safe<T: Real>(s: &ParamSurface<T>, u: f64, v: f64) -> bool {
    let rho = (u * u + v * v).sqrt();
    to64(s.singular_distance_surface(lit(u), lit(v))) >= 0.3
        && (rho - 1.0).abs() >= 0.2
        && !(u < 0.0 && v.abs() < 0.05)
        && s.frame(lit(u), lit(v)).map(|f| to64(f.ru.cross(&f.rv).norm()) > 1e-3).unwrap_or(false)
}

/// Jet curvatures against finite-difference fundamental forms; the residual
/// is `max(|ΔH|, |ΔK|) / max(1, |H|, |K|)`.
pub fn curvature_report<T: Real>(s: &ParamSurface<T>, seed: u64, n: usize) -> Result<CheckReport> {
    let pts = safe_points(seed, n, 2.0, |u, v| curvature_safe(s, u, v));
    let h = lit::<T>(tol::CURVATURE_FD_STEP);
    let res: Vec<f64> = pts
        .iter()
        .map(|&(u, v)| {
            let (uu, vv) = (lit::<T>(u), lit::<T>(v));
            let (h1, k1) = curvatures(s, uu, vv)?;
            let (h2, k2) = curvatures_fd(s, uu, vv, h)?;
            let scale = to64(h1.abs().max(k1.abs())).max(1.0);
            Ok(to64((h1 - h2).abs().max((k1 - k2).abs())) / scale)
        })
        .collect::<Result<_>>()?;
    Ok(CheckReport::from_residuals("curvature", &res, tol::CURVATURE_REL)
        .with("seed", seed)
        .with("fd_step", tol::CURVATURE_FD_STEP))
}

/// Seeded bumps inside the stationarity window.
pub fn random_bumps(seed: u64, n: usize) -> Vec<Bump> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Bump {
            cx: rng.gen_range(tol::BUMP_U.0..tol::BUMP_U.1),
            cy: rng.gen_range(tol::BUMP_V.0..tol::BUMP_V.1),
            radius: tol::BUMP_RADIUS,
            amplitude: 1.0,
        })
        .collect()
}

/// `|dΩ(F)| / |dΩ(x⁴)|` over random bumps.
pub fn stationarity_report<T: Real>(f: &ScalarField<T>, seed: u64, n: usize) -> Result<CheckReport> {
    let control = make_polynomial::<T>(vec![(T::one(), 4, 0)]);
    let mut ratios = Vec::new();
    let mut worst_abs = 0.0f64;
    for b in random_bumps(seed, n) {
        let d = to64(first_variation(f, &b)?);
        let c = to64(first_variation(&control, &b)?);
        worst_abs = worst_abs.max(d.abs() / b.l2_norm());
        ratios.push(d.abs() / c.abs());
    }
    Ok(CheckReport::from_residuals("stationarity", &ratios, tol::STATIONARITY_RATIO)
        .with("seed", seed)
        .with("max_abs_over_l2", worst_abs))
}
