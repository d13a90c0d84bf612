//! Building blocks of L-minimal surfaces in Gauss coordinates, the fields of
//! their isotropic images, convolutions, the ruled family, rulings of
//! convolutions and cyclographic preimages (lines of spheres in R⁴).

use serde::{Deserialize, Serialize};

use crate::biharmonic::{
    make_elliptic_field, make_hyperbolic_field, make_parabolic_field, make_polynomial, make_sum,
    parse_field, parse_number,
    EllipticCoeffs, HyperbolicCoeffs, ParabolicCoeffs, ScalarField,
};
use crate::error::{Error, Result};
use crate::geom::{Line3, OrientedSphere, Vec3};
use crate::jet::Jet;
use crate::reconstruct::{reconstruct_surface, ParamSurface, SurfaceKind};
use crate::scalar::{lit, Real};

/// Closed-form building blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
    R9,
    R10,
    R11,
}

pub const ALL_BLOCKS: [Block; 11] = [
    Block::R1,
    Block::R2,
    Block::R3,
    Block::R4,
    Block::R5,
    Block::R6,
    Block::R7,
    Block::R8,
    Block::R9,
    Block::R10,
    Block::R11,
];

/// Blocks defined only through their fields.
pub const TILDE_BLOCKS: [&str; 4] = ["r1~", "r3~", "r4~", "r6~"];

impl Block {
    pub fn name(&self) -> &'static str {
        match self {
            Block::R1 => "r1",
            Block::R2 => "r2",
            Block::R3 => "r3",
            Block::R4 => "r4",
            Block::R5 => "r5",
            Block::R6 => "r6",
            Block::R7 => "r7",
            Block::R8 => "r8",
            Block::R9 => "r9",
            Block::R10 => "r10",
            Block::R11 => "r11",
        }
    }

    pub fn from_name(s: &str) -> Result<Block> {
        ALL_BLOCKS
            .iter()
            .copied()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }

    pub fn has_angle(&self) -> bool {
        matches!(self, Block::R1 | Block::R2)
    }

    pub fn singular_at_origin(&self) -> bool {
        matches!(self, Block::R1 | Block::R2 | Block::R3 | Block::R4 | Block::R5 | Block::R6)
    }
}

/// Evaluates a block on jet arguments; the polar angle uses branch `k`.
pub fn block_eval<T: Real>(b: Block, u: &Jet<T>, v: &Jet<T>, k: i64) -> [Jet<T>; 3] {
    let (u, v) = (*u, *v);
    let two = lit::<T>(2.0);
    let uu = u * u;
    let vv = v * v;
    let q = uu + vv;
    let angle = || Jet::atan2(&v, &u) + T::PI() * lit::<T>(k as f64);
    let one = |j: Jet<T>| j * T::zero() + T::one();
    match b {
        Block::R1 => {
            let iq = q.recip();
            [v - v * iq, u * iq - u, angle().scale(two)]
        }
        Block::R2 => {
            let iq = q.recip();
            [angle() - u * v * iq, uu * iq, u * T::zero()]
        }
        Block::R3 => {
            let iq = q.recip();
            let w = one(q) - iq;
            [-(u * vv * w * iq), uu * v * w * iq, uu * iq]
        }
        Block::R4 => {
            let iq = q.recip();
            [u + u * iq, v + v * iq, q.ln()]
        }
        Block::R5 => {
            let w = one(q) - q.recip();
            [(uu - vv) * w - q.ln(), (u * v * w).scale(two), u.scale(lit(4.0))]
        }
        Block::R6 => {
            let w = one(q) - q.recip();
            let w2 = w * w;
            [(uu - vv) * w2, (u * v * w2).scale(two), (u * w).scale(lit(4.0))]
        }
        _ => {
            let den = (q + T::one()).recip();
            let [x, y, z] = parabolic_numerators(b, &u, &v);
            [x * den, y * den, z * den]
        }
    }
}

fn parabolic_numerators<T: Real>(b: Block, u: &Jet<T>, v: &Jet<T>) -> [Jet<T>; 3] {
    let (u, v) = (*u, *v);
    let c = |s: f64| lit::<T>(s);
    let u2 = u * u;
    let v2 = v * v;
    match b {
        Block::R7 => [-u - u * v2, u2 * v, u2],
        Block::R8 => {
            let u3 = u2 * u;
            [u2 * u2 - (u2 * v2).scale(c(3.0)) - u2.scale(c(3.0)), (u3 * v).scale(c(4.0)), u3.scale(c(4.0))]
        }
        Block::R9 => [
            (u * v * (u2 - v2 - T::one())).scale(c(2.0)),
            u2 * (v2.scale(c(3.0)) - u2 - T::one()),
            (u2 * v).scale(c(4.0)),
        ],
        Block::R10 => {
            let u3 = u2 * u;
            [
                u3 * u2 - u3 * (v2.scale(c(4.0)) + T::one()).scale(c(2.0)) + (u * (v2 + v2 * v2)).scale(c(3.0)),
                (u2 * v * (u2.scale(c(2.0)) - v2.scale(c(2.0)) + T::one())).scale(c(3.0)),
                (u2 * (u2 - v2.scale(c(3.0)))).scale(c(3.0)),
            ]
        }
        Block::R11 => {
            let u3 = u2 * u;
            let u4 = u2 * u2;
            [
                (u4 * u2).scale(c(3.0)) - (u4 * (v2.scale(c(6.0)) + T::one())).scale(c(5.0))
                    + (u2 * (v2 + v2 * v2)).scale(c(15.0)),
                (u3 * v * (u2.scale(c(9.0)) - v2.scale(c(15.0)) + c(5.0))).scale(c(2.0)),
                (u3 * (u2 - v2.scale(c(5.0)))).scale(c(8.0)),
            ]
        }
        _ => unreachable!("not a parabolic block"),
    }
}

/// Building block by name: `r1`..`r11` or a tilde block `r1~`, `r3~`, `r4~`, `r6~`.
pub fn building_block<T: Real>(name: &str, theta: T) -> Result<ParamSurface<T>> {
    if let Some(base) = name.strip_suffix('~') {
        if !TILDE_BLOCKS.contains(&name) {
            return Err(Error::UnknownName(name.to_string()));
        }
        let f = table_field(name, theta)?;
        if base == "r1" && theta != T::zero() {
            // rotating the angle term shifts it by −θ, adding a sphere term
            let k = -theta / (lit::<T>(2.0) * lit::<T>(2f64.sqrt()));
            let sphere = make_polynomial(vec![(k, 2, 0), (k, 0, 2), (-lit::<T>(2.0) * k, 0, 0)]);
            return Ok(reconstruct_surface(&make_sum(vec![(T::one(), f), (T::one(), sphere)])));
        }
        // r4~ is rotationally symmetric
        return Ok(reconstruct_surface(&f));
    }
    let block = Block::from_name(name)?;
    Ok(ParamSurface::new(SurfaceKind::Block { block, theta, branch: 0 }))
}

/// Field of the left column of the classification tables for a surface name.
///
/// `θ` applies to the rotated rows (`r3`, `r3~`, `r6`, `r6~`, `r7`).
pub fn table_field<T: Real>(name: &str, theta: T) -> Result<ScalarField<T>> {
    let (s, c) = theta.sin_cos();
    let l = |v: f64| lit::<T>(v);
    let z = T::zero();
    let s2 = l(2f64.sqrt());
    let zero3 = [z; 3];
    let f = match name {
        "r1" => make_elliptic_field(EllipticCoeffs::new([l(1.0), z, l(-1.0), z], zero3, zero3, [z; 2])),
        "r1~" => make_elliptic_field(EllipticCoeffs::new(
            [T::one() / (l(2.0) * s2), z, -T::one() / s2, z],
            zero3,
            zero3,
            [z; 2],
        )),
        "r2" => make_elliptic_field(EllipticCoeffs::new([z, l(-1.0), z, z], zero3, zero3, [z; 2])),
        "r3" => {
            let h = l(0.5);
            make_elliptic_field(EllipticCoeffs::new(
                [z; 4],
                [-s * s * h, -s * c, -c * c * h],
                [s * s * h, s * c, c * c * h],
                [z; 2],
            ))
        }
        "r3~" => {
            let k = T::one() / (l(4.0) * s2);
            make_elliptic_field(EllipticCoeffs::new(
                [z; 4],
                [-l(2.0) * s * s * k, -l(4.0) * s * c * k, -l(2.0) * c * c * k],
                [s * s * k, l(2.0) * s * c * k, c * c * k],
                [z; 2],
            ))
        }
        "r4" => make_hyperbolic_field(HyperbolicCoeffs {
            gamma: [l(-1.0), l(-1.0), l(-1.0), l(1.0)],
            ..Default::default()
        }),
        "r4~" => {
            let k = T::one() / (l(4.0) * s2);
            let ln2 = l(2f64.ln());
            make_hyperbolic_field(HyperbolicCoeffs {
                gamma: [
                    l(2.0) * (l(2.0) + ln2) * k - s2,
                    -(l(2.0) + ln2) * k,
                    l(-4.0) * k,
                    l(2.0) * k,
                ],
                ..Default::default()
            })
        }
        "r5" => make_hyperbolic_field(HyperbolicCoeffs {
            alpha: [l(-1.0), l(2.0), z, l(1.0)],
            ..Default::default()
        }),
        "r6" => make_hyperbolic_field(HyperbolicCoeffs {
            alpha: [l(-2.0) * c, z, c, c],
            beta: [l(-2.0) * s, z, s, s],
            ..Default::default()
        }),
        "r6~" => make_hyperbolic_field(HyperbolicCoeffs {
            alpha: [-c, z, c, c * l(0.25)],
            beta: [-s, z, s, s * l(0.25)],
            ..Default::default()
        }),
        "r7" => make_parabolic_field(ParabolicCoeffs {
            alpha: [s * s * l(0.5), z, z, z],
            beta: [z, s * c, z, z],
            gamma: [z, z, c * c * l(0.5), z],
        }),
        "r8" => make_parabolic_field(ParabolicCoeffs { gamma: [z, z, z, l(1.0)], ..Default::default() }),
        "r9" => make_parabolic_field(ParabolicCoeffs { beta: [z, z, l(1.0), z], ..Default::default() }),
        "xy2" => make_parabolic_field(ParabolicCoeffs { alpha: [z, l(1.0), z, z], ..Default::default() }),
        "r10" => make_parabolic_field(ParabolicCoeffs { alpha: [z, z, l(-1.5), z], ..Default::default() }),
        "r11" => make_parabolic_field(ParabolicCoeffs { alpha: [z, z, z, l(-5.0)], ..Default::default() }),
        _ => return Err(Error::UnknownName(name.to_string())),
    };
    Ok(f)
}

/// One row of the classification tables.
#[derive(Clone, Debug)]
pub struct TableRow<T> {
    pub table: u8,
    pub label: &'static str,
    pub field: ScalarField<T>,
    /// The surface the row names, in the same Gauss coordinates.
    pub surface: ParamSurface<T>,
    /// False for the cycloid, which is compared as a point locus only.
    pub immersed: bool,
}

/// Rows of the three tables whose surface has an independent closed form.
///
/// The `x y²` row is listed against `r9` rotated by `π/2`; the field whose
/// reconstruction is that rotated block is `−x y²`, so the row carries the
/// coefficient `−1`.
pub fn table_rows<T: Real>(theta: T) -> Result<Vec<TableRow<T>>> {
    let blk = |name: &str, th: T| building_block::<T>(name, th);
    let z = T::zero();
    let half_pi = lit::<T>(std::f64::consts::FRAC_PI_2);
    let rows = vec![
        (3, "r1", table_field("r1", z)?, blk("r1", z)?, true),
        (3, "r2", table_field("r2", z)?, blk("r2", z)?, false),
        (3, "r3", table_field("r3", theta)?, blk("r3", theta)?, true),
        (4, "r4", table_field("r4", z)?, blk("r4", z)?, true),
        (4, "r5", table_field("r5", z)?, blk("r5", z)?, true),
        (4, "r6", table_field("r6", theta)?, blk("r6", theta)?, true),
        (5, "r7", table_field("r7", theta)?, blk("r7", theta)?, true),
        (5, "r8", table_field("r8", z)?, blk("r8", z)?, true),
        (5, "r9", table_field("r9", z)?, blk("r9", z)?, true),
        (
            5,
            "xy2",
            table_field("xy2", z)?,
            convolve(vec![(-T::one(), blk("r9", half_pi)?)])?,
            true,
        ),
        (5, "r10", table_field("r10", z)?, blk("r10", z)?, true),
        (5, "r11", table_field("r11", z)?, blk("r11", z)?, true),
    ];
    Ok(rows
        .into_iter()
        .map(|(table, label, field, surface, immersed)| TableRow { table, label, field, surface, immersed })
        .collect())
}

/// Pointwise sum `Σ aᵢ rᵢ(u, v)` of surfaces in Gauss coordinates.
pub fn convolve<T: Real>(terms: Vec<(T, ParamSurface<T>)>) -> Result<ParamSurface<T>> {
    if terms.is_empty() {
        return Err(Error::DomainMismatch);
    }
    if terms.iter().any(|(_, s)| !s.gauss_coordinates()) {
        return Err(Error::DomainMismatch);
    }
    Ok(ParamSurface::new(SurfaceKind::Convolution(terms)))
}

/// `R(φ, λ) = (Aφ, Bφ, Cφ + D cos 2φ) + λ(sin φ, cos φ, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuledPatch<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> RuledPatch<T> {
    /// False when `C = D = 0`, where the surface is not L-minimal.
    pub fn is_l_minimal(&self) -> bool {
        self.c != T::zero() || self.d != T::zero()
    }

    pub fn at(&self, phi: T, lambda: T) -> Vec3<T> {
        let (s, c) = phi.sin_cos();
        let two = lit::<T>(2.0);
        Vec3::new(
            self.a * phi + lambda * s,
            self.b * phi + lambda * c,
            self.c * phi + self.d * (two * phi).cos(),
        )
    }

    /// The ruling at `φ`.
    pub fn ruling(&self, phi: T) -> Line3<T> {
        let (s, c) = phi.sin_cos();
        Line3 { p: self.at(phi, T::zero()), d: Vec3::new(s, c, T::zero()) }
    }

    pub fn eval_on(&self, phi: &Jet<T>, lambda: &Jet<T>) -> [Jet<T>; 3] {
        let two = lit::<T>(2.0);
        [
            phi.scale(self.a) + *lambda * phi.sin(),
            phi.scale(self.b) + *lambda * phi.cos(),
            phi.scale(self.c) + phi.scale(two).cos().scale(self.d),
        ]
    }
}

pub fn ruled_surface<T: Real>(a: T, b: T, c: T, d: T) -> RuledPatch<T> {
    RuledPatch { a, b, c, d }
}

/// Rulings of `a1 r1 ⊕ a2 r2 ⊕ a3 r3^θ`.
///
/// At parameter `φ` the ruling is
/// `a1 (0, 0, −2φ) + a2 (−φ, 0, 0) + a3 R^θ (0, 0, (cos 2(φ+θ) + 1)/2)
///  + λ (sin φ, cos φ, 0)`; its Gauss-coordinate preimage is the ray
/// `s (cos φ, −sin φ)`, `s > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionRulings<T> {
    pub a1: T,
    pub a2: T,
    pub a3: T,
    pub theta: T,
}

impl<T: Real> ConvolutionRulings<T> {
    pub fn base(&self, phi: T) -> Vec3<T> {
        let two = lit::<T>(2.0);
        let p = phi + self.theta;
        let z3 = ((two * p).cos() + T::one()) * lit(0.5);
        Vec3::new(-self.a2 * phi, T::zero(), -two * self.a1 * phi + self.a3 * z3)
    }

    pub fn direction(&self, phi: T) -> Vec3<T> {
        let (s, c) = phi.sin_cos();
        Vec3::new(s, c, T::zero())
    }

    pub fn at(&self, phi: T, lambda: T) -> Vec3<T> {
        self.base(phi) + self.direction(phi) * lambda
    }

    /// The surface these rulings lie on.
    pub fn surface(&self) -> Result<ParamSurface<T>> {
        convolve(vec![
            (self.a1, building_block("r1", T::zero())?),
            (self.a2, building_block("r2", T::zero())?),
            (self.a3, building_block("r3", self.theta)?),
        ])
    }
}

pub fn rulings_of_convolution<T: Real>(a1: T, a2: T, a3: T, theta: T) -> Result<ConvolutionRulings<T>> {
    if a1 == T::zero() && a3 == T::zero() {
        return Err(Error::DegenerateFamily);
    }
    Ok(ConvolutionRulings { a1, a2, a3, theta })
}

/// A line `base + λ dir` in R⁴ = (center, signed radius): a cone as a
/// one-parameter family of oriented spheres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycloLine<T> {
    pub base: [T; 4],
    pub dir: [T; 4],
}

impl<T: Real> CycloLine<T> {
    pub fn sphere(&self, lambda: T) -> OrientedSphere<T> {
        let p: Vec<T> = (0..4).map(|i| self.base[i] + lambda * self.dir[i]).collect();
        OrientedSphere { m: Vec3::new(p[0], p[1], p[2]), r: p[3] }
    }
}

/// Spheres of the cone at the given line parameters.
pub fn cone_spheres<T: Real>(l: &CycloLine<T>, lambdas: &[T]) -> Vec<OrientedSphere<T>> {
    lambdas.iter().map(|&t| l.sphere(t)).collect()
}

/// Named cyclographic preimages.
pub const PREIMAGE_NAMES: [&str; 15] = [
    "R1", "R2", "R3", "R4", "R5", "R6", "R7", "R7e", "R8", "R9", "R9b", "R10", "R11", "R1~", "R3~",
];

/// A one-parameter family of cones `φ ↦ CycloLine`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CycloFamily<T> {
    Named(String),
    /// `(Aφ, Bφ, Cφ + D cos 2φ, Eφ + F cos 2φ + G sin 2φ) + λ(sin φ, cos φ, 0, 0)`.
    Elliptic([T; 7]),
    /// `(Aφ + B cosh 2φ, Cφ + D cosh 2φ + E sinh 2φ, Fφ, Gφ) + λ(0, 0, cosh φ, sinh φ)`.
    Hyperbolic([T; 7]),
    /// Polynomial base with `λ(1, 0, −φ, φ)`.
    Parabolic([T; 7]),
}

impl<T: Real> CycloFamily<T> {
    pub fn line(&self, phi: T) -> Result<CycloLine<T>> {
        let z = T::zero();
        let one = T::one();
        let l = |v: f64| lit::<T>(v);
        let (s, c) = phi.sin_cos();
        let ell = [s, c, z, z];
        let hyp = [z, z, phi.cosh(), phi.sinh()];
        let par = [one, z, -phi, phi];
        let p2 = phi * phi;
        let p3 = p2 * phi;
        let s2 = l(2f64.sqrt());
        let (base, dir) = match self {
            CycloFamily::Named(name) => match name.as_str() {
                "R1" => ([z, z, l(-2.0) * phi, z], ell),
                "R2" => ([-phi, z, z, z], ell),
                "R3" => ([z, z, ((l(2.0) * phi).cos() + one) * l(0.5), z], ell),
                "R4" => ([z, z, l(-2.0) * phi, l(-2.0)], hyp),
                "R5" => ([one - (l(-2.0) * phi).exp() + l(2.0) * phi, z, z, z], hyp),
                "R6" => ([l(2.0) - l(2.0) * (l(2.0) * phi).cosh(), z, z, z], hyp),
                "R7" => ([z, z, -p2 * l(0.5), p2 * l(0.5)], par),
                "R7e" => ([z, z, c * c * l(0.5), c * c * l(0.5)], ell),
                "R8" => ([z, z, -p3, p3], par),
                "R9" => ([z, -p2, z, z], par),
                "R9b" => ([z, z, phi + p3, phi - p3], [z, one, -phi, phi]),
                "R10" => {
                    let q = p2 * p2 * l(4.0);
                    ([z, z, (l(-3.0) * p2 - q) * l(0.5), (l(-3.0) * p2 + q) * l(0.5)], par)
                }
                "R11" => {
                    let q = p3 * p2 * l(6.0);
                    ([z, z, l(-5.0) * p3 - q, l(-5.0) * p3 + q], par)
                }
                "R1~" => {
                    let k = one / (l(2.0) * s2);
                    ([z, z, l(-3.0) * phi * k, phi * k], ell)
                }
                "R3~" => {
                    let k = c * c / (l(4.0) * s2);
                    ([z, z, l(3.0) * k, -k], ell)
                }
                _ => return Err(Error::UnknownName(name.clone())),
            },
            CycloFamily::Elliptic(k) => {
                let (c2, s2p) = ((l(2.0) * phi).cos(), (l(2.0) * phi).sin());
                (
                    [k[0] * phi, k[1] * phi, k[2] * phi + k[3] * c2, k[4] * phi + k[5] * c2 + k[6] * s2p],
                    ell,
                )
            }
            CycloFamily::Hyperbolic(k) => {
                let (ch, sh) = ((l(2.0) * phi).cosh(), (l(2.0) * phi).sinh());
                (
                    [k[0] * phi + k[1] * ch, k[2] * phi + k[3] * ch + k[4] * sh, k[5] * phi, k[6] * phi],
                    hyp,
                )
            }
            CycloFamily::Parabolic(k) => {
                let p4 = p2 * p2;
                let p5 = p4 * phi;
                let f3 = k[5] * (l(3.0) * p2 + l(4.0) * p4) + k[6] * (l(5.0) * p3 + l(6.0) * p5);
                let f4 = k[5] * (l(3.0) * p2 - l(4.0) * p4) + k[6] * (l(5.0) * p3 - l(6.0) * p5);
                (
                    [
                        z,
                        k[0] * phi + k[1] * p2,
                        k[2] * phi + k[3] * p2 + k[4] * p3 + f3,
                        k[2] * phi - k[3] * p2 - k[4] * p3 + f4,
                    ],
                    par,
                )
            }
        };
        Ok(CycloLine { base, dir })
    }
}

/// Family by name (see [`PREIMAGE_NAMES`]).
pub fn cyclographic_preimage<T: Real>(name: &str) -> Result<CycloFamily<T>> {
    if PREIMAGE_NAMES.contains(&name) {
        Ok(CycloFamily::Named(name.to_string()))
    } else {
        Err(Error::UnknownName(name.to_string()))
    }
}

/// The surface enveloped by the cones of a named preimage.
pub fn preimage_surface<T: Real>(name: &str) -> Result<ParamSurface<T>> {
    let z = T::zero();
    let block = match name {
        "R7e" => "r7",
        "R9b" => "r9",
        "R1~" => "r1~",
        "R3~" => "r3~",
        other if PREIMAGE_NAMES.contains(&other) => return building_block(&other.to_lowercase(), z),
        other => return Err(Error::UnknownName(other.to_string())),
    };
    building_block(block, z)
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_block_term<T: Real>(s: &str) -> Result<ParamSurface<T>> {
    let (name, theta) = match s.split_once('@') {
        Some((n, rest)) => {
            let v = rest
                .trim()
                .strip_prefix("theta")
                .and_then(|r| r.trim_start().strip_prefix('='))
                .ok_or_else(|| Error::Parse(format!("expected `@theta=` in `{s}`")))?;
            (n.trim(), parse_number(v)?)
        }
        None => (s.trim(), 0.0),
    };
    building_block(name, lit(theta))
}

/// Parses `r1`, `r3@theta=0.5`, `r3~@theta=0.5`, `ruled(A,B,C,D)`,
/// `conv(1.0*r1, 0.5*r2, 0.3*r3@theta=0.4)` or `field:<field>`.
pub fn parse_surface<T: Real>(spec: &str) -> Result<ParamSurface<T>> {
    let s = spec.trim();
    if let Some(f) = s.strip_prefix("field:") {
        return Ok(reconstruct_surface(&parse_field::<T>(f)?));
    }
    let inner = |prefix: &str| {
        s.strip_prefix(prefix)
            .map(|r| r.trim_start())
            .and_then(|r| r.strip_prefix('('))
            .and_then(|r| r.trim_end().strip_suffix(')'))
    };
    if let Some(args) = inner("ruled") {
        let v: Vec<f64> = split_top_level(args).into_iter().map(parse_number).collect::<Result<_>>()?;
        if v.len() != 4 {
            return Err(Error::Parse("ruled takes four numbers".into()));
        }
        let p = ruled_surface(lit(v[0]), lit(v[1]), lit(v[2]), lit(v[3]));
        return Ok(ParamSurface::new(SurfaceKind::Ruled(p)));
    }
    if let Some(args) = inner("conv") {
        let mut terms = Vec::new();
        for t in split_top_level(args) {
            let t = t.trim();
            // the weight ends at the first `*` followed by a block name
            let star = t
                .char_indices()
                .find(|&(i, ch)| ch == '*' && t[i + 1..].trim_start().starts_with('r'))
                .map(|(i, _)| i);
            let (w, b) = match star {
                Some(i) => (parse_number(&t[..i])?, &t[i + 1..]),
                None => (1.0, t),
            };
            terms.push((lit::<T>(w), parse_block_term(b)?));
        }
        return convolve(terms);
    }
    parse_block_term(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isotropic::stereo;
    use std::f64::consts::PI;

    fn close(a: Vec3<f64>, b: Vec3<f64>, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn block_examples() {
        let r1 = building_block::<f64>("r1", 0.0).unwrap();
        assert!(close(r1.point(1.0, 1.0).unwrap(), Vec3::new(0.5, -0.5, PI / 2.0), 1e-15));
        let r3 = building_block::<f64>("r3", 0.0).unwrap();
        assert!(close(r3.point(1.0, 1.0).unwrap(), Vec3::new(-0.25, 0.25, 0.5), 1e-15));
        let r4 = building_block::<f64>("r4", 0.0).unwrap();
        assert!(close(r4.point(1.0, 0.0).unwrap(), Vec3::new(2.0, 0.0, 0.0), 1e-15));
        assert!(matches!(building_block::<f64>("r12", 0.0), Err(Error::UnknownName(_))));
        assert!(matches!(r1.point(0.0, 0.0), Err(Error::SingularPoint { .. })));
    }

    #[test]
    fn conv_examples() {
        let c = parse_surface::<f64>("conv(1*r1, 1*r3)").unwrap();
        assert!(close(c.point(1.0, 1.0).unwrap(), Vec3::new(0.25, -0.25, PI / 2.0 + 0.5), 1e-15));
        let id = parse_surface::<f64>("conv(1*r1, 0*r2)").unwrap();
        let r1 = building_block::<f64>("r1", 0.0).unwrap();
        assert_eq!(id.point(0.4, -1.3).unwrap(), r1.point(0.4, -1.3).unwrap());
    }

    #[test]
    fn gauss_identity_spot_checks() {
        for name in ["r1", "r3", "r4", "r5", "r6", "r7", "r8", "r9", "r10", "r11", "r1~", "r3~", "r4~", "r6~"] {
            let s = building_block::<f64>(name, 0.3).unwrap();
            for &(u, v) in &[(0.7, 1.3), (-1.1, 0.4), (1.7, -0.6)] {
                let (a, b) = stereo(&s.normal(u, v).unwrap());
                assert!((a - u).abs() < 1e-9 && (b - v).abs() < 1e-9, "{name} at {u},{v}");
            }
        }
    }

    #[test]
    fn rotated_table_rows_match() {
        for row in table_rows::<f64>(0.7).unwrap() {
            let r = reconstruct_surface(&row.field);
            for &(u, v) in &[(0.7, 1.3), (-1.1, 0.4), (1.7, -0.6)] {
                let d = (r.point(u, v).unwrap() - row.surface.point(u, v).unwrap()).norm();
                assert!(d < 1e-10, "{} at {u},{v}: {d}", row.label);
            }
        }
    }

    #[test]
    fn ruled_examples() {
        let p = ruled_surface(0.0, 0.0, 1.0, 1.0);
        let l = p.ruling(0.0);
        assert_eq!(l.p, Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(l.d, Vec3::new(0.0, 1.0, 0.0));
        assert!(!ruled_surface(0.0, 0.0, 0.0, 0.0).is_l_minimal());
        let h = rulings_of_convolution(1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(close(h.base(PI / 2.0), Vec3::new(0.0, 0.0, -PI), 1e-15));
        assert!(close(h.direction(PI / 2.0), Vec3::new(1.0, 0.0, 0.0), 1e-15));
        assert_eq!(rulings_of_convolution(0.0, 1.0, 0.0, 0.0), Err(Error::DegenerateFamily));
    }

    #[test]
    fn helicoid_period() {
        let h = rulings_of_convolution(1.0, 0.0, 0.0, 0.0).unwrap();
        for &(phi, lam) in &[(0.3, 1.0), (-1.2, -0.5)] {
            let a = h.at(phi + PI, -lam);
            let b = h.at(phi, lam) + Vec3::new(0.0, 0.0, -2.0 * PI);
            assert!(close(a, b, 1e-14));
        }
    }

    #[test]
    fn preimage_examples() {
        let r4 = cyclographic_preimage::<f64>("R4").unwrap().line(0.0).unwrap();
        assert_eq!(r4.base, [0.0, 0.0, 0.0, -2.0]);
        assert_eq!(r4.dir, [0.0, 0.0, 1.0, 0.0]);
        let r7 = cyclographic_preimage::<f64>("R7").unwrap().line(1.0).unwrap();
        assert_eq!(r7.base, [0.0, 0.0, -0.5, 0.5]);
        assert_eq!(r7.dir, [1.0, 0.0, -1.0, 1.0]);
        let e = CycloFamily::Elliptic([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).line(0.8).unwrap();
        assert_eq!(e.base, [0.0, 0.0, 0.8, 0.0]);
        assert!(cyclographic_preimage::<f64>("R99").is_err());
    }

    #[test]
    fn cone_sphere_examples() {
        let l = CycloLine { base: [0.0, 0.0, 0.0, -2.0], dir: [0.0, 0.0, 1.0, 0.0] };
        let s = cone_spheres(&l, &[0.0, 1.0]);
        assert_eq!(s[0], OrientedSphere { m: Vec3::new(0.0, 0.0, 0.0), r: -2.0 });
        assert_eq!(s[1], OrientedSphere { m: Vec3::new(0.0, 0.0, 1.0), r: -2.0 });
    }

    #[test]
    fn surface_grammar() {
        assert!(parse_surface::<f64>("r3@theta=0.5").is_ok());
        assert!(parse_surface::<f64>("r3~@theta=pi/4").is_ok());
        assert!(parse_surface::<f64>("ruled(0,0,1,1/2)").is_ok());
        assert!(parse_surface::<f64>("conv(1.0*r1, 0.5*r2, 0.3*r3@theta=0.4)").is_ok());
        assert!(parse_surface::<f64>("field:elliptic(a1=1,a3=-1)").is_ok());
        assert!(parse_surface::<f64>("r3@phi=1").is_err());
        assert!(parse_surface::<f64>("q7").is_err());
    }
}
