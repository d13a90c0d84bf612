//! Euclidean-model primitives: oriented planes and spheres, contact elements,
//! lines, and the transformation Λ.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Normals shorter than this are rejected.
pub const NORMAL_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Vec3 { x, y, z }
    }

    pub fn zero() -> Self {
        Vec3::new(T::zero(), T::zero(), T::zero())
    }

    pub fn dot(&self, o: &Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Self) -> Self {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn dist(&self, o: &Self) -> T {
        (*self - *o).norm()
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Rotation by `theta` about the z-axis (counterclockwise).
    pub fn rotate_z(&self, theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Vec3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Plane `n·p + h = 0` with positive unit normal `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedPlane<T> {
    pub n: Vec3<T>,
    pub h: T,
}

impl<T: Real> OrientedPlane<T> {
    /// Signed distance of `p` from the plane.
    pub fn eval(&self, p: &Vec3<T>) -> T {
        self.n.dot(p) + self.h
    }
}

/// Sphere with center `m` and signed radius `r` (`r = 0` is a point).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedSphere<T> {
    pub m: Vec3<T>,
    pub r: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactElement<T> {
    pub point: Vec3<T>,
    pub plane: OrientedPlane<T>,
}

/// Line through `p` with unit direction `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line3<T> {
    pub p: Vec3<T>,
    pub d: Vec3<T>,
}

impl<T: Real> Line3<T> {
    /// Normalizes the direction; fails on a zero direction.
    pub fn new(p: Vec3<T>, d: Vec3<T>) -> Result<Self> {
        let len = d.norm();
        if len <= lit(NORMAL_EPS) {
            return Err(Error::ZeroNormal);
        }
        Ok(Line3 { p, d: d * (T::one() / len) })
    }

    pub fn at(&self, t: T) -> Vec3<T> {
        self.p + self.d * t
    }
}

/// Divides `(a, h0)` by `|a|`, keeping the orientation of the input.
pub fn hesse_normalize<T: Real>(a: Vec3<T>, h0: T) -> Result<OrientedPlane<T>> {
    let len = a.norm();
    if len <= lit(NORMAL_EPS) {
        return Err(Error::ZeroNormal);
    }
    let inv = T::one() / len;
    Ok(OrientedPlane { n: a * inv, h: h0 * inv })
}

/// Tangent plane of `s` with outer normal `n` and its contact point.
///
/// Convention: the plane offset is `R - n·m` and the contact point is `m - R n`.
pub fn sphere_tangent_plane<T: Real>(s: &OrientedSphere<T>, n: Vec3<T>) -> ContactElement<T> {
    ContactElement {
        point: s.m - n * s.r,
        plane: OrientedPlane { n, h: s.r - n.dot(&s.m) },
    }
}

/// The Laguerre transformation Λ: `(n1, n2, n3, h) ↦ (n1, n2, (3 n3 + 1)/2, h)`
/// followed by sign-preserving normalization.
pub fn lambda_transform<T: Real>(p: &OrientedPlane<T>) -> Result<OrientedPlane<T>> {
    let n3 = (lit::<T>(3.0) * p.n.z + T::one()) * lit(0.5);
    hesse_normalize(Vec3::new(p.n.x, p.n.y, n3), p.h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    #[test]
    fn hesse_examples() {
        let p = hesse_normalize(v(0.0, 0.0, 2.0), 1.0).unwrap();
        assert_eq!(p.n, v(0.0, 0.0, 1.0));
        assert_eq!(p.h, 0.5);
        let p = hesse_normalize(v(1.0, 0.0, 0.0), 0.0).unwrap();
        assert_eq!(p.n, v(1.0, 0.0, 0.0));
        assert_eq!(p.h, 0.0);
        assert_eq!(hesse_normalize(v(0.0, 0.0, 0.0), 1.0), Err(Error::ZeroNormal));
    }

    #[test]
    fn hesse_keeps_orientation() {
        let p = hesse_normalize(v(0.0, 0.0, -3.0), 6.0).unwrap();
        assert_eq!(p.n, v(0.0, 0.0, -1.0));
        assert_eq!(p.h, 2.0);
    }

    #[test]
    fn tangent_plane_examples() {
        let s = OrientedSphere { m: v(0.0, 0.0, 0.0), r: 1.0 };
        let c = sphere_tangent_plane(&s, v(0.0, 0.0, 1.0));
        assert_eq!(c.point, v(0.0, 0.0, -1.0));
        assert_eq!(c.plane.h, 1.0);

        let s = OrientedSphere { m: v(0.0, 0.0, 0.0), r: 0.0 };
        let c = sphere_tangent_plane(&s, v(0.6, 0.0, 0.8));
        assert_eq!(c.point, v(0.0, 0.0, 0.0));
        assert_eq!(c.plane.h, 0.0);

        let s = OrientedSphere { m: v(1.0, 0.0, 0.0), r: 2.0 };
        let c = sphere_tangent_plane(&s, v(1.0, 0.0, 0.0));
        assert_eq!(c.point, v(-1.0, 0.0, 0.0));
        assert_eq!(c.plane.h, 1.0);
        assert!(c.plane.eval(&c.point).abs() < 1e-15);
    }

    #[test]
    fn lambda_examples() {
        let p = lambda_transform(&OrientedPlane { n: v(0.0, 0.0, 1.0), h: 1.0 }).unwrap();
        assert_eq!(p.n, v(0.0, 0.0, 1.0));
        assert_eq!(p.h, 0.5);

        let p = lambda_transform(&OrientedPlane { n: v(1.0, 0.0, 0.0), h: 0.0 }).unwrap();
        let s5 = 5.0_f64.sqrt();
        assert!((p.n.x - 2.0 / s5).abs() < 1e-15);
        assert!((p.n.z - 1.0 / s5).abs() < 1e-15);
        assert_eq!(p.h, 0.0);

        // (0,0,-1/3) is not a unit normal; the vertical component is killed
        let bad = OrientedPlane { n: v(0.0, 0.0, -1.0 / 3.0), h: 3.0 };
        assert_eq!(lambda_transform(&bad), Err(Error::ZeroNormal));
    }
}
