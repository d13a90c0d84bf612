//! Bivariate truncated Taylor polynomials ("jets") up to total order 4.
//!
//! A jet stores the Taylor coefficients `c[i][j]` of a function of `(x, y)`
//! around a base point, so `F_{x^i y^j} = i! j! c[i][j]`. Mixed partials are
//! stored once per multi-index, which makes them symmetric by construction.
//! Arithmetic on jets is exact polynomial arithmetic modulo terms of degree
//! greater than the jet order, so composing elementary operations yields
//! exact derivatives (up to rounding).

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::scalar::{lit, Real};

pub const MAX_ORDER: usize = 4;
pub const LEN: usize = 15;

const fn index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

const fn build_exponents() -> [(usize, usize); LEN] {
    let mut out = [(0, 0); LEN];
    let mut d = 0;
    while d <= MAX_ORDER {
        let mut j = 0;
        while j <= d {
            out[index(d - j, j)] = (d - j, j);
            j += 1;
        }
        d += 1;
    }
    out
}

const EXPONENTS: [(usize, usize); LEN] = build_exponents();

const fn build_products() -> [[u8; LEN]; LEN] {
    let mut out = [[u8::MAX; LEN]; LEN];
    let mut a = 0;
    while a < LEN {
        let mut b = 0;
        while b < LEN {
            let (ia, ja) = EXPONENTS[a];
            let (ib, jb) = EXPONENTS[b];
            if ia + ib + ja + jb <= MAX_ORDER {
                out[a][b] = index(ia + ib, ja + jb) as u8;
            }
            b += 1;
        }
        a += 1;
    }
    out
}

const PRODUCTS: [[u8; LEN]; LEN] = build_products();

const FACTORIAL: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[inline]
const fn len_of(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Truncated bivariate Taylor expansion of a scalar function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    c: [T; LEN],
    order: usize,
}

impl<T: Real> Jet<T> {
    pub fn constant(value: T, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut c = [T::zero(); LEN];
        c[0] = value;
        Jet { c, order }
    }

    /// The coordinate function `x` expanded around `x0`.
    pub fn var_x(x0: T, order: usize) -> Self {
        let mut j = Self::constant(x0, order);
        if order >= 1 {
            j.c[index(1, 0)] = T::one();
        }
        j
    }

    /// The coordinate function `y` expanded around `y0`.
    pub fn var_y(y0: T, order: usize) -> Self {
        let mut j = Self::constant(y0, order);
        if order >= 1 {
            j.c[index(0, 1)] = T::one();
        }
        j
    }

    /// Builds a jet from partial derivatives listed in storage order
    /// (`F, F_x, F_y, F_xx, F_xy, F_yy, ...`).
    pub fn from_partials(partials: &[T], order: usize) -> Self {
        let mut j = Self::constant(T::zero(), order);
        for (k, p) in partials.iter().take(len_of(order)).enumerate() {
            let (i, jj) = EXPONENTS[k];
            j.c[k] = *p / lit::<T>(FACTORIAL[i] * FACTORIAL[jj]);
        }
        j
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn value(&self) -> T {
        self.c[0]
    }

    /// Taylor coefficient of `dx^i dy^j`.
    pub fn coeff(&self, i: usize, j: usize) -> T {
        if i + j > self.order {
            T::zero()
        } else {
            self.c[index(i, j)]
        }
    }

    /// The partial derivative `∂^{i+j} F / ∂x^i ∂y^j` at the base point.
    ///
    /// Returns zero for multi-indices beyond the jet order.
    pub fn partial(&self, i: usize, j: usize) -> T {
        self.coeff(i, j) * lit::<T>(FACTORIAL[i] * FACTORIAL[j])
    }

    /// All partial derivatives in storage order.
    pub fn partials(&self) -> Vec<T> {
        (0..len_of(self.order))
            .map(|k| {
                let (i, j) = EXPONENTS[k];
                self.partial(i, j)
            })
            .collect()
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        let mut out = Self::constant(T::zero(), order);
        out.c[..len_of(order)].copy_from_slice(&self.c[..len_of(order)]);
        out
    }

    /// Jet of `∂F/∂x`, one order lower.
    pub fn dx(&self) -> Self {
        self.shift(1, 0)
    }

    /// Jet of `∂F/∂y`, one order lower.
    pub fn dy(&self) -> Self {
        self.shift(0, 1)
    }

    fn shift(&self, di: usize, dj: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let mut out = Self::constant(T::zero(), order);
        for k in 0..len_of(order) {
            let (i, j) = EXPONENTS[k];
            let factor = if di == 1 { i + 1 } else { j + 1 };
            out.c[k] = self.c[index(i + di, j + dj)] * lit::<T>(factor as f64);
        }
        out
    }

    fn nilpotent(&self) -> Self {
        let mut n = *self;
        n.c[0] = T::zero();
        n
    }

    /// Composes a univariate function with this jet, given the function's
    /// derivatives `f, f', f'', f''', f''''` at the base value.
    pub fn compose(&self, derivs: [T; 5]) -> Self {
        let nil = self.nilpotent();
        let mut out = Self::constant(derivs[0], self.order);
        let mut power = nil;
        for (k, d) in derivs.iter().enumerate().take(self.order + 1).skip(1) {
            out += power * (*d / lit::<T>(FACTORIAL[k]));
            if k < self.order {
                power = power * nil;
            }
        }
        out
    }

    pub fn recip(&self) -> Self {
        let a = self.value();
        let r = T::one() / a;
        let r2 = r * r;
        self.compose([
            r,
            -r2,
            lit::<T>(2.0) * r2 * r,
            lit::<T>(-6.0) * r2 * r2,
            lit::<T>(24.0) * r2 * r2 * r,
        ])
    }

    pub fn ln(&self) -> Self {
        let r = T::one() / self.value();
        let r2 = r * r;
        self.compose([
            self.value().ln(),
            r,
            -r2,
            lit::<T>(2.0) * r2 * r,
            lit::<T>(-6.0) * r2 * r2,
        ])
    }

    pub fn sqrt(&self) -> Self {
        let a = self.value();
        let s = a.sqrt();
        let r = T::one() / a;
        self.compose([
            s,
            lit::<T>(0.5) * s * r,
            lit::<T>(-0.25) * s * r * r,
            lit::<T>(0.375) * s * r * r * r,
            lit::<T>(-0.9375) * s * r * r * r * r,
        ])
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose([e; 5])
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c, s])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s, c])
    }

    pub fn atan(&self) -> Self {
        let a = self.value();
        let w = T::one() / (T::one() + a * a);
        let w2 = w * w;
        self.compose([
            a.atan(),
            w,
            lit::<T>(-2.0) * a * w2,
            (lit::<T>(6.0) * a * a - lit::<T>(2.0)) * w2 * w,
            lit::<T>(24.0) * a * (T::one() - a * a) * w2 * w2,
        ])
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Self::constant(T::one(), self.order);
        for _ in 0..n {
            out = out * *self;
        }
        out
    }

    /// The polar angle `atan2(y, x)` as a jet, principal value in `(-π, π]`.
    ///
    /// Uses the angle-difference identity so that only the increment is
    /// expanded; the base value stays exact.
    pub fn atan2(y: &Self, x: &Self) -> Self {
        let (x0, y0) = (x.value(), y.value());
        let theta0 = y0.atan2(x0);
        let num = *y * x0 - *x * y0;
        let den = *x * x0 + *y * y0;
        let incr = (num / den).compose([
            T::zero(),
            T::one(),
            T::zero(),
            lit::<T>(-2.0),
            T::zero(),
        ]);
        incr + theta0
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = *self;
        for v in out.c.iter_mut().take(len_of(self.order)) {
            *v = *v * s;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.c[..len_of(self.order)].iter().all(|v| v.is_finite())
    }
}

impl<T: Real> Add for Jet<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut out = Self::constant(T::zero(), order);
        for k in 0..len_of(order) {
            out.c[k] = self.c[k] + rhs.c[k];
        }
        out
    }
}

impl<T: Real> AddAssign for Jet<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Real> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut out = Self::constant(T::zero(), order);
        for k in 0..len_of(order) {
            out.c[k] = self.c[k] - rhs.c[k];
        }
        out
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let order = self.order.min(rhs.order);
        let n = len_of(order);
        let mut out = Self::constant(T::zero(), order);
        if order == 0 {
            out.c[0] = self.c[0] * rhs.c[0];
            return out;
        }
        for a in 0..n {
            let ca = self.c[a];
            if ca == T::zero() {
                continue;
            }
            for b in 0..n {
                let o = PRODUCTS[a][b] as usize;
                if o < n {
                    out.c[o] = out.c[o] + ca * rhs.c[b];
                }
            }
        }
        out
    }
}

impl<T: Real> Div for Jet<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        if rhs.order == 0 || self.order == 0 {
            return Self::constant(self.c[0] / rhs.c[0], 0);
        }
        self * rhs.recip()
    }
}

impl<T: Real> Add<T> for Jet<T> {
    type Output = Self;
    fn add(self, rhs: T) -> Self {
        let mut out = self;
        out.c[0] = out.c[0] + rhs;
        out
    }
}

impl<T: Real> Sub<T> for Jet<T> {
    type Output = Self;
    fn sub(self, rhs: T) -> Self {
        let mut out = self;
        out.c[0] = out.c[0] - rhs;
        out
    }
}

impl<T: Real> Mul<T> for Jet<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        self.scale(rhs)
    }
}

impl<T: Real> Div<T> for Jet<T> {
    type Output = Self;
    fn div(self, rhs: T) -> Self {
        self.scale(T::one() / rhs)
    }
}
