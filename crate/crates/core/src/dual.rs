//! Scalars carrying exact first and second derivatives.
//!
//! `HyperDual<T>` has two independent infinitesimal parts with
//! `e1^2 = e2^2 = 0` and a cross term `e1 e2`. Seeding `x + e1 + e2` yields
//! `f, f', f', f''`; seeding two different variables yields mixed partials.
//! Used for the QD+ residual derivatives and for the barrier-level
//! optimality conditions, where the underlying scalar may be complex.

use crate::blackscholes::faddeeva::complex_cdf;
use crate::blackscholes::normal;
use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    /// Standard normal distribution function.
    fn ncdf(self) -> Self;
    /// Standard normal density.
    fn npdf(self) -> Self;

    fn scale(self, k: f64) -> Self {
        self * Self::from_f64(k)
    }
    fn shift(self, k: f64) -> Self {
        self + Self::from_f64(k)
    }
    fn powf(self, e: Self) -> Self {
        (self.ln() * e).exp()
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn ncdf(self) -> Self {
        normal::cdf(self)
    }
    fn npdf(self) -> Self {
        normal::pdf(self)
    }
}

impl Scalar for Complex64 {
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn ln(self) -> Self {
        Complex64::ln(self)
    }
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    fn ncdf(self) -> Self {
        complex_cdf(self)
    }
    fn npdf(self) -> Self {
        (self * self * -0.5).exp() * INV_SQRT_2PI
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperDual<T> {
    pub re: T,
    pub e1: T,
    pub e2: T,
    pub e12: T,
}

impl<T: Scalar> HyperDual<T> {
    pub fn constant(x: T) -> Self {
        let z = T::from_f64(0.0);
        Self { re: x, e1: z, e2: z, e12: z }
    }

    /// `x + e1 + e2`: a single variable whose first and second derivatives
    /// are wanted.
    pub fn variable(x: T) -> Self {
        let one = T::from_f64(1.0);
        Self { re: x, e1: one, e2: one, e12: T::from_f64(0.0) }
    }

    pub fn new(re: T, e1: T, e2: T, e12: T) -> Self {
        Self { re, e1, e2, e12 }
    }

    /// Applies a function given its value and first two derivatives at `re`.
    #[inline]
    fn chain(self, f: T, df: T, d2f: T) -> Self {
        Self {
            re: f,
            e1: df * self.e1,
            e2: df * self.e2,
            e12: df * self.e12 + d2f * self.e1 * self.e2,
        }
    }
}

impl<T: Scalar> Add for HyperDual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.e1 + o.e1, self.e2 + o.e2, self.e12 + o.e12)
    }
}

impl<T: Scalar> Sub for HyperDual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.e1 - o.e1, self.e2 - o.e2, self.e12 - o.e12)
    }
}

impl<T: Scalar> Neg for HyperDual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.e1, -self.e2, -self.e12)
    }
}

impl<T: Scalar> Mul for HyperDual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.re * o.re,
            self.re * o.e1 + self.e1 * o.re,
            self.re * o.e2 + self.e2 * o.re,
            self.re * o.e12 + self.e1 * o.e2 + self.e2 * o.e1 + self.e12 * o.re,
        )
    }
}

impl<T: Scalar> Div for HyperDual<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        let inv = T::from_f64(1.0) / o.re;
        let recip = o.chain(inv, -inv * inv, inv * inv * inv.scale(2.0));
        self * recip
    }
}

impl<T: Scalar> Scalar for HyperDual<T> {
    fn from_f64(x: f64) -> Self {
        Self::constant(T::from_f64(x))
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let inv = T::from_f64(1.0) / self.re;
        self.chain(self.re.ln(), inv, -inv * inv)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        let d = T::from_f64(0.5) / s;
        self.chain(s, d, -d / self.re.scale(2.0))
    }
    fn ncdf(self) -> Self {
        let p = self.re.npdf();
        self.chain(self.re.ncdf(), p, -self.re * p)
    }
    fn npdf(self) -> Self {
        let p = self.re.npdf();
        self.chain(p, -self.re * p, (self.re * self.re).shift(-1.0) * p)
    }
}
