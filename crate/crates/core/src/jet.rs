//! Forward-mode jets used for every derivative in the crate.
//!
//! Two number types implement [`Scalar`]:
//!
//! * [`Dual<T>`] carries one infinitesimal over an arbitrary inner scalar.
//!   Nesting (`Dual<Dual<f64>>`) yields mixed second derivatives, which is
//!   how covariant derivatives of covariant derivatives are evaluated.
//! * [`Jet2`] is a truncated Taylor polynomial along a single curve and
//!   carries the first and second derivative with respect to the curve
//!   parameter.
//!
//! All geometric code is written once, generically over `Scalar`, and is
//! differentiated by instantiating it at a jet type.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Field-like number type understood by the geometry engine.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn cst(v: f64) -> Self;

    /// Underlying real value with all infinitesimal parts discarded.
    fn value(&self) -> f64;

    fn sqrt(self) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn one() -> Self {
        Self::cst(1.0)
    }

    fn recip(self) -> Self {
        Self::one() / self
    }

    fn scale(self, k: f64) -> Self {
        self * Self::cst(k)
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }

    #[inline]
    fn value(&self) -> f64 {
        *self
    }

    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Dual number `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }

    pub fn constant(re: T) -> Self {
        Dual { re, eps: T::zero() }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = o.re.recip();
        let q = self.re * inv;
        Dual::new(q, (self.eps - q * o.eps) * inv)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> AddAssign for Dual<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> SubAssign for Dual<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Scalar> MulAssign for Dual<T> {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    #[inline]
    fn cst(v: f64) -> Self {
        Dual::constant(T::cst(v))
    }

    #[inline]
    fn value(&self) -> f64 {
        self.re.value()
    }

    #[inline]
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual::new(s, self.eps / (s + s))
    }
}

/// Second-order Taylor data of a scalar along one curve: the value and the
/// first and second derivatives with respect to the curve parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub fn new(value: f64, d1: f64, d2: f64) -> Self {
        Jet2 { value, d1, d2 }
    }

    /// The curve parameter itself, `t ↦ t` at `t = 0`.
    pub fn variable() -> Self {
        Jet2::new(0.0, 1.0, 0.0)
    }
}

impl Add for Jet2 {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Jet2::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet2 {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Jet2::new(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Mul for Jet2 {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Jet2::new(
            self.value * o.value,
            self.d1 * o.value + self.value * o.d1,
            self.d2 * o.value + 2.0 * self.d1 * o.d1 + self.value * o.d2,
        )
    }
}

impl Div for Jet2 {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let q0 = self.value / o.value;
        let q1 = (self.d1 - q0 * o.d1) / o.value;
        let q2 = (self.d2 - 2.0 * q1 * o.d1 - q0 * o.d2) / o.value;
        Jet2::new(q0, q1, q2)
    }
}

impl Neg for Jet2 {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Jet2::new(-self.value, -self.d1, -self.d2)
    }
}

impl AddAssign for Jet2 {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for Jet2 {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl MulAssign for Jet2 {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl Scalar for Jet2 {
    fn cst(v: f64) -> Self {
        Jet2::new(v, 0.0, 0.0)
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn sqrt(self) -> Self {
        let s0 = self.value.sqrt();
        let s1 = self.d1 / (2.0 * s0);
        let s2 = (self.d2 - 2.0 * s1 * s1) / (2.0 * s0);
        Jet2::new(s0, s1, s2)
    }
}

/// Lifts a real vector into any scalar type as constants.
pub fn lift<T: Scalar>(v: &[f64]) -> Vec<T> {
    v.iter().map(|&x| T::cst(x)).collect()
}

/// Lifts a vector one jet level up, as constants.
pub fn lift_dual<T: Scalar>(v: &[T]) -> Vec<Dual<T>> {
    v.iter().map(|&x| Dual::constant(x)).collect()
}

pub fn eps_part<T: Scalar>(v: &[Dual<T>]) -> Vec<T> {
    v.iter().map(|x| x.eps).collect()
}

pub fn re_part<T: Scalar>(v: &[Dual<T>]) -> Vec<T> {
    v.iter().map(|x| x.re).collect()
}

pub fn values<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.value()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly<T: Scalar>(x: T) -> T {
        // 3x² − 2x + 5
        T::cst(3.0) * x * x - T::cst(2.0) * x + T::cst(5.0)
    }

    #[test]
    fn jet2_reproduces_quadratic_taylor_data() {
        let x0 = 1.7;
        let j = poly(Jet2::new(x0, 1.0, 0.0));
        assert_eq!(j.value, 3.0 * x0 * x0 - 2.0 * x0 + 5.0);
        assert!((j.d1 - (6.0 * x0 - 2.0)).abs() < 1e-14);
        assert_eq!(j.d2, 6.0);
    }

    #[test]
    fn nested_duals_give_mixed_partials() {
        // f(x, y) = x² y + y³, ∂²f/∂x∂y = 2x
        let (x0, y0) = (0.3, -1.2);
        let x = Dual::new(Dual::new(x0, 1.0), Dual::new(0.0, 0.0));
        let y = Dual::new(Dual::new(y0, 0.0), Dual::new(1.0, 0.0));
        let f = x * x * y + y * y * y;
        assert!((f.re.re - (x0 * x0 * y0 + y0.powi(3))).abs() < 1e-15);
        assert!((f.re.eps - 2.0 * x0 * y0).abs() < 1e-15);
        assert!((f.eps.re - (x0 * x0 + 3.0 * y0 * y0)).abs() < 1e-15);
        assert!((f.eps.eps - 2.0 * x0).abs() < 1e-15);
    }

    #[test]
    fn sqrt_and_division_derivatives() {
        let x = Jet2::new(4.0, 1.0, 0.0);
        let s = x.sqrt();
        assert!((s.d1 - 0.25).abs() < 1e-15);
        assert!((s.d2 + 0.25 / 8.0).abs() < 1e-15);
        let r = Jet2::cst(1.0) / x;
        assert!((r.d1 + 1.0 / 16.0).abs() < 1e-15);
        assert!((r.d2 - 2.0 / 64.0).abs() < 1e-15);
    }
}
