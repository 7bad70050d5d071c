//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the library computes in: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self;

    /// `ln |Γ(x)|`.
    fn lgamma(self) -> Self;

    /// Bessel function of the first kind, order zero.
    fn bessel_j0(self) -> Self;

    /// Bessel function of the first kind, integer order `n`.
    fn bessel_jn(n: i32, x: Self) -> Self;

    /// A conservative working tolerance for this precision.
    fn default_tolerance() -> Self;
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
    fn lgamma(self) -> Self {
        libm::lgamma_r(self).0
    }
    fn bessel_j0(self) -> Self {
        libm::j0(self)
    }
    fn bessel_jn(n: i32, x: Self) -> Self {
        libm::jn(n, x)
    }
    fn default_tolerance() -> Self {
        1e-10
    }
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
    fn lgamma(self) -> Self {
        libm::lgammaf_r(self).0
    }
    fn bessel_j0(self) -> Self {
        libm::j0f(self)
    }
    fn bessel_jn(n: i32, x: Self) -> Self {
        libm::jnf(n, x)
    }
    fn default_tolerance() -> Self {
        1e-5
    }
}

/// `i·x` for a real `x`.
#[inline]
pub fn imag<T: Real>(x: T) -> Complex<T> {
    Complex::new(T::zero(), x)
}

/// `e^{iφ}`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

/// Kahan–Babuška–Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated<T> {
    sum: T,
    compensation: T,
}

impl<T: Real> Compensated<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

impl<T: Real> FromIterator<T> for Compensated<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated accumulator for complex values (real and imaginary parts
/// compensated independently).
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplex<T> {
    re: Compensated<T>,
    im: Compensated<T>,
}

impl<T: Real> CompensatedComplex<T> {
    pub fn new() -> Self {
        Self {
            re: Compensated::new(),
            im: Compensated::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, z: Complex<T>) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex<T> {
        Complex::new(self.re.value(), self.im.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_recovers_cancelled_bits() {
        let mut acc = Compensated::<f64>::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            acc.add(x);
        }
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn special_functions_dispatch_for_both_precisions() {
        assert!((f64::lgamma(5.0) - 24f64.ln()).abs() < 1e-14);
        assert!((f32::lgamma(5.0) - 24f32.ln()).abs() < 1e-5);
        assert!((f64::bessel_j0(0.0) - 1.0).abs() < 1e-15);
        assert!((f64::bessel_jn(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
    }
}
