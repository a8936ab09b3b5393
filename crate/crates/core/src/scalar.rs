//! Precision-generic real scalars. Algorithms that need the extended mode are
//! written once against [`Real`] and instantiated for `f64` and [`Dd`].

use crate::dd::Dd;
use crate::qd::Qd;
use num_complex::Complex;
use std::fmt::Debug;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

pub trait Real:
    num_traits::Num
    + Copy
    + Debug
    + PartialOrd
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    /// Unit roundoff of the format.
    const UNIT_ROUNDOFF: f64;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;

    fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Real for f64 {
    const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

impl Real for Dd {
    const UNIT_ROUNDOFF: f64 = Dd::EPSILON;
    #[inline]
    fn from_f64(x: f64) -> Self {
        Dd::from(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        Dd::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Self {
        Dd::abs(self)
    }
}

impl Real for Qd {
    const UNIT_ROUNDOFF: f64 = Qd::EPSILON;
    #[inline]
    fn from_f64(x: f64) -> Self {
        Qd::from(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        Qd::to_f64(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        Qd::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Self {
        Qd::abs(self)
    }
}

/// |z| without intermediate overflow.
pub fn cabs<R: Real>(z: Complex<R>) -> R {
    let a = z.re.abs();
    let b = z.im.abs();
    let (big, small) = if a >= b { (a, b) } else { (b, a) };
    if big == R::zero() {
        return R::zero();
    }
    let r = small / big;
    big * (R::one() + r * r).sqrt()
}

#[inline]
pub fn cabs2<R: Real>(z: Complex<R>) -> R {
    z.re * z.re + z.im * z.im
}

#[inline]
pub fn cfrom<R: Real>(z: Complex<f64>) -> Complex<R> {
    Complex::new(R::from_f64(z.re), R::from_f64(z.im))
}

#[inline]
pub fn cto<R: Real>(z: Complex<R>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

/// Numerically safe complex division (Smith's algorithm).
pub fn cdiv<R: Real>(a: Complex<R>, b: Complex<R>) -> Complex<R> {
    if b.re.abs() >= b.im.abs() {
        let r = b.im / b.re;
        let d = b.re + b.im * r;
        Complex::new((a.re + a.im * r) / d, (a.im - a.re * r) / d)
    } else {
        let r = b.re / b.im;
        let d = b.re * r + b.im;
        Complex::new((a.re * r + a.im) / d, (a.im * r - a.re) / d)
    }
}

/// Euclidean norm of a complex vector, scaled against overflow.
pub fn cnorm<R: Real>(v: &[Complex<R>]) -> R {
    let mut scale = R::zero();
    for z in v {
        scale = scale.max(z.re.abs()).max(z.im.abs());
    }
    if scale == R::zero() {
        return R::zero();
    }
    let mut s = R::zero();
    for z in v {
        let a = z.re / scale;
        let b = z.im / scale;
        s += a * a + b * b;
    }
    scale * s.sqrt()
}

/// Hermitian inner product ⟨a, b⟩ = Σ a_k conj(b_k).
pub fn cdot<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> Complex<R> {
    let mut s = Complex::new(R::zero(), R::zero());
    for (x, y) in a.iter().zip(b) {
        s = s + *x * y.conj();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cabs_avoids_overflow() {
        let z = Complex::new(1e300, 1e300);
        assert!((cabs(z) / 1e300 - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn smith_division_matches_naive() {
        let a = Complex::new(1.5, -2.0);
        let b = Complex::new(0.3, 4.0);
        let q = cdiv(a, b);
        let n = a / b;
        assert!((q - n).norm() < 1e-15);
    }
}
