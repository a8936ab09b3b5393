//! Quad-double arithmetic: four non-overlapping doubles, about 212 bits.
//!
//! Only root polishing in extended mode uses it. Every operation expands its
//! inputs into error-free terms (two-sum, FMA two-product), sums them with a
//! compensated chain and renormalizes to four words. That is slower than the
//! hand-scheduled kernels of the classic QD library but simple to check.

use crate::dd::Dd;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Qd(pub [f64; 4]);

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Sum of `terms`, listed in roughly decreasing magnitude, rounded to four
/// non-overlapping words.
fn renormalize(terms: &mut [f64]) -> Qd {
    // VecSum from the smallest term up: afterwards terms[0] is the rounded sum
    // and the rest are the exact errors, still roughly decreasing
    let n = terms.len();
    for i in (0..n - 1).rev() {
        let (s, e) = two_sum(terms[i], terms[i + 1]);
        terms[i] = s;
        terms[i + 1] = e;
    }
    let mut out = [0.0; 4];
    let mut k = 0;
    let mut acc = terms[0];
    for &t in &terms[1..] {
        let (s, e) = two_sum(acc, t);
        if e != 0.0 {
            out[k] = s;
            k += 1;
            if k == 4 {
                return Qd(out);
            }
            acc = e;
        } else {
            acc = s;
        }
    }
    if k < 4 {
        out[k] = acc;
    }
    Qd(out)
}

impl Qd {
    pub const ZERO: Qd = Qd([0.0; 4]);
    pub const ONE: Qd = Qd([1.0, 0.0, 0.0, 0.0]);
    /// Unit roundoff 2^-209.
    pub const EPSILON: f64 = 1.2154326714572542e-63;

    pub fn to_f64(self) -> f64 {
        self.0[0] + self.0[1]
    }

    pub fn to_dd(self) -> Dd {
        Dd::from_sum(self.0[0], self.0[1]) + Dd::from(self.0[2])
    }

    pub fn abs(self) -> Self {
        if self.0[0] < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.0[0] <= 0.0 {
            return if self.0[0] == 0.0 { Qd::ZERO } else { Qd([f64::NAN; 4]) };
        }
        // Newton on x² = a, doubling the correct bits each step
        let mut x = Qd::from(self.0[0].sqrt());
        for _ in 0..3 {
            x = (x + self / x) * 0.5;
        }
        x
    }

    fn trunc(self) -> Self {
        let mut out = [0.0; 4];
        for (i, &w) in self.0.iter().enumerate() {
            let t = w.trunc();
            out[i] = t;
            if t != w {
                break;
            }
        }
        renormalize(&mut out)
    }
}

impl From<f64> for Qd {
    fn from(x: f64) -> Self {
        Qd([x, 0.0, 0.0, 0.0])
    }
}

impl From<Dd> for Qd {
    fn from(x: Dd) -> Self {
        Qd([x.hi, x.lo, 0.0, 0.0])
    }
}

impl fmt::Display for Qd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

impl PartialOrd for Qd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        (*self - *other).0[0].partial_cmp(&0.0)
    }
}

impl Neg for Qd {
    type Output = Qd;
    fn neg(self) -> Qd {
        Qd(self.0.map(|w| -w))
    }
}

impl Add for Qd {
    type Output = Qd;
    fn add(self, b: Qd) -> Qd {
        // merge the two word lists by magnitude
        let (a, b) = (self.0, b.0);
        let mut t = [0.0; 8];
        let (mut i, mut j) = (0, 0);
        for slot in t.iter_mut() {
            if j == 4 || (i < 4 && a[i].abs() >= b[j].abs()) {
                *slot = a[i];
                i += 1;
            } else {
                *slot = b[j];
                j += 1;
            }
        }
        renormalize(&mut t)
    }
}

impl Sub for Qd {
    type Output = Qd;
    fn sub(self, b: Qd) -> Qd {
        self + (-b)
    }
}

impl Mul for Qd {
    type Output = Qd;
    fn mul(self, b: Qd) -> Qd {
        // terms grouped by order i + j; a product's error joins the next order
        let (a, b) = (self.0, b.0);
        let mut t = [0.0; 21];
        let mut n = 0;
        let mut carry = [0.0; 6];
        let mut nc = 0;
        for order in 0..4 {
            for &c in &carry[..nc] {
                t[n] = c;
                n += 1;
            }
            nc = 0;
            for i in 0..=order {
                let (p, e) = two_prod(a[i], b[order - i]);
                t[n] = p;
                n += 1;
                carry[nc] = e;
                nc += 1;
            }
        }
        for &c in &carry[..nc] {
            t[n] = c;
            n += 1;
        }
        t[n] = a[1] * b[3] + a[2] * b[2] + a[3] * b[1];
        n += 1;
        renormalize(&mut t[..n])
    }
}

impl Mul<f64> for Qd {
    type Output = Qd;
    fn mul(self, b: f64) -> Qd {
        let mut t = [0.0; 8];
        for i in 0..4 {
            let (p, e) = two_prod(self.0[i], b);
            t[2 * i] = p;
            t[2 * i + 1] = e;
        }
        renormalize(&mut t)
    }
}

impl Div for Qd {
    type Output = Qd;
    fn div(self, b: Qd) -> Qd {
        // long division, one word of quotient per step
        let mut q = [0.0; 5];
        let mut r = self;
        for qi in q.iter_mut() {
            *qi = r.0[0] / b.0[0];
            r = r - b * *qi;
        }
        renormalize(&mut q)
    }
}

impl Rem for Qd {
    type Output = Qd;
    fn rem(self, b: Qd) -> Qd {
        self - (self / b).trunc() * b
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for Qd {
            #[inline]
            fn $m(&mut self, b: Qd) { *self = *self $op b; }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl num_traits::Zero for Qd {
    fn zero() -> Self {
        Qd::ZERO
    }
    fn is_zero(&self) -> bool {
        self.0[0] == 0.0
    }
}

impl num_traits::One for Qd {
    fn one() -> Self {
        Qd::ONE
    }
}

impl num_traits::Num for Qd {
    type FromStrRadixErr = std::num::ParseFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return "radix".parse::<f64>().map(Qd::from);
        }
        s.parse::<f64>().map(Qd::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(a: Qd, b: Qd) -> f64 {
        (a - b).abs().to_f64()
    }

    #[test]
    fn one_third_round_trip() {
        let third = Qd::ONE / Qd::from(3.0);
        assert!(err(third * Qd::from(3.0), Qd::ONE) < 1e-62);
        assert!(third.0[3] != 0.0);
    }

    #[test]
    fn sqrt_two_squared() {
        let r = Qd::from(2.0).sqrt();
        assert!(err(r * r, Qd::from(2.0)) < 1e-62);
    }

    #[test]
    fn tiny_differences_survive() {
        let a = Qd::ONE + Qd::from(1e-50);
        assert!(((a - Qd::ONE).to_f64() - 1e-50).abs() < 1e-66);
    }

    #[test]
    fn words_do_not_overlap() {
        let x = Qd::from(7.0).sqrt() / Qd::from(3.0);
        for w in x.0.windows(2) {
            assert!(w[1] == 0.0 || w[1].abs() <= w[0].abs() * f64::EPSILON);
        }
    }

    #[test]
    fn dd_round_trip() {
        let d = Dd::ONE / Dd::from(7.0);
        assert_eq!(Qd::from(d).to_dd(), d);
    }
}
