//! Truncated tridiagonal representations of A₊ = −iL₊ and A₋ = −iL₋.
//!
//! Mathematical indices are 1-based (row m ↔ Fourier mode m); storage is
//! 0-based, so `diag[m-1]` holds a_{m,m}, `sup[m-1]` holds a_{m,m+1} and
//! `sub[m-1]` holds a_{m+1,m}.

use crate::error::{Error, Result};
use crate::grid::{EpsilonParam, OneSidedCoeffs};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalMatrix {
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub sub: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(diag: Vec<f64>, sup: Vec<f64>, sub: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sup.len() + 1 != n || sub.len() + 1 != n {
            return Err(Error::Dimension(format!(
                "tridiagonal shape mismatch: diag {}, sup {}, sub {}",
                n,
                sup.len(),
                sub.len()
            )));
        }
        Ok(TridiagonalMatrix { diag, sup, sub })
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Row-major dense copy (eigensolver workspaces only).
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = self.diag[i];
            if i + 1 < n {
                a[i * n + i + 1] = self.sup[i];
                a[(i + 1) * n + i] = self.sub[i];
            }
        }
        a
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.sup)
            .chain(&self.sub)
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    pub fn mul_slice(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut s = v[i] * self.diag[i];
                if i > 0 {
                    s += v[i - 1] * self.sub[i - 1];
                }
                if i + 1 < n {
                    s += v[i + 1] * self.sup[i];
                }
                s
            })
            .collect()
    }
}

/// A₊(ε, N): diag m, super −(ε/2)m(m+1), sub +(ε/2)m(m+1).
pub fn build_aplus(eps: EpsilonParam, n: usize) -> Result<TridiagonalMatrix> {
    if n == 0 {
        return Err(Error::Dimension("truncation N must be at least 1".into()));
    }
    let e2 = 0.5 * eps.value();
    let diag = (1..=n).map(|m| m as f64).collect();
    let sup: Vec<f64> = (1..n).map(|m| -e2 * (m * (m + 1)) as f64).collect();
    let sub = sup.iter().map(|x| -x).collect();
    TridiagonalMatrix::new(diag, sup, sub)
}

/// −iL₋ on modes −1..−N ordered by |m|. Conjugating by J maps this block onto
/// the positive one with spectrum negated; in these coordinates the matrix is
/// exactly −A₊(ε, N).
pub fn build_aminus(eps: EpsilonParam, n: usize) -> Result<TridiagonalMatrix> {
    let a = build_aplus(eps, n)?;
    TridiagonalMatrix::new(
        a.diag.iter().map(|x| -x).collect(),
        a.sup.iter().map(|x| -x).collect(),
        a.sub.iter().map(|x| -x).collect(),
    )
}

pub fn apply(t: &TridiagonalMatrix, v: &OneSidedCoeffs) -> Result<OneSidedCoeffs> {
    if v.len() != t.n() {
        return Err(Error::Dimension(format!(
            "vector length {} does not match matrix dimension {}",
            v.len(),
            t.n()
        )));
    }
    Ok(OneSidedCoeffs::new(t.mul_slice(v.as_slice())))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DissipativityReport {
    pub min_quadratic_form: f64,
    pub structural_pass: bool,
    pub samples: usize,
}

/// Re⟨Tv, v⟩ for a unit vector v.
pub fn quadratic_form(t: &TridiagonalMatrix, v: &[Complex64]) -> f64 {
    t.mul_slice(v).iter().zip(v).map(|(a, b)| (a * b.conj()).re).sum()
}

/// Structural certificate plus a sampled lower bound for Re⟨Tv, v⟩ over unit
/// vectors (the basis vectors e_m are always included in the sample).
pub fn dissipativity_report(t: &TridiagonalMatrix, samples: usize, seed: u64) -> DissipativityReport {
    let n = t.n();
    let antisymmetric = t.sup.iter().zip(&t.sub).all(|(a, b)| a + b == 0.0);
    let increasing = t.diag.windows(2).all(|w| w[1] > w[0]);
    let structural_pass = antisymmetric && increasing && t.diag[0] > 0.0;
    let mut min_q = f64::INFINITY;
    for m in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[m] = Complex64::new(1.0, 0.0);
        min_q = min_q.min(quadratic_form(t, &e));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..samples {
        for z in v.iter_mut() {
            *z = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        let nrm = crate::scalar::cnorm(&v);
        for z in v.iter_mut() {
            *z /= nrm;
        }
        min_q = min_q.min(quadratic_form(t, &v));
    }
    DissipativityReport { min_quadratic_form: min_q, structural_pass, samples: samples + n }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_truncation_rejected() {
        let e = EpsilonParam::new(1.0).unwrap();
        assert!(matches!(build_aplus(e, 0), Err(Error::Dimension(_))));
        assert!(matches!(build_aminus(e, 0), Err(Error::Dimension(_))));
    }

    #[test]
    fn apply_checks_dimension() {
        let t = build_aplus(EpsilonParam::new(1.0).unwrap(), 3).unwrap();
        assert!(apply(&t, &OneSidedCoeffs::from_real(&[1.0, 2.0])).is_err());
    }
}
