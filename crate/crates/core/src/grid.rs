//! Periodic grid functions on (−π, π], their Fourier coefficients, exact
//! mode-arithmetic application of ℓ[h] = ε(sinθ h′)′ + h′, and the symmetry
//! (Jh)(θ) = h(π − θ).
//!
//! Convention: h(θ) = Σ_k v_k e^{ikθ}, so v_0 is the mean of h and
//! ‖h‖²_{L²(−π,π)} = 2π Σ |v_k|².

use crate::error::{Error, Result};
use crate::exec::Execution;
use num_complex::Complex64;
use num_traits::Zero;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// The parameter ε, restricted to the open interval (0, 2).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct EpsilonParam(f64);

impl EpsilonParam {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value < 2.0 {
            Ok(EpsilonParam(value))
        } else {
            Err(Error::Domain(format!("epsilon must lie in (0, 2), got {value}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Uniform samples at θ_j = −π + 2πj/M, j = 0..M−1.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicGridFunction {
    samples: Vec<Complex64>,
}

pub const MIN_GRID: usize = 8;

impl PeriodicGridFunction {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() < MIN_GRID {
            return Err(Error::Dimension(format!(
                "grid needs at least {MIN_GRID} samples, got {}",
                samples.len()
            )));
        }
        Ok(PeriodicGridFunction { samples })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(m: usize, f: F) -> Result<Self> {
        Self::new((0..m).map(|j| f(grid_theta(j, m))).collect())
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(m: usize, f: F) -> Result<Self> {
        Self::from_fn(m, |t| Complex64::new(f(t), 0.0))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn theta(&self, j: usize) -> f64 {
        grid_theta(j, self.len())
    }

    pub fn mean(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / self.len() as f64
    }

    /// Discrete approximation of the L²(−π, π) norm (exact for band-limited data).
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.samples.iter().map(|z| z.norm_sqr()).sum();
        (2.0 * PI * s / self.len() as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Dimension(format!(
                "grid sizes differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(PeriodicGridFunction {
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, a: Complex64) -> Self {
        PeriodicGridFunction { samples: self.samples.iter().map(|z| z * a).collect() }
    }

    /// Trigonometric interpolation onto a grid of size `m`.
    pub fn resample(&self, m: usize) -> Result<Self> {
        if m == self.len() {
            return Ok(self.clone());
        }
        let c = dft(self);
        let band = c.band().min(m.saturating_sub(2) / 2);
        idft(&c.with_band(band), m)
    }
}

#[inline]
pub fn grid_theta(j: usize, m: usize) -> f64 {
    -PI + 2.0 * PI * j as f64 / m as f64
}

/// Two-sided Fourier coefficients v_{−N..N}.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoeffsFull {
    band: usize,
    coeffs: Vec<Complex64>,
}

impl FourierCoeffsFull {
    pub fn zeros(band: usize) -> Self {
        FourierCoeffsFull { band, coeffs: vec![Complex64::zero(); 2 * band + 1] }
    }

    /// Build from a slice ordered k = −N..N.
    pub fn from_vec(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::Dimension(format!(
                "two-sided coefficient vector must have odd length, got {}",
                coeffs.len()
            )));
        }
        Ok(FourierCoeffsFull { band: coeffs.len() / 2, coeffs })
    }

    /// Assemble from the mean, positive block v_1..v_N and negative block v_{−1}..v_{−N}.
    pub fn from_blocks(v0: Complex64, pos: &OneSidedCoeffs, neg: &OneSidedCoeffs) -> Self {
        let band = pos.len().max(neg.len());
        let mut c = Self::zeros(band);
        c.set(0, v0);
        for (k, v) in pos.as_slice().iter().enumerate() {
            c.set(k as i64 + 1, *v);
        }
        for (k, v) in neg.as_slice().iter().enumerate() {
            c.set(-(k as i64) - 1, *v);
        }
        c
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// v_k, zero outside the band.
    #[inline]
    pub fn get(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.band {
            Complex64::zero()
        } else {
            self.coeffs[(k + self.band as i64) as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, k: i64, v: Complex64) {
        assert!(k.unsigned_abs() as usize <= self.band, "mode {k} outside band {}", self.band);
        let b = self.band as i64;
        self.coeffs[(k + b) as usize] = v;
    }

    /// Pad with zeros or truncate to band `n`.
    pub fn with_band(&self, n: usize) -> Self {
        let mut c = Self::zeros(n);
        let b = n.min(self.band) as i64;
        for k in -b..=b {
            c.set(k, self.get(k));
        }
        c
    }

    pub fn mean(&self) -> Complex64 {
        self.get(0)
    }

    /// Positive modes v_1..v_N.
    pub fn positive(&self) -> OneSidedCoeffs {
        OneSidedCoeffs::new((1..=self.band as i64).map(|k| self.get(k)).collect())
    }

    /// Negative modes v_{−1}..v_{−N}, ordered by |k|.
    pub fn negative(&self) -> OneSidedCoeffs {
        OneSidedCoeffs::new((1..=self.band as i64).map(|k| self.get(-k)).collect())
    }

    /// ‖h‖_{L²(−π,π)}.
    pub fn l2_norm(&self) -> f64 {
        (2.0 * PI * self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// ⟨a, b⟩_{L²(−π,π)} = 2π Σ a_k conj(b_k).
    pub fn inner(&self, other: &Self) -> Complex64 {
        let b = self.band.max(other.band) as i64;
        (-b..=b).map(|k| self.get(k) * other.get(k).conj()).sum::<Complex64>() * (2.0 * PI)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let b = self.band.max(other.band);
        let mut c = Self::zeros(b);
        for k in -(b as i64)..=b as i64 {
            c.set(k, self.get(k) - other.get(k));
        }
        c
    }

    pub fn add(&self, other: &Self) -> Self {
        let b = self.band.max(other.band);
        let mut c = Self::zeros(b);
        for k in -(b as i64)..=b as i64 {
            c.set(k, self.get(k) + other.get(k));
        }
        c
    }

    pub fn scale(&self, a: Complex64) -> Self {
        FourierCoeffsFull { band: self.band, coeffs: self.coeffs.iter().map(|z| z * a).collect() }
    }

    /// Real-valuedness test: v_{−k} = conj(v_k) within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        (0..=self.band as i64).all(|k| (self.get(-k) - self.get(k).conj()).norm() <= tol)
    }

    /// Σ v_k e^{ikθ}.
    pub fn evaluate(&self, theta: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, theta);
        let mut zp = Complex64::new(1.0, 0.0);
        let mut s = self.get(0);
        for k in 1..=self.band as i64 {
            zp *= z;
            s += self.get(k) * zp + self.get(-k) * zp.conj();
        }
        s
    }
}

/// Positive-mode coefficients v_1..v_N (storage index m−1 holds v_m).
#[derive(Clone, Debug, PartialEq)]
pub struct OneSidedCoeffs {
    coeffs: Vec<Complex64>,
}

impl OneSidedCoeffs {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        OneSidedCoeffs { coeffs }
    }

    pub fn from_real(v: &[f64]) -> Self {
        Self::new(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Unit vector e_m (1-based).
    pub fn unit(n: usize, m: usize) -> Self {
        let mut c = vec![Complex64::zero(); n];
        c[m - 1] = Complex64::new(1.0, 0.0);
        Self::new(c)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// v_m with 1-based m.
    pub fn get(&self, m: usize) -> Complex64 {
        self.coeffs[m - 1]
    }

    /// Euclidean (ℓ²) norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        crate::scalar::cnorm(&self.coeffs)
    }

    /// Embed as a function with only positive modes.
    pub fn to_full(&self) -> FourierCoeffsFull {
        FourierCoeffsFull::from_blocks(Complex64::zero(), self, &OneSidedCoeffs::new(vec![]))
    }
}

fn twiddles(m: usize) -> Vec<Complex64> {
    (0..m).map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / m as f64)).collect()
}

/// Direct-summation DFT onto band N = M/2 − 1 (the Nyquist mode is dropped).
pub fn dft(g: &PeriodicGridFunction) -> FourierCoeffsFull {
    dft_with(g, Execution::default())
}

pub fn dft_with(g: &PeriodicGridFunction, exec: Execution) -> FourierCoeffsFull {
    let m = g.len();
    let band = (m - 2) / 2;
    let w = twiddles(m);
    let s = g.samples();
    let coeffs = exec.map_range(2 * band + 1, |idx| {
        let k = idx as i64 - band as i64;
        let km = k.rem_euclid(m as i64) as usize;
        let mut acc = Complex64::zero();
        for (j, gj) in s.iter().enumerate() {
            acc += gj * w[(j * km) % m];
        }
        // e^{−ikθ_j} = (−1)^k e^{−2πijk/M}
        let sgn = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        acc * (sgn / m as f64)
    });
    FourierCoeffsFull { band, coeffs }
}

/// Synthesize samples on a grid of size `m`; requires M ≥ 2N + 2.
pub fn idft(c: &FourierCoeffsFull, m: usize) -> Result<PeriodicGridFunction> {
    idft_with(c, m, Execution::default())
}

pub fn idft_with(c: &FourierCoeffsFull, m: usize, exec: Execution) -> Result<PeriodicGridFunction> {
    if m < 2 * c.band() + 2 {
        return Err(Error::Dimension(format!(
            "grid size {m} too small for band {} (need at least {})",
            c.band(),
            2 * c.band() + 2
        )));
    }
    if m < MIN_GRID {
        return Err(Error::Dimension(format!("grid needs at least {MIN_GRID} samples, got {m}")));
    }
    let w = twiddles(m);
    let band = c.band() as i64;
    let samples = exec.map_range(m, |j| {
        let mut acc = Complex64::zero();
        for k in -band..=band {
            let km = k.rem_euclid(m as i64) as usize;
            let sgn = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            acc += c.get(k) * w[(j * km) % m].conj() * sgn;
        }
        acc
    });
    PeriodicGridFunction::new(samples)
}

/// Exact mode arithmetic:
/// (ℓv)_m = i[m v_m + (ε/2)m(m−1)v_{m−1} − (ε/2)m(m+1)v_{m+1}], output band N+1.
pub fn apply_ell(h: &FourierCoeffsFull, eps: EpsilonParam) -> FourierCoeffsFull {
    let e2 = 0.5 * eps.value();
    let nb = h.band() + 1;
    let mut out = FourierCoeffsFull::zeros(nb);
    for m in -(nb as i64)..=nb as i64 {
        let mf = m as f64;
        let val = h.get(m) * mf + h.get(m - 1) * (e2 * mf * (mf - 1.0))
            - h.get(m + 1) * (e2 * mf * (mf + 1.0));
        out.set(m, I * val);
    }
    out
}

/// (Jh)(θ) = h(π − θ) on the grid: index j ↦ (M/2 − j) mod M.
pub fn apply_j(h: &PeriodicGridFunction) -> Result<PeriodicGridFunction> {
    let m = h.len();
    if m % 2 != 0 {
        return Err(Error::Dimension(format!("J needs an even grid size, got {m}")));
    }
    let s = h.samples();
    let half = (m / 2) as i64;
    PeriodicGridFunction::new(
        (0..m as i64).map(|j| s[(half - j).rem_euclid(m as i64) as usize]).collect(),
    )
}

/// J on coefficients: mode n of h maps to (−1)^n v_n at mode −n.
pub fn apply_j_coeffs(h: &FourierCoeffsFull) -> FourierCoeffsFull {
    let b = h.band() as i64;
    let mut out = FourierCoeffsFull::zeros(h.band());
    for n in -b..=b {
        let sgn = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        out.set(-n, h.get(n) * sgn);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_bounds() {
        assert!(EpsilonParam::new(0.0).is_err());
        assert!(EpsilonParam::new(2.0).is_err());
        assert!(EpsilonParam::new(f64::NAN).is_err());
        assert!(EpsilonParam::new(1.999).is_ok());
    }

    #[test]
    fn constant_and_cosine() {
        let g = PeriodicGridFunction::from_real_fn(16, |_| 1.0).unwrap();
        let c = dft(&g);
        assert!((c.get(0) - 1.0).norm() < 1e-15);
        assert!((1..=c.band() as i64).all(|k| c.get(k).norm() < 1e-15 && c.get(-k).norm() < 1e-15));
        let g = PeriodicGridFunction::from_real_fn(16, f64::cos).unwrap();
        let c = dft(&g);
        assert!((c.get(1) - 0.5).norm() < 1e-15 && (c.get(-1) - 0.5).norm() < 1e-15);
        assert!(c.get(0).norm() < 1e-15 && c.get(2).norm() < 1e-15);
    }

    #[test]
    fn odd_grid_rejected_by_j() {
        let g = PeriodicGridFunction::new(vec![Complex64::zero(); 9]).unwrap();
        assert!(matches!(apply_j(&g), Err(Error::Dimension(_))));
    }

    #[test]
    fn tiny_grid_rejected() {
        assert!(PeriodicGridFunction::new(vec![Complex64::zero(); 4]).is_err());
        assert!(idft(&FourierCoeffsFull::zeros(8), 16).is_err());
    }
}
