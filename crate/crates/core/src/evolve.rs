//! Finite-section evolution of h_t + Lh = 0.
//!
//! On positive modes v′ = −iA₊v, on negative modes (ordered by |k|) w′ = +iA₊w,
//! and the mean is constant. Propagators are built by Padé(13) scaling and
//! squaring; a log-scaled variant carries a separate exponent so that
//! astronomically large propagators can still be measured.

use crate::diagnostics::singular_values_cols;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::{idft, EpsilonParam, FourierCoeffsFull, OneSidedCoeffs, PeriodicGridFunction};
use crate::linalg::CMatrix;
use crate::operator::build_aplus;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Padé(13) numerator coefficients b_k / b_0.
const PADE13: [f64; 14] = [
    1.0,
    0.5,
    0.12,
    0.018333333333333333,
    0.0019927536231884057,
    0.00016304347826086958,
    1.0351966873706003e-05,
    5.175983436853002e-07,
    2.0431513566525008e-08,
    6.306022705717595e-10,
    1.48377004840414e-11,
    2.529153491597966e-13,
    2.8101705462199623e-15,
    1.5440497506703088e-17,
];
const THETA13: f64 = 5.371920351148152;
/// Renormalize during squaring once entries pass this size.
const RESCALE_AT: f64 = 1e100;

/// A matrix together with a natural-log scale: the value is e^{log_scale}·matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LogScaledMatrix {
    pub log_scale: f64,
    pub matrix: CMatrix,
}

impl LogScaledMatrix {
    /// ln ‖·‖₂.
    pub fn log_norm2(&self) -> Result<f64> {
        let n = self.matrix.cols;
        let cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..self.matrix.rows).map(|i| self.matrix.at(i, j)).collect()).collect();
        let s = singular_values_cols(cols, Execution::Sequential)?;
        Ok(self.log_scale + s[0].ln())
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// exp(B) by Padé(13) with 1-norm scaling, squaring with on-the-fly rescaling.
pub fn expm_log_scaled(b: &CMatrix, exec: Execution) -> Result<LogScaledMatrix> {
    let n = b.rows;
    let nrm = b.norm1();
    let s = if nrm > THETA13 { (nrm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = b.scale(Complex64::new(2f64.powi(-s), 0.0));
    let id = CMatrix::identity(n);
    let a2 = a.matmul_with(&a, exec);
    let a4 = a2.matmul_with(&a2, exec);
    let a6 = a4.matmul_with(&a2, exec);
    let c = |k: usize| Complex64::new(PADE13[k], 0.0);
    let lin = |x: &CMatrix, y: &CMatrix, z: &CMatrix, cx: usize, cy: usize, cz: usize| {
        x.scale(c(cx)).add(&y.scale(c(cy))).add(&z.scale(c(cz)))
    };
    let u_inner = a6.matmul_with(&lin(&a6, &a4, &a2, 13, 11, 9), exec).add(&lin(&a6, &a4, &a2, 7, 5, 3)).add(&id.scale(c(1)));
    let u = a.matmul_with(&u_inner, exec);
    let v = a6.matmul_with(&lin(&a6, &a4, &a2, 12, 10, 8), exec).add(&lin(&a6, &a4, &a2, 6, 4, 2)).add(&id.scale(c(0)));
    let mut r = v.sub(&u).solve(&v.add(&u))?;
    let mut log_scale = 0.0;
    for _ in 0..s {
        r = r.matmul_with(&r, exec);
        let m = max_abs(&r);
        if !m.is_finite() {
            return Err(Error::Numerical("propagator overflow during squaring".into()));
        }
        if m > RESCALE_AT {
            r = r.scale(Complex64::new(1.0 / m, 0.0));
            log_scale = 2.0 * log_scale + m.ln();
        } else {
            log_scale *= 2.0;
        }
    }
    if !r.is_finite() {
        return Err(Error::Numerical("non-finite matrix exponential".into()));
    }
    Ok(LogScaledMatrix { log_scale, matrix: r })
}

/// exp(B) in plain floating point.
pub fn expm(b: &CMatrix) -> Result<CMatrix> {
    let e = expm_log_scaled(b, Execution::Sequential)?;
    if e.log_scale == 0.0 {
        return Ok(e.matrix);
    }
    let f = e.log_scale.exp();
    let out = e.matrix.scale(Complex64::new(f, 0.0));
    if !f.is_finite() || !out.is_finite() {
        return Err(Error::Numerical(format!("matrix exponential overflows (ln-scale {:.1})", e.log_scale)));
    }
    Ok(out)
}

fn aplus_dense(eps: EpsilonParam, n: usize) -> Result<CMatrix> {
    let t = build_aplus(eps, n)?;
    let d = t.to_dense();
    Ok(CMatrix { rows: n, cols: n, data: d.into_iter().map(|x| Complex64::new(x, 0.0)).collect() })
}

/// exp(−t·iA₊(ε, N)), log-scaled.
pub fn propagator(eps: EpsilonParam, n: usize, t: f64) -> Result<LogScaledMatrix> {
    propagator_with(eps, n, t, Execution::Sequential)
}

pub fn propagator_with(eps: EpsilonParam, n: usize, t: f64, exec: Execution) -> Result<LogScaledMatrix> {
    let a = aplus_dense(eps, n)?;
    expm_log_scaled(&a.scale(Complex64::new(0.0, -t)), exec)
}

/// Propagated coefficients as e^{log_scale}·coeffs.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledCoeffs {
    pub log_scale: f64,
    pub coeffs: FourierCoeffsFull,
}

fn check_propagate_args(h0: &FourierCoeffsFull, n: usize, t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    if n == 0 {
        return Err(Error::Dimension("truncation N must be at least 1".into()));
    }
    if h0.band() > n {
        let tail = (n as i64 + 1..=h0.band() as i64).any(|k| h0.get(k).norm() > 0.0 || h0.get(-k).norm() > 0.0);
        if tail {
            return Err(Error::Precondition(format!("initial data has band {} > N = {n}", h0.band())));
        }
    }
    Ok(())
}

/// Both blocks at once; the negative-block propagator is the conjugate of the positive one.
pub fn propagate_scaled(h0: &FourierCoeffsFull, eps: EpsilonParam, n: usize, t: f64) -> Result<ScaledCoeffs> {
    check_propagate_args(h0, n, t)?;
    let p = propagator(eps, n, t)?;
    let pos = p.matrix.matvec(h0.with_band(n).positive().as_slice());
    let conj = CMatrix { rows: n, cols: n, data: p.matrix.data.iter().map(|z| z.conj()).collect() };
    let neg = conj.matvec(h0.with_band(n).negative().as_slice());
    let v0 = h0.mean() * (-p.log_scale).exp();
    let coeffs = FourierCoeffsFull::from_blocks(v0, &OneSidedCoeffs::new(pos), &OneSidedCoeffs::new(neg));
    Ok(ScaledCoeffs { log_scale: p.log_scale, coeffs })
}

pub fn propagate(h0: &FourierCoeffsFull, eps: EpsilonParam, n: usize, t: f64) -> Result<FourierCoeffsFull> {
    check_propagate_args(h0, n, t)?;
    if t == 0.0 {
        return Ok(h0.clone());
    }
    let s = propagate_scaled(h0, eps, n, t)?;
    let mut out = if s.log_scale == 0.0 {
        s.coeffs
    } else {
        let f = s.log_scale.exp();
        let c = s.coeffs.scale(Complex64::new(f, 0.0));
        if !f.is_finite() || c.as_slice().iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            let safe = t * 700.0 / s.log_scale;
            return Err(Error::Numerical(format!(
                "propagator overflows at t = {t} (ln-scale {:.1}); try t ≤ {safe:.3e}",
                s.log_scale
            )));
        }
        c
    };
    out.set(0, h0.mean());
    Ok(out)
}

/// Σ c_n e^{−iμ_n t} u_n sampled on an M-point grid (u_n on positive modes).
pub fn harmonic_solution(
    pairs: &[(Complex64, OneSidedCoeffs)],
    coeffs: &[Complex64],
    t: f64,
    grid: usize,
) -> Result<PeriodicGridFunction> {
    if pairs.len() != coeffs.len() {
        return Err(Error::Dimension(format!("{} pairs but {} coefficients", pairs.len(), coeffs.len())));
    }
    harmonic_coeffs(pairs, coeffs, t).and_then(|c| idft(&c, grid))
}

/// Coefficient form of [`harmonic_solution`].
pub fn harmonic_coeffs(pairs: &[(Complex64, OneSidedCoeffs)], coeffs: &[Complex64], t: f64) -> Result<FourierCoeffsFull> {
    let len = pairs.iter().map(|(_, u)| u.len()).max().unwrap_or(0);
    let mut acc = vec![Complex64::new(0.0, 0.0); len];
    for ((mu, u), c) in pairs.iter().zip(coeffs) {
        let f = c * (Complex64::new(0.0, -t) * mu).exp();
        for (a, x) in acc.iter_mut().zip(u.as_slice()) {
            *a += f * x;
        }
    }
    Ok(FourierCoeffsFull::from_blocks(
        Complex64::new(0.0, 0.0),
        &OneSidedCoeffs::new(acc),
        &OneSidedCoeffs::new(vec![Complex64::new(0.0, 0.0); len]),
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorReport {
    pub truncations: Vec<usize>,
    /// ‖exp(−t·iA_N)‖₂; +∞ where the value exceeds the f64 range.
    pub operator_norms: Vec<f64>,
    /// ln ‖exp(−t·iA_N)‖₂, always finite.
    pub log_norms: Vec<f64>,
    /// norm(N_{j+1}) / norm(N_j), from the log norms.
    pub growth_ratios: Vec<f64>,
    pub time: f64,
    pub epsilon: EpsilonParam,
}

pub fn propagator_norm_growth(eps: EpsilonParam, t: f64, truncations: &[usize]) -> Result<PropagatorReport> {
    propagator_norm_growth_with(eps, t, truncations, Execution::default())
}

/// Truncations are processed concurrently; each build is sequential.
pub fn propagator_norm_growth_with(
    eps: EpsilonParam,
    t: f64,
    truncations: &[usize],
    exec: Execution,
) -> Result<PropagatorReport> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    if truncations.iter().any(|&n| n < 8) || truncations.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("truncations must be increasing and at least 8".into()));
    }
    let log_norms = exec
        .map(truncations, |&n| propagator(eps, n, t).and_then(|p| p.log_norm2()))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let operator_norms = log_norms.iter().map(|l| l.exp()).collect();
    let growth_ratios = log_norms.windows(2).map(|w| (w[1] - w[0]).exp()).collect();
    Ok(PropagatorReport { truncations: truncations.to_vec(), operator_norms, log_norms, growth_ratios, time: t, epsilon: eps })
}

/// (Σ (1+k²)^s |v_k|²)^{1/2}.
pub fn sobolev_norm(h: &FourierCoeffsFull, s: f64) -> f64 {
    let b = h.band() as i64;
    (-b..=b).map(|k| (1.0 + (k * k) as f64).powf(s) * h.get(k).norm_sqr()).sum::<f64>().sqrt()
}

/// |v_k| = |k|^{−s} for 1 ≤ |k| ≤ band with uniformly random phases, v₀ = 0.
/// Modes are drawn in the order 1, −1, 2, −2, …, so a smaller band gives a
/// truncation of the same function.
pub fn algebraic_data(band: usize, s: f64, seed: u64) -> FourierCoeffsFull {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = FourierCoeffsFull::zeros(band);
    for k in 1..=band as i64 {
        for sign in [1, -1] {
            let phase: f64 = rng.gen::<f64>() * 2.0 * PI;
            c.set(sign * k, Complex64::from_polar((k as f64).powf(-s), phase));
        }
    }
    c
}

#[derive(Clone, Debug, PartialEq)]
pub struct CauchyWitness {
    pub truncations: Vec<usize>,
    /// ln ‖h_{2N} − h_N‖ (coefficient ℓ² norm) at time t.
    pub log_differences: Vec<f64>,
}

impl CauchyWitness {
    pub fn non_decreasing(&self) -> bool {
        self.log_differences.windows(2).all(|w| w[1] >= w[0])
    }
}

/// Evolve the same k^{−s} data truncated at N and 2N and measure the gap.
pub fn non_cauchy_witness(eps: EpsilonParam, s: f64, t: f64, truncations: &[usize], seed: u64) -> Result<CauchyWitness> {
    let top = truncations.iter().copied().max().unwrap_or(0) * 2;
    let data = algebraic_data(top, s, seed);
    let log_differences = Execution::default()
        .map(truncations, |&n| -> Result<f64> {
            let a = propagate_scaled(&data.with_band(n), eps, n, t)?;
            let b = propagate_scaled(&data.with_band(2 * n), eps, 2 * n, t)?;
            let top = a.log_scale.max(b.log_scale);
            let d = b
                .coeffs
                .scale(Complex64::new((b.log_scale - top).exp(), 0.0))
                .sub(&a.coeffs.scale(Complex64::new((a.log_scale - top).exp(), 0.0)));
            let l2 = d.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            Ok(top + l2.ln())
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    Ok(CauchyWitness { truncations: truncations.to_vec(), log_differences })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_diagonal() {
        let mut b = CMatrix::zeros(2, 2);
        *b.at_mut(0, 0) = Complex64::new(1.0, 0.0);
        *b.at_mut(1, 1) = Complex64::new(0.0, 3.0);
        let e = expm(&b).unwrap();
        assert!((e.at(0, 0) - Complex64::new(1f64.exp(), 0.0)).norm() < 1e-14);
        let d = (e.at(1, 1) - Complex64::new(0.0, 3.0).exp()).norm();
        assert!(d < 1e-14, "{d}");
        assert!(e.at(0, 1).norm() < 1e-15);
    }

    #[test]
    fn negative_time_rejected() {
        let e = EpsilonParam::new(0.5).unwrap();
        let h = FourierCoeffsFull::zeros(4);
        assert!(matches!(propagate(&h, e, 8, -1.0), Err(Error::Domain(_))));
    }
}
