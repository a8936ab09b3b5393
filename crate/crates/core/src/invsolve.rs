//! Inversion of ℓ on mean-zero data: the closed-form quadrature solution and
//! the Galerkin (tridiagonal) solve, plus decay fits for the entries and
//! column norms of A₊⁻¹.
//!
//! The explicit solution is
//!   h(θ) = ∫₀^θ f(t) (1 − r(t, θ)) dt + k₁,   r = (|tan(t/2)| / |tan(θ/2)|)^{1/ε}.
//! All integrals are taken in the variable s = ln tan(t/2), where dt = sin t ds
//! and r = exp((s − s_θ)/ε). Uniform panels in s are geometrically graded toward
//! t = 0 and t = π, and the endpoint behaviour of the integrands becomes
//! exponential decay in s.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::{dft, EpsilonParam, FourierCoeffsFull, OneSidedCoeffs, PeriodicGridFunction};
use crate::linalg::TriLu;
use crate::operator::{build_aplus, TridiagonalMatrix};
use crate::quadrature::GaussLegendre;
use num_complex::Complex64;
use num_traits::Zero;
use std::f64::consts::PI;

/// Relative tolerance on the mean of the right-hand side.
pub const MEAN_ZERO_TOL: f64 = 1e-10;
/// Half-length of the s-interval; e^{-40} is below double precision.
const S_CUT: f64 = 40.0;
/// Accept the explicit solution when the two-resolution k₁ estimate is below this
/// (relative to ‖f‖).
const QUAD_TOL: f64 = 1e-9;

/// (|tan(t/2)| / |tan(θ/2)|)^{1/ε} for 0 ≤ t ≤ θ < π or −π < θ ≤ t ≤ 0.
pub fn weight_ratio(t: f64, theta: f64, eps: EpsilonParam) -> Result<f64> {
    let ordered = (0.0 <= t && t <= theta && theta < PI) || (-PI < theta && theta <= t && t <= 0.0);
    if !ordered {
        return Err(Error::Domain(format!(
            "weight_ratio needs 0 <= t <= theta < pi or -pi < theta <= t <= 0, got t = {t}, theta = {theta}"
        )));
    }
    if t == theta {
        return Ok(1.0);
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let lt = (0.5 * t).tan().abs().ln();
    let lth = (0.5 * theta).tan().abs().ln();
    Ok(((lt - lth) / eps.value()).exp().min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct K1Functional {
    pub value: Complex64,
    pub quadrature_error_estimate: f64,
}

#[derive(Clone, Debug)]
pub struct ExplicitSolution {
    /// h on the grid of the input.
    pub h: PeriodicGridFunction,
    pub k1: K1Functional,
    /// Low-mode Fourier coefficients of h computed by quadrature.
    pub modes: FourierCoeffsFull,
    /// ‖P_K(ℓ[h] − f)‖_{L²} over the modes |m| < K resolved by `modes`.
    pub residual: f64,
    /// ‖h′‖_{L²(−π,π)}.
    pub derivative_norm: f64,
}

/// Checks the mean of `c` and returns a copy with mode 0 removed.
fn project_mean_zero(c: &FourierCoeffsFull) -> Result<FourierCoeffsFull> {
    let scale = c.l2_norm().max(1.0);
    let mean = c.get(0).norm();
    if mean > MEAN_ZERO_TOL * scale {
        return Err(Error::Precondition(format!(
            "right-hand side must have zero mean (f ⊥ 1); mean is {mean:e}"
        )));
    }
    let mut out = c.clone();
    out.set(0, Complex64::zero());
    Ok(out)
}

/// Highest mode whose amplitude is not negligible.
fn effective_band(c: &FourierCoeffsFull) -> usize {
    let tol = 1e-15 * c.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
    (1..=c.band())
        .rev()
        .find(|&k| c.get(k as i64).norm() > tol || c.get(-(k as i64)).norm() > tol)
        .unwrap_or(1)
}

/// f(±t) from its coefficients.
struct Evaluator {
    coeffs: Vec<(Complex64, Complex64)>,
    v0: Complex64,
    reflect: bool,
}

impl Evaluator {
    fn new(c: &FourierCoeffsFull, band: usize, reflect: bool) -> Self {
        let coeffs = (1..=band as i64).map(|k| (c.get(k), c.get(-k))).collect();
        Evaluator { coeffs, v0: c.get(0), reflect }
    }

    fn eval(&self, t: f64) -> Complex64 {
        let t = if self.reflect { -t } else { t };
        let z = Complex64::from_polar(1.0, t);
        let mut zp = Complex64::new(1.0, 0.0);
        let mut s = self.v0;
        for (k, (p, n)) in self.coeffs.iter().enumerate() {
            // refresh the power every 32 steps to bound drift
            zp = if k % 32 == 31 { Complex64::from_polar(1.0, (k + 1) as f64 * t) } else { zp * z };
            s += p * zp + n * zp.conj();
        }
        s
    }
}

#[inline]
fn t_of_s(s: f64) -> f64 {
    2.0 * s.exp().atan()
}

#[inline]
fn sin_t_of_s(s: f64) -> f64 {
    // sin(2 atan e^s) = sech(s)
    1.0 / s.cosh()
}

#[inline]
fn s_of_t(t: f64) -> f64 {
    (0.5 * t).tan().ln()
}

/// Profile of the integral part on one half-line θ ∈ (0, π), at ascending s-targets.
/// Returns (I(θ), J(θ)) with I = ∫₀^θ f (1 − r) dt and J = ∫₀^θ f r dt, plus ∫₀^π f.
fn march(
    f: &Evaluator,
    eps: f64,
    targets: &[f64],
    width: f64,
    gl: &GaussLegendre,
    exec: Execution,
) -> (Vec<(Complex64, Complex64)>, Complex64) {
    // intervals between consecutive breakpoints, each split to at most `width`
    let mut bps = Vec::with_capacity(targets.len() + 2);
    bps.push(-S_CUT);
    bps.extend(targets.iter().copied().filter(|&s| s > -S_CUT));
    bps.push(S_CUT.max(*bps.last().unwrap()));
    let mut intervals = Vec::new();
    for w in bps.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            intervals.push((a, a, true));
            continue;
        }
        let k = ((b - a) / width).ceil().max(1.0) as usize;
        for i in 0..k {
            let lo = a + (b - a) * i as f64 / k as f64;
            let hi = if i + 1 == k { b } else { a + (b - a) * (i + 1) as f64 / k as f64 };
            intervals.push((lo, hi, i + 1 == k));
        }
    }
    let pieces = exec.map(&intervals, |&(a, b, _)| {
        if b <= a {
            return (Complex64::zero(), Complex64::zero());
        }
        let mut df = Complex64::zero();
        let mut dj = Complex64::zero();
        for (s, w) in gl.on(a, b) {
            let g = f.eval(t_of_s(s)) * (sin_t_of_s(s) * w);
            df += g;
            dj += g * ((s - b) / eps).exp();
        }
        (df, dj)
    });
    let mut out = Vec::with_capacity(targets.len());
    let mut big_f = Complex64::zero();
    let mut big_j = Complex64::zero();
    let mut idx = 0;
    let below: Vec<_> = targets.iter().take_while(|&&s| s <= -S_CUT).collect();
    for _ in below {
        out.push((Complex64::zero(), Complex64::zero()));
    }
    for (&(a, b, closes), (df, dj)) in intervals.iter().zip(pieces) {
        big_f += df;
        big_j = big_j * ((a - b) / eps).exp() + dj;
        if closes && out.len() < targets.len() {
            out.push((big_f - big_j, big_j));
            idx += 1;
        }
    }
    let _ = idx;
    out.truncate(targets.len());
    (out, big_f)
}

/// Outer quadrature nodes in s with weights for ∫ dθ = ∫ sin θ(s) ds.
fn outer_nodes(width: f64, gl: &GaussLegendre) -> Vec<(f64, f64)> {
    let k = (2.0 * S_CUT / width).ceil() as usize;
    let h = 2.0 * S_CUT / k as f64;
    let mut v = Vec::with_capacity(k * gl.nodes.len());
    for i in 0..k {
        let a = -S_CUT + h * i as f64;
        v.extend(gl.on(a, a + h));
    }
    v
}

struct HalfSolution {
    /// (θ = t(s), I, J) at outer nodes
    outer: Vec<(f64, f64, Complex64, Complex64)>,
    /// (I, J) at the requested grid targets
    grid: Vec<(Complex64, Complex64)>,
    total: Complex64,
}

fn solve_half(
    fc: &FourierCoeffsFull,
    band: usize,
    reflect: bool,
    eps: f64,
    grid_thetas: &[f64],
    width: f64,
    exec: Execution,
) -> HalfSolution {
    let gl = GaussLegendre::new(16);
    let ev = Evaluator::new(fc, band, reflect);
    let outer = outer_nodes(width, &gl);
    // merge outer nodes and grid targets into one ascending list
    let mut tagged: Vec<(f64, usize, bool)> = outer.iter().enumerate().map(|(i, &(s, _))| (s, i, true)).collect();
    tagged.extend(grid_thetas.iter().enumerate().map(|(i, &t)| (s_of_t(t), i, false)));
    tagged.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.2.cmp(&b.2)).then(a.1.cmp(&b.1)));
    let targets: Vec<f64> = tagged.iter().map(|x| x.0).collect();
    let (vals, total) = march(&ev, eps, &targets, width, &gl, exec);
    let mut out_outer = vec![(0.0, 0.0, Complex64::zero(), Complex64::zero()); outer.len()];
    let mut out_grid = vec![(Complex64::zero(), Complex64::zero()); grid_thetas.len()];
    for (&(s, i, is_outer), &(iv, jv)) in tagged.iter().zip(&vals) {
        if is_outer {
            out_outer[i] = (s, outer[i].1, iv, jv);
        } else {
            out_grid[i] = (iv, jv);
        }
    }
    HalfSolution { outer: out_outer, grid: out_grid, total }
}

fn panel_width(band: usize) -> f64 {
    (6.0 / (band as f64 + 1.0)).min(1.0)
}

/// Solve ℓ[h] = f for mean-zero f by the closed-form quadrature.
pub fn solve_explicit(f: &PeriodicGridFunction, eps: EpsilonParam) -> Result<ExplicitSolution> {
    solve_explicit_with(f, eps, Execution::default())
}

pub fn solve_explicit_with(
    f: &PeriodicGridFunction,
    eps: EpsilonParam,
    exec: Execution,
) -> Result<ExplicitSolution> {
    let c = project_mean_zero(&dft(f))?;
    let band = effective_band(&c);
    let e = eps.value();
    let m = f.len();
    let fine = explicit_core(&c, band, e, m, panel_width(band), exec);
    let coarse = explicit_core(&c, band, e, m, 2.0 * panel_width(band), exec);
    let fnorm = c.l2_norm();
    let est = (fine.k1 - coarse.k1).norm();
    if !(est <= QUAD_TOL * fnorm.max(f64::MIN_POSITIVE)) && fnorm > 0.0 {
        return Err(Error::Accuracy {
            message: "explicit quadrature did not converge under panel refinement".into(),
            estimate: est,
        });
    }
    let k1 = K1Functional { value: fine.k1, quadrature_error_estimate: est };
    let samples: Vec<Complex64> = fine.integral_part.iter().map(|z| z + fine.k1).collect();
    let h = PeriodicGridFunction::new(samples)?;

    // Fourier coefficients of h by the same outer quadrature
    let kmax = (band + 8).min(m / 2 - 1).max(2);
    let mut modes = FourierCoeffsFull::zeros(kmax);
    for k in -(kmax as i64)..=kmax as i64 {
        let mut acc = Complex64::zero();
        for &(theta, w, hv) in &fine.outer_values {
            acc += (hv + fine.k1) * Complex64::from_polar(w, -(k as f64) * theta);
        }
        modes.set(k, acc / (2.0 * PI));
    }
    let lh = crate::grid::apply_ell(&modes, eps);
    let mut res = 0.0;
    for k in -(kmax as i64 - 1)..=(kmax as i64 - 1) {
        res += (lh.get(k) - c.get(k)).norm_sqr();
    }
    let residual = (2.0 * PI * res).sqrt();
    Ok(ExplicitSolution { h, k1, modes, residual, derivative_norm: fine.derivative_norm })
}

struct ExplicitCore {
    k1: Complex64,
    integral_part: Vec<Complex64>,
    /// (θ, dθ-weight, integral part) at outer nodes on both halves
    outer_values: Vec<(f64, f64, Complex64)>,
    derivative_norm: f64,
}

fn explicit_core(
    c: &FourierCoeffsFull,
    band: usize,
    e: f64,
    m: usize,
    width: f64,
    exec: Execution,
) -> ExplicitCore {
    // grid points θ_j = −π + 2πj/M: j = M/2 is θ = 0, j = 0 is θ = −π
    let thetas: Vec<f64> = (0..m).map(|j| crate::grid::grid_theta(j, m)).collect();
    let pos_idx: Vec<usize> = (0..m).filter(|&j| thetas[j] > 0.0 && thetas[j] < PI).collect();
    let neg_idx: Vec<usize> = (0..m).filter(|&j| thetas[j] < 0.0 && thetas[j] > -PI).collect();
    let pos_t: Vec<f64> = pos_idx.iter().map(|&j| thetas[j]).collect();
    let neg_t: Vec<f64> = neg_idx.iter().map(|&j| -thetas[j]).collect();
    let halves = exec.map(&[false, true], |&reflect| {
        let ts = if reflect { &neg_t } else { &pos_t };
        solve_half(c, band, reflect, e, ts, width, Execution::Sequential)
    });
    let (pos, neg) = (&halves[0], &halves[1]);

    let mut integral_part = vec![Complex64::zero(); m];
    for (k, &j) in pos_idx.iter().enumerate() {
        integral_part[j] = pos.grid[k].0;
    }
    // for θ < 0: I_f(θ) = −I_{f(−·)}(−θ)
    for (k, &j) in neg_idx.iter().enumerate() {
        integral_part[j] = -neg.grid[k].0;
    }
    // θ = ±π: the integral part tends to ∫₀^π f
    for (j, t) in thetas.iter().enumerate() {
        if *t <= -PI + 1e-15 || *t >= PI - 1e-15 {
            integral_part[j] = pos.total;
        }
    }

    let mut mean_acc = Complex64::zero();
    let mut dnorm2 = 0.0;
    let mut outer_values = Vec::with_capacity(pos.outer.len() * 2);
    for &(s, w, iv, jv) in &pos.outer {
        let st = sin_t_of_s(s);
        mean_acc += iv * (w * st);
        dnorm2 += jv.norm_sqr() / (e * e * st) * w;
        outer_values.push((t_of_s(s), w * st, iv));
    }
    for &(s, w, iv, jv) in &neg.outer {
        let st = sin_t_of_s(s);
        mean_acc -= iv * (w * st);
        dnorm2 += jv.norm_sqr() / (e * e * st) * w;
        outer_values.push((-t_of_s(s), w * st, -iv));
    }
    let k1 = -mean_acc / (2.0 * PI);
    ExplicitCore { k1, integral_part, outer_values, derivative_norm: dnorm2.sqrt() }
}

/// k₁ such that the explicit solution has zero mean.
pub fn compute_k1(f: &PeriodicGridFunction, eps: EpsilonParam) -> Result<K1Functional> {
    Ok(solve_explicit(f, eps)?.k1)
}

/// Galerkin solve in the exponential basis: A₊ v₊ = −i f₊ on modes 1..N and
/// A₊ v₋ = i f₋ on modes −1..−N (the negative block is −A₊ in |m| order).
pub fn solve_galerkin(f: &FourierCoeffsFull, eps: EpsilonParam, n: usize) -> Result<FourierCoeffsFull> {
    if f.band() > n {
        let tail = (n as i64 + 1..=f.band() as i64).any(|k| f.get(k) != Complex64::zero() || f.get(-k) != Complex64::zero());
        if tail {
            return Err(Error::Precondition(format!(
                "right-hand side band {} exceeds truncation {n}",
                f.band()
            )));
        }
    }
    let f = project_mean_zero(&f.with_band(n))?;
    let a = build_aplus(eps, n)?;
    let lu = factor(&a)?;
    let i = Complex64::new(0.0, 1.0);
    let mut vp: Vec<Complex64> = f.positive().as_slice().iter().map(|z| -i * z).collect();
    let mut vn: Vec<Complex64> = f.negative().as_slice().iter().map(|z| i * z).collect();
    lu.solve_in_place(&mut vp);
    lu.solve_in_place(&mut vn);
    if vp.iter().chain(&vn).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite Galerkin solution".into()));
    }
    Ok(FourierCoeffsFull::from_blocks(Complex64::zero(), &OneSidedCoeffs::new(vp), &OneSidedCoeffs::new(vn)))
}

/// Relative residual of the truncated system on the retained modes.
pub fn galerkin_residual(f: &FourierCoeffsFull, h: &FourierCoeffsFull, eps: EpsilonParam, n: usize) -> f64 {
    let lh = crate::grid::apply_ell(&h.with_band(n), eps);
    let mut num = 0.0;
    // the truncated system drops the coupling from mode ±n to ±(n+1)
    for k in 1..=n as i64 {
        let drop_p = if k == n as i64 {
            let e2 = 0.5 * eps.value();
            Complex64::new(0.0, -1.0) * h.get(k + 1) * (e2 * (k * (k + 1)) as f64)
        } else {
            Complex64::zero()
        };
        num += (lh.get(k) - drop_p - f.get(k)).norm_sqr();
        let drop_n = if k == n as i64 {
            let e2 = 0.5 * eps.value();
            Complex64::new(0.0, 1.0) * h.get(-k - 1) * (e2 * (k * (k + 1)) as f64)
        } else {
            Complex64::zero()
        };
        num += (lh.get(-k) - drop_n - f.get(-k)).norm_sqr();
    }
    let den: f64 = (1..=n as i64).map(|k| f.get(k).norm_sqr() + f.get(-k).norm_sqr()).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

fn factor(a: &TridiagonalMatrix) -> Result<TriLu<f64>> {
    let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
    TriLu::factor(&c(&a.sub), &c(&a.diag), &c(&a.sup))
        .ok_or_else(|| Error::Numerical("singular tridiagonal factorization".into()))
}

fn factor_transposed(a: &TridiagonalMatrix) -> Result<TriLu<f64>> {
    let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
    TriLu::factor(&c(&a.sup), &c(&a.diag), &c(&a.sub))
        .ok_or_else(|| Error::Numerical("singular tridiagonal factorization".into()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyReport {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// ‖h′‖ / (|k₁| + ‖f‖) for each sample, with h from the Galerkin solve at
/// truncation N. Here k₁ = h(0), the constant in the closed form.
pub fn energy_estimate_check(samples: &[FourierCoeffsFull], eps: EpsilonParam, n: usize) -> Result<EnergyReport> {
    let mut ratios = Vec::with_capacity(samples.len());
    for f in samples {
        let fnorm = f.l2_norm();
        if fnorm == 0.0 {
            ratios.push(0.0);
            continue;
        }
        let h = solve_galerkin(f, eps, n)?;
        let b = h.band() as i64;
        let dnorm = (2.0 * PI * (-b..=b).map(|k| (k * k) as f64 * h.get(k).norm_sqr()).sum::<f64>()).sqrt();
        let k1: Complex64 = (-b..=b).map(|k| h.get(k)).sum();
        ratios.push(dnorm / (k1.norm() + fnorm));
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(EnergyReport { ratios, max_ratio })
}

/// Least-squares power law |y| ≈ C n^p on log-log axes.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    pub intercept: f64,
    /// RMS deviation in log space.
    pub fit_residual: f64,
    pub sample_range: (usize, usize),
    pub inconclusive: bool,
}

pub const FIT_RESIDUAL_LIMIT: f64 = 0.2;

pub fn fit_power_law(ns: &[usize], values: &[f64]) -> DecayFit {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(&n, &v)| ((n as f64).ln(), v.ln()))
        .collect();
    let range = (ns.first().copied().unwrap_or(0), ns.last().copied().unwrap_or(0));
    if pts.len() < 3 {
        return DecayFit {
            exponent: f64::NAN,
            intercept: f64::NAN,
            fit_residual: f64::INFINITY,
            sample_range: range,
            inconclusive: true,
        };
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / k).sqrt();
    DecayFit {
        exponent: slope,
        intercept,
        fit_residual: rms,
        sample_range: range,
        inconclusive: rms > FIT_RESIDUAL_LIMIT,
    }
}

/// Columns A₊(2N)⁻¹ e_n for the requested n, each restricted to its first N entries.
pub fn inverse_columns(eps: EpsilonParam, n: usize, cols: &[usize], exec: Execution) -> Result<Vec<Vec<f64>>> {
    let a = build_aplus(eps, 2 * n)?;
    let lu = factor(&a)?;
    Ok(exec.map(cols, |&c| {
        let mut x = vec![Complex64::zero(); 2 * n];
        x[c - 1] = Complex64::new(1.0, 0.0);
        lu.solve_in_place(&mut x);
        x.truncate(n);
        x.into_iter().map(|z| z.re).collect()
    }))
}

/// Rows e_mᵀ A₊(2N)⁻¹, each restricted to its first N entries.
pub fn inverse_rows(eps: EpsilonParam, n: usize, rows: &[usize], exec: Execution) -> Result<Vec<Vec<f64>>> {
    let a = build_aplus(eps, 2 * n)?;
    let lu = factor_transposed(&a)?;
    Ok(exec.map(rows, |&r| {
        let mut x = vec![Complex64::zero(); 2 * n];
        x[r - 1] = Complex64::new(1.0, 0.0);
        lu.solve_in_place(&mut x);
        x.truncate(n);
        x.into_iter().map(|z| z.re).collect()
    }))
}

fn fit_window(n: usize) -> Vec<usize> {
    ((n / 8).max(1)..=(n / 2).max(1)).collect()
}

/// Power-law fit of ‖A₊⁻¹ e_n‖ over n ∈ [N/8, N/2].
pub fn column_norm_decay(eps: EpsilonParam, n: usize) -> Result<DecayFit> {
    column_norm_decay_with(eps, n, Execution::default())
}

pub fn column_norm_decay_with(eps: EpsilonParam, n: usize, exec: Execution) -> Result<DecayFit> {
    if n < 8 {
        return Err(Error::Dimension(format!("column_norm_decay needs N >= 8, got {n}")));
    }
    let ns = fit_window(n);
    let cols = inverse_columns(eps, n, &ns, exec)?;
    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut fit = fit_power_law(&ns, &norms);
    fit.inconclusive |= n < 64;
    Ok(fit)
}

/// Index of the fixed row (resp. column) used by [`entry_decay`].
pub const ENTRY_PROBE_INDEX: usize = 8;

/// Fits of |ρ_{m,n}| away from the diagonal: fixed row m = 8 against n ∈ [N/8, N/2]
/// (the m ≤ n regime), and fixed column n = 8 against m ∈ [N/8, N/2] (n < m).
pub fn entry_decay(eps: EpsilonParam, n: usize) -> Result<(DecayFit, DecayFit)> {
    entry_decay_with(eps, n, Execution::default())
}

pub fn entry_decay_with(eps: EpsilonParam, n: usize, exec: Execution) -> Result<(DecayFit, DecayFit)> {
    if n < 2 * ENTRY_PROBE_INDEX {
        return Err(Error::Dimension(format!("entry_decay needs N >= {}, got {n}", 2 * ENTRY_PROBE_INDEX)));
    }
    let ns = fit_window(n);
    let row = &inverse_rows(eps, n, &[ENTRY_PROBE_INDEX], exec)?[0];
    let col = &inverse_columns(eps, n, &[ENTRY_PROBE_INDEX], exec)?[0];
    let rv: Vec<f64> = ns.iter().map(|&k| row[k - 1].abs()).collect();
    let cv: Vec<f64> = ns.iter().map(|&k| col[k - 1].abs()).collect();
    let mut a = fit_power_law(&ns, &rv);
    let mut b = fit_power_law(&ns, &cv);
    a.inconclusive |= n < 128;
    b.inconclusive |= n < 128;
    Ok((a, b))
}

/// Ratio of the two sides of the weighted Hardy inequality
///   ∫₀^δ θ^{−2−2/ε} (∫₀^θ f(t) t^{1/ε} dt)² dθ  ≤  C ∫₀^δ f²,
/// computed on `panels` geometrically graded panels.
pub fn hardy_ratio<F: Fn(f64) -> f64>(f: F, delta: f64, eps: EpsilonParam, panels: usize) -> f64 {
    let a = 1.0 / eps.value();
    let gl = GaussLegendre::new(16);
    // geometric panels [δ q^{k+1}, δ q^k], plus [0, δ q^panels]
    let q = (1e-12f64).powf(1.0 / panels as f64);
    let mut bps: Vec<f64> = (0..=panels).map(|k| delta * q.powi((panels - k) as i32)).collect();
    bps.insert(0, 0.0);
    let mut g_acc = 0.0;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for w in bps.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // inner cumulative integral at each outer node: sub-integrate from lo
        for (x, wx) in gl.on(lo, hi) {
            let g_inner = g_acc + gl.integrate(lo, x, |t| f(t) * t.powf(a));
            lhs += wx * x.powf(-2.0 - 2.0 * a) * g_inner * g_inner;
            rhs += wx * f(x) * f(x);
        }
        g_acc += gl.integrate(lo, hi, |t| f(t) * t.powf(a));
    }
    if rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// Sharp constant of the weighted Hardy inequality above on (0, ∞): 4/(1 + 2/ε)².
pub fn hardy_constant(eps: EpsilonParam) -> f64 {
    let d = 1.0 + 2.0 / eps.value();
    4.0 / (d * d)
}

/// Decay fits of |f_k| = k^{−s} and of the Galerkin solution's positive modes
/// over k ∈ [N/16, N/4].
pub fn regularity_shift(eps: EpsilonParam, s: f64, n: usize) -> Result<(DecayFit, DecayFit)> {
    let mut f = FourierCoeffsFull::zeros(n);
    for k in 1..=n as i64 {
        let a = (k as f64).powf(-s);
        f.set(k, Complex64::new(a, 0.0));
        f.set(-k, Complex64::new(a, 0.0));
    }
    let h = solve_galerkin(&f, eps, n)?;
    let ks: Vec<usize> = ((n / 16).max(1)..=(n / 4).max(2)).collect();
    let fv: Vec<f64> = ks.iter().map(|&k| f.get(k as i64).norm()).collect();
    let hv: Vec<f64> = ks.iter().map(|&k| h.get(k as i64).norm()).collect();
    Ok((fit_power_law(&ks, &fv), fit_power_law(&ks, &hv)))
}
