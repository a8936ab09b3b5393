//! Eigenvalues and eigenvectors of A₊.
//!
//! Plain finite sections of A₊ converge slowly (the eigenvectors decay only
//! algebraically, like m^{−1−1/ε}) and their upper spectrum is polluted by
//! spurious complex pairs. The stabilized spectrum therefore works with
//! tail-closed sections: an eigenvector is the solution of the three-term
//! recurrence
//!   (ε/2)m(m−1)v_{m−1} + (m − μ)v_m − (ε/2)m(m+1)v_{m+1} = 0,   v_0 = 0,
//! that is also the minimal (decaying) solution at infinity. The minimal
//! solution is generated by backward recurrence from depth M = K·N, started
//! with the asymptotic ratio v_{m+1}/v_m ~ −(1 + a₁/m + a₂/m² + a₃/m³ + a₄/m⁴).
//! The Casoratian χ(μ) of the forward and backward solutions vanishes exactly at
//! the eigenvalues of the section of size N closed by this tail; its roots are
//! refined by complex Newton iteration, so reality is an outcome, not an
//! assumption. Roots are accepted as stabilized when the closures at N and 2N
//! reproduce them.

use crate::dd::Dd;
use crate::qd::Qd;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::{EpsilonParam, OneSidedCoeffs};
use crate::linalg::{hessenberg_eigenvalues, TriLu};
use crate::operator::{build_aplus, TridiagonalMatrix};
use crate::scalar::{cabs, cfrom, cnorm, cto, Real};
use num_complex::{Complex, Complex64};
use std::ops::{Add, Div, Mul, Sub};

/// Relative agreement required between truncations N and 2N.
pub const MATCH_TOL: f64 = 1e-8;
/// |Im μ| / |μ| allowed for a stabilized eigenvalue.
pub const REALITY_TOL: f64 = 1e-8;
/// Minimal pairwise gap, relative to max |μ|.
pub const GAP_TOL: f64 = 1e-6;
/// Depth of the tail closure in units of N.
pub const TAIL_FACTOR: usize = 8;
/// Upper bound on the number of roots searched per truncation.
pub const DEFAULT_MAX_COUNT: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecisionMode {
    Standard,
    Extended,
}

impl PrecisionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PrecisionMode::Standard => "standard",
            PrecisionMode::Extended => "extended",
        }
    }
}

impl std::str::FromStr for PrecisionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" => Ok(PrecisionMode::Standard),
            "extended" => Ok(PrecisionMode::Extended),
            other => Err(Error::Domain(format!("unknown precision mode '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenRecord {
    pub mu: Complex64,
    /// Low-order part of μ in extended mode (μ = mu + mu_lo in double-double).
    pub mu_lo: Complex64,
    /// ‖(T_c − μ)v‖ / ‖T_c‖_F for the closed section T_c and unit eigenvector v.
    pub residual: f64,
    pub stabilized: bool,
    pub gap_to_nearest: f64,
}

impl EigenRecord {
    pub fn mu_dd(&self) -> Complex<Dd> {
        Complex::new(Dd::from_sum(self.mu.re, self.mu_lo.re), Dd::from_sum(self.mu.im, self.mu_lo.im))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub records: Vec<EigenRecord>,
    pub truncation: usize,
    pub epsilon: EpsilonParam,
    pub precision_mode: PrecisionMode,
}

impl Spectrum {
    pub fn stabilized(&self) -> impl Iterator<Item = &EigenRecord> {
        self.records.iter().filter(|r| r.stabilized)
    }

    pub fn stabilized_count(&self) -> usize {
        self.stabilized().count()
    }

    /// Unit eigenvectors (length `len`) of the stabilized eigenvalues, in order.
    pub fn eigenvectors<R>(&self, len: usize) -> Result<Vec<Vec<Complex<R>>>>
    where
        R: RecFieldReal + RecField<R>,
        Complex<R>: RecField<R>,
    {
        self.stabilized()
            .map(|r| {
                let mu: Complex<R> = R::lift_mu(r);
                closed_eigenvector(self.epsilon, mu, len)
            })
            .collect()
    }
}

/// Real scalar types whose stored eigenvalue can be recovered from a record.
pub trait RecFieldReal: Real {
    fn lift_mu(r: &EigenRecord) -> Complex<Self>;
}

impl RecFieldReal for f64 {
    fn lift_mu(r: &EigenRecord) -> Complex<f64> {
        r.mu
    }
}

impl RecFieldReal for Dd {
    fn lift_mu(r: &EigenRecord) -> Complex<Dd> {
        r.mu_dd()
    }
}

/// All eigenvalues of a real tridiagonal matrix by Francis double-shift QR,
/// sorted by real part.
pub fn eigenvalues_qr(t: &TridiagonalMatrix) -> Result<Vec<Complex64>> {
    let mut a = t.to_dense();
    let mut ev = hessenberg_eigenvalues(&mut a, t.n())?;
    sort_by_re(&mut ev);
    Ok(ev)
}

/// Same as [`eigenvalues_qr`] in double-double arithmetic.
pub fn eigenvalues_qr_extended(t: &TridiagonalMatrix) -> Result<Vec<Complex<Dd>>> {
    let mut a: Vec<Dd> = t.to_dense().into_iter().map(Dd::from).collect();
    let mut ev = hessenberg_eigenvalues(&mut a, t.n())?;
    ev.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap().then(x.im.partial_cmp(&y.im).unwrap()));
    Ok(ev)
}

fn sort_by_re(ev: &mut [Complex64]) {
    ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
}

/// Unit eigenvector of T for (an approximation of) its eigenvalue μ, by inverse
/// iteration with one restart.
pub fn eigenvector(t: &TridiagonalMatrix, mu: Complex64) -> Result<OneSidedCoeffs> {
    let v = inverse_iteration::<f64>(&t.diag, &t.sup, &t.sub, mu, None)?;
    Ok(OneSidedCoeffs::new(v))
}

/// ‖Tv − μv‖ / ‖T‖_F.
pub fn eigen_residual(t: &TridiagonalMatrix, mu: Complex64, v: &OneSidedCoeffs) -> f64 {
    let tv = t.mul_slice(v.as_slice());
    let r: Vec<Complex64> = tv.iter().zip(v.as_slice()).map(|(a, b)| a - b * mu).collect();
    cnorm(&r) / t.norm_fro()
}

/// Inverse iteration on the tridiagonal (diag + optional complex correction of
/// the last diagonal entry) in precision R.
fn inverse_iteration<R: Real>(
    diag: &[f64],
    sup: &[f64],
    sub: &[f64],
    mu: Complex<R>,
    last_correction: Option<Complex<R>>,
) -> Result<Vec<Complex<R>>> {
    let n = diag.len();
    let z = |x: f64| Complex::new(R::from_f64(x), R::zero());
    let build = |shift: Complex<R>| {
        let mut d: Vec<Complex<R>> = diag.iter().map(|&x| z(x) - shift).collect();
        if let Some(c) = last_correction {
            d[n - 1] = d[n - 1] + c;
        }
        let lo: Vec<Complex<R>> = sub.iter().map(|&x| z(x)).collect();
        let up: Vec<Complex<R>> = sup.iter().map(|&x| z(x)).collect();
        TriLu::factor(&lo, &d, &up)
    };
    let lu = match build(mu) {
        Some(lu) => lu,
        None => {
            // exactly singular shift: perturb once
            let scale = R::from_f64(1e-13) * (R::one() + cabs(mu));
            build(mu + Complex::new(scale, R::zero()))
                .ok_or_else(|| Error::Numerical("inverse iteration breakdown after shift perturbation".into()))?
        }
    };
    let mut v: Vec<Complex<R>> = (0..n).map(|k| z(1.0 + 0.1 * ((k % 7) as f64))).collect();
    for _ in 0..3 {
        lu.solve_in_place(&mut v);
        let nrm = cnorm(&v);
        if !(nrm.to_f64() > 0.0) || !nrm.to_f64().is_finite() {
            return Err(Error::Numerical("inverse iteration produced a non-finite vector".into()));
        }
        for x in v.iter_mut() {
            *x = Complex::new(x.re / nrm, x.im / nrm);
        }
    }
    // fix the phase so that the first component is real positive
    let p = v.iter().copied().find(|x| cabs(*x) > R::zero()).unwrap_or(Complex::new(R::one(), R::zero()));
    let ap = cabs(p);
    let phase = Complex::new(p.re / ap, -p.im / ap);
    Ok(v.into_iter().map(|x| x * phase).collect())
}

// ---------------------------------------------------------------------------
// Tail-closed characteristic function

/// Scalar fields the recurrences run in: real (scanning) or complex (Newton).
pub trait RecField<R: Real>:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Mul<R, Output = Self> + Send + Sync
{
    fn lift(r: R) -> Self;
    fn mag(self) -> f64;
}

macro_rules! rec_field {
    ($r:ty) => {
        impl RecField<$r> for $r {
            #[inline]
            fn lift(r: $r) -> Self {
                r
            }
            #[inline]
            fn mag(self) -> f64 {
                Real::to_f64(self).abs()
            }
        }
        impl RecField<$r> for Complex<$r> {
            #[inline]
            fn lift(r: $r) -> Self {
                Complex::new(r, <$r as num_traits::Zero>::zero())
            }
            #[inline]
            fn mag(self) -> f64 {
                Real::to_f64(self.re).abs() + Real::to_f64(self.im).abs()
            }
        }
    };
}
rec_field!(f64);
rec_field!(Dd);
rec_field!(Qd);

/// Final root polishing. Newton on χ at the working precision stalls at a
/// noise floor that grows roughly like exp(c√μ): both solutions in the
/// Casoratian carry the eigenvector's growth from m = 1 to its peak, and the
/// closure makes the μ-derivative small against them. Extended mode therefore
/// finishes each root in quad-double, and keeps scanning in quad-double once
/// the double-double sign pattern of χ turns to noise.
pub trait Refine: Real + Sized {
    fn refine(z: Complex<Self>, eps: f64, n: usize, tail: usize) -> Option<Complex<Self>>;
    /// Roots in [from, mu_max] found at a wider precision (none by default).
    fn extend(_eps: f64, _n: usize, _tail: usize, _from: f64, _mu_max: f64, _count: usize) -> Vec<Complex<Self>> {
        Vec::new()
    }
}

impl Refine for f64 {
    fn refine(z: Complex<f64>, _eps: f64, _n: usize, _tail: usize) -> Option<Complex<f64>> {
        Some(z)
    }
}

fn narrow(z: Complex<Qd>) -> Complex<Dd> {
    Complex::new(z.re.to_dd(), z.im.to_dd())
}

impl Refine for Dd {
    fn refine(z: Complex<Dd>, eps: f64, n: usize, tail: usize) -> Option<Complex<Dd>> {
        let seed = Complex::new(Qd::from(z.re), Qd::from(z.im));
        newton(seed, Qd::from(eps), n, tail, 8).map(|r| narrow(r.mu))
    }

    fn extend(eps: f64, n: usize, tail: usize, from: f64, mu_max: f64, count: usize) -> Vec<Complex<Dd>> {
        let e = Qd::from(eps);
        let seeds = scan_seeds(e, n, tail, from, mu_max, count, 0.25, 4);
        seeds.into_iter().filter_map(|s| newton(s, e, n, tail, 16)).map(|r| narrow(r.mu)).collect()
    }
}

const BIG: f64 = 1.0e150;
const RESCALE: f64 = 1.0e-150;

/// Maximum order of the asymptotic series for the tail ratio.
const SERIES_ORDER: usize = 32;

/// Coefficients a_k (a_0 = 1) of the minimal-solution ratio
/// w_{m+1}/w_m ~ −Σ a_k m^{−k}, with their μ-derivatives.
///
/// With x = 1/m the ratio equation b_m/r_{m−1} + (m − μ) − c_m r_m = 0 becomes
/// (1 + x)S(x) − (1 − x)/S(x/(1 − x)) + (2/ε)(x − μx²) = 0, which fixes a_n
/// from a_0..a_{n−1}: its x^n coefficient is affine in a_n with slope 2.
pub fn ratio_series<R: Real, T: RecField<R>>(eps: R, mu: T, order: usize) -> (Vec<T>, Vec<T>) {
    let zero = T::lift(R::zero());
    let half = R::from_f64(0.5);
    let two_e = R::from_f64(2.0) / eps;
    // Pascal rows: binom[n][k] = C(n, k)
    let mut binom = vec![vec![1.0f64]];
    for n in 1..order {
        let prev = &binom[n - 1];
        let row: Vec<f64> = (0..=n).map(|k| if k == 0 || k == n { 1.0 } else { prev[k - 1] + prev[k] }).collect();
        binom.push(row);
    }
    let mut a = vec![T::lift(R::one())];
    let mut da = vec![zero];
    let mut u = vec![T::lift(R::one())];
    let mut du = vec![zero];
    let mut v = vec![T::lift(R::one())];
    let mut dv = vec![zero];
    for n in 1..=order {
        // U_n without the a_n term: Σ_{k<n} a_k C(n−1, n−k)
        let (mut un, mut dun) = (zero, zero);
        for k in 1..n {
            let c = R::from_f64(binom[n - 1][n - k]);
            un = un + a[k] * c;
            dun = dun + da[k] * c;
        }
        let (mut vn, mut dvn) = (zero, zero);
        for j in 1..n {
            vn = vn - u[j] * v[n - j];
            dvn = dvn - (du[j] * v[n - j] + u[j] * dv[n - j]);
        }
        vn = vn - un;
        dvn = dvn - dun;
        let (g, dg) = match n {
            1 => (T::lift(two_e), zero),
            2 => (zero - mu * two_e, zero - T::lift(two_e)),
            _ => (zero, zero),
        };
        let an = (zero - (a[n - 1] - vn + v[n - 1] + g)) * half;
        let dan = (zero - (da[n - 1] - dvn + dv[n - 1] + dg)) * half;
        a.push(an);
        da.push(dan);
        u.push(un + an);
        du.push(dun + dan);
        v.push(vn - an);
        dv.push(dvn - dan);
    }
    (a, da)
}

/// Asymptotic ratio w_{m+1}/w_m of the minimal solution and its μ-derivative,
/// summed until the terms reach working precision or their envelope turns up.
pub fn asymptotic_ratio<R: Real, T: RecField<R>>(m: usize, eps: R, mu: T) -> (T, T) {
    let order = if R::UNIT_ROUNDOFF < 1e-40 { 2 * SERIES_ORDER } else { SERIES_ORDER };
    let (a, da) = ratio_series(eps, mu, order);
    let x = R::one() / R::from_f64(m as f64);
    let mut s = T::lift(R::one());
    let mut ds = T::lift(R::zero());
    let mut xp = R::one();
    let mut smallest = f64::INFINITY;
    for k in 1..a.len() {
        xp = xp * x;
        let term = a[k] * xp;
        let mag = term.mag();
        // single coefficients can dip near zero, so only a clear upturn of
        // the envelope marks the divergent part
        if mag > 1e3 * smallest || mag <= R::UNIT_ROUNDOFF * s.mag() * 1e-3 {
            break;
        }
        smallest = smallest.min(mag);
        s = s + term;
        ds = ds + da[k] * xp;
    }
    let z = T::lift(R::zero());
    (z - s, z - ds)
}

/// Matching index for the two recursions. Below m ≈ √(μ/ε) the local ratios
/// separate strongly: the regular solution rides the growing branch forward and
/// the minimal solution, carried back through the weakly split zone past μ,
/// picks up the other one, so their Casoratian carries no cancellation.
pub fn split_index(mu_abs: f64, eps: f64, depth: usize) -> usize {
    let ms = ((mu_abs / eps).sqrt().ceil() as usize).saturating_add(2);
    ms.max(2).min(depth / 2)
}

/// χ(μ) and χ′(μ) for the section of size N closed at depth `tail` (≥ N).
pub fn characteristic<R: Real, T: RecField<R>>(mu: T, eps: R, n: usize, tail: usize) -> (T, T) {
    let zero = T::lift(R::zero());
    let half_e = eps * R::from_f64(0.5);
    let ms = split_index(mu.mag(), eps.to_f64(), tail.max(4 * n));
    // forward from v_0 = 0, v_1 = 1
    let (mut vm1, mut v) = (zero, T::lift(R::one()));
    let (mut dvm1, mut dv) = (zero, zero);
    for m in 1..=ms {
        let mf = R::from_f64(m as f64);
        let c = half_e * mf * (mf + R::one());
        let b = half_e * mf * (mf - R::one());
        let diag = T::lift(mf) - mu;
        let vn = (diag * v + vm1 * b) * (R::one() / c);
        let dvn = (diag * dv - v + dvm1 * b) * (R::one() / c);
        vm1 = v;
        v = vn;
        dvm1 = dv;
        dv = dvn;
        if v.mag() > BIG || vm1.mag() > BIG {
            let s = R::from_f64(RESCALE);
            v = v * s;
            vm1 = vm1 * s;
            dv = dv * s;
            dvm1 = dvm1 * s;
        }
    }
    // now vm1 = v_{ms}, v = v_{ms+1}
    let depth = tail.max(ms + 2);
    let (rho, drho) = asymptotic_ratio(depth, eps, mu);
    // backward: w_{depth} = 1, w_{depth+1} = ρ
    let (mut w, mut wp1) = (T::lift(R::one()), rho);
    let (mut dw, mut dwp1) = (zero, drho);
    for m in (ms + 1..=depth).rev() {
        let mf = R::from_f64(m as f64);
        let c = half_e * mf * (mf + R::one());
        let b = half_e * mf * (mf - R::one());
        let diag = T::lift(mf) - mu;
        let wm1 = (wp1 * c - diag * w) * (R::one() / b);
        let dwm1 = (dwp1 * c + w - diag * dw) * (R::one() / b);
        wp1 = w;
        w = wm1;
        dwp1 = dw;
        dw = dwm1;
        if w.mag() > BIG || wp1.mag() > BIG {
            let s = R::from_f64(RESCALE);
            w = w * s;
            wp1 = wp1 * s;
            dw = dw * s;
            dwp1 = dwp1 * s;
        }
    }
    // w = w_{ms}, wp1 = w_{ms+1}
    let chi = v * w - vm1 * wp1;
    let dchi = dv * w + v * dw - dvm1 * wp1 - vm1 * dwp1;
    // the Casoratian alternates in sign with the matching index
    if ms % 2 == 1 {
        let z = T::lift(R::zero());
        (z - chi, z - dchi)
    } else {
        (chi, dchi)
    }
}

/// Ratio w_{L+1}/w_L of the minimal solution at index L, from depth `tail`.
pub fn tail_ratio<R: Real, T: RecField<R>>(mu: T, eps: R, l: usize, tail: usize) -> T {
    let half_e = eps * R::from_f64(0.5);
    let depth = tail.max(l + 2);
    let (mut r, _) = asymptotic_ratio(depth, eps, mu);
    // r_m = w_{m+1}/w_m;  r_{m−1} = b/(c r_m − (m − μ))
    for m in (l + 1..=depth).rev() {
        let mf = R::from_f64(m as f64);
        let c = half_e * mf * (mf + R::one());
        let b = half_e * mf * (mf - R::one());
        let den = r * c - (T::lift(mf) - mu);
        r = T::lift(b) / den;
    }
    r
}

/// Unit eigenvector of length `len` for eigenvalue μ of the tail-closed operator:
/// inverse iteration on A₊(len) with its last diagonal entry corrected by the
/// closure −(ε/2)L(L+1)ρ_L(μ).
pub fn closed_eigenvector<R: Real + RecField<R>>(eps: EpsilonParam, mu: Complex<R>, len: usize) -> Result<Vec<Complex<R>>>
where
    Complex<R>: RecField<R>,
{
    let a = build_aplus(eps, len)?;
    let e = R::from_f64(eps.value());
    let rho: Complex<R> = tail_ratio(mu, e, len, TAIL_FACTOR * len);
    let l = R::from_f64(len as f64);
    let corr = rho * (-(e * R::from_f64(0.5) * l * (l + R::one())));
    inverse_iteration(&a.diag, &a.sup, &a.sub, mu, Some(corr))
}

/// Residual ‖(T_c − μ)v‖ / ‖T_c‖_F of a closed-section eigenpair.
fn closed_residual<R: Real>(eps: EpsilonParam, mu: Complex<R>, v: &[Complex<R>]) -> f64
where
    Complex<R>: RecField<R>,
{
    let len = v.len();
    let a = build_aplus(eps, len).expect("len >= 1");
    let e = R::from_f64(eps.value());
    let rho: Complex<R> = tail_ratio(mu, e, len, TAIL_FACTOR * len);
    let l = R::from_f64(len as f64);
    let corr = rho * (-(e * R::from_f64(0.5) * l * (l + R::one())));
    let z = |x: f64| Complex::new(R::from_f64(x), R::zero());
    let mut r = Vec::with_capacity(len);
    for i in 0..len {
        let mut s = v[i] * (z(a.diag[i]) - mu);
        if i + 1 == len {
            s = s + v[i] * corr;
        }
        if i > 0 {
            s = s + v[i - 1] * z(a.sub[i - 1]);
        }
        if i + 1 < len {
            s = s + v[i + 1] * z(a.sup[i]);
        }
        r.push(s);
    }
    let tn = (a.norm_fro().powi(2) + cabs(corr).to_f64().powi(2)).sqrt();
    cnorm(&r).to_f64() / tn
}

/// Outcome of Newton refinement of one seed.
#[derive(Clone, Copy, Debug)]
struct Root<R: Real> {
    mu: Complex<R>,
    /// Converged to working precision rather than stalling at the noise floor.
    clean: bool,
}

fn newton<R: Real>(seed: Complex<R>, eps: R, n: usize, tail: usize, max_iter: usize) -> Option<Root<R>>
where
    Complex<R>: RecField<R>,
{
    let mut z = seed;
    let u = R::UNIT_ROUNDOFF;
    let mut prev_step = f64::INFINITY;
    let mut stalls = 0;
    for it in 0..max_iter {
        let (f, df) = characteristic::<R, Complex<R>>(z, eps, n, tail);
        if df.mag() == 0.0 || !df.mag().is_finite() || !f.mag().is_finite() {
            return None;
        }
        let mut step = f / df;
        let zabs = cabs(z).to_f64().max(1.0);
        // keep steps below a fraction of the local eigenvalue spacing
        let clip = 0.25 * (2.0 * eps.to_f64() * zabs).sqrt();
        let sabs = cabs(step).to_f64();
        if sabs > clip {
            step = step * R::from_f64(clip / sabs);
        }
        z = z - step;
        let s = cabs(step).to_f64();
        // quad-double results are rounded to double-double, so stop well short of 2^-209
        if s <= (8.0 * u).max(1e-36) * zabs {
            return Some(Root { mu: z, clean: true });
        }
        if it >= 3 && s >= 0.5 * prev_step && s < 1e-5 * zabs {
            // at the noise floor: no further contraction
            stalls += 1;
            if stalls >= 2 {
                return Some(Root { mu: z, clean: false });
            }
        }
        prev_step = s;
    }
    None
}

/// Seeds for the roots of χ on [1, μ_max]: real sign changes of χ (narrowed by
/// bisection), offset off the real axis so Newton is free to leave it.
/// Sign changes of χ on [from, mu_max], stepping `step`·√(2εμ) (a fraction
/// of the local eigenvalue spacing) and bisecting `bisect` times.
#[allow(clippy::too_many_arguments)]
fn scan_seeds<R: Real>(
    eps: R,
    n: usize,
    tail: usize,
    from: f64,
    mu_max: f64,
    max_count: usize,
    step: f64,
    bisect: usize,
) -> Vec<Complex<R>>
where
    R: RecField<R>,
{
    let e = eps.to_f64();
    let chi = |x: f64| characteristic::<R, R>(R::from_f64(x), eps, n, tail).0;
    let sgn = |x: R| x > R::zero();
    let mut seeds = Vec::new();
    let mut a = from;
    let mut fa = chi(a);
    while a < mu_max && seeds.len() < max_count {
        let h = step * (2.0 * e * a).sqrt().max(0.25);
        let b = (a + h).min(mu_max);
        let fb = chi(b);
        if sgn(fa) != sgn(fb) {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..bisect {
                let mid = 0.5 * (lo + hi);
                let fm = chi(mid);
                if sgn(fm) == sgn(flo) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let mid = 0.5 * (lo + hi);
            let off = 0.1 * (hi - lo) + 1e-6 * mid;
            seeds.push(Complex::new(R::from_f64(mid), R::from_f64(off)));
        }
        a = b;
        fa = fb;
    }
    seeds
}

/// Distinct roots of χ at truncation N, sorted by real part.
fn closed_roots<R: Refine + RecField<R>>(eps: EpsilonParam, n: usize, max_count: usize, exec: Execution) -> Vec<Complex<R>>
where
    Complex<R>: RecField<R>,
{
    let e = R::from_f64(eps.value());
    let tail = TAIL_FACTOR * n;
    let mu_max = eps.value() * ((n as f64 - 3.0).max(1.0)).powi(2) / 2.0;
    let mut seeds = scan_seeds(e, n, tail, 1.0, mu_max, max_count, 0.08, 12);
    // raw-section eigenvalues as extra seeds (complex ones included)
    if let Ok(a) = build_aplus(eps, n.min(64)) {
        if let Ok(ev) = eigenvalues_qr(&a) {
            let top = seeds.last().map(|s| s.re.to_f64()).unwrap_or(mu_max);
            seeds.extend(ev.into_iter().filter(|z| z.re <= top).map(cfrom::<R>));
        }
    }
    let found: Vec<Option<Root<R>>> = exec.map(&seeds, |&s| newton(s, e, n, tail, 40));
    // above the first nearly real seed that failed, the scan is reading noise
    let ceiling = seeds
        .iter()
        .zip(&found)
        .filter(|(s, r)| r.is_none() && s.im.to_f64().abs() < 1e-3 * cabs(**s).to_f64())
        .map(|(s, _)| s.re.to_f64())
        .fold(mu_max, f64::min);
    let kept: Vec<Root<R>> = found.into_iter().flatten().filter(|r| r.mu.re.to_f64() < ceiling).collect();
    let found: Vec<Option<Complex<R>>> =
        exec.map(&kept, |r| if r.clean { Some(r.mu) } else { R::refine(r.mu, eps.value(), n, tail) });
    let mut roots: Vec<Complex<R>> = Vec::new();
    let push = |z: Complex<R>, roots: &mut Vec<Complex<R>>| {
        if !(z.re.to_f64() >= 0.5) || z.re.to_f64() > mu_max {
            return;
        }
        // in f64 Newton can settle anywhere inside the noise band of χ
        let tol = R::UNIT_ROUNDOFF.sqrt().max(1e-10) * cabs(z).to_f64().max(1.0);
        if roots.iter().all(|w| cabs(*w - z).to_f64() > tol) {
            roots.push(z);
        }
    };
    for z in found.into_iter().flatten() {
        push(z, &mut roots);
    }
    let real_count = roots.iter().filter(|z| z.im.to_f64().abs() < 1e-3 * cabs(**z).to_f64()).count();
    if ceiling < mu_max && real_count < max_count {
        let from = roots.iter().map(|z| z.re.to_f64()).filter(|&x| x < ceiling).fold(1.0, f64::max) + 0.5;
        for z in R::extend(eps.value(), n, tail, from, mu_max, max_count - real_count) {
            push(z, &mut roots);
        }
    }
    roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    roots.truncate(max_count);
    roots
}

/// Roots of the closures at N and 2N; stabilized records are those reproduced
/// to [`MATCH_TOL`]·(1 + |μ|).
pub fn stabilized_spectrum(eps: EpsilonParam, n: usize, precision: PrecisionMode) -> Result<Spectrum> {
    stabilized_spectrum_with(eps, n, precision, DEFAULT_MAX_COUNT, Execution::default())
}

pub fn stabilized_spectrum_with(
    eps: EpsilonParam,
    n: usize,
    precision: PrecisionMode,
    max_count: usize,
    exec: Execution,
) -> Result<Spectrum> {
    if n < 8 {
        return Err(Error::Dimension(format!("stabilized_spectrum needs N >= 8, got {n}")));
    }
    let records = match precision {
        PrecisionMode::Standard => stabilize::<f64>(eps, n, max_count, exec),
        PrecisionMode::Extended => stabilize::<Dd>(eps, n, max_count, exec),
    };
    let spec = Spectrum { records, truncation: n, epsilon: eps, precision_mode: precision };
    if spec.stabilized_count() == 0 {
        return Err(Error::Diagnostic(format!(
            "no eigenvalue stabilized between N = {n} and 2N (increase N or use extended precision)"
        )));
    }
    Ok(spec)
}

fn stabilize<R: Refine + RecField<R>>(eps: EpsilonParam, n: usize, max_count: usize, exec: Execution) -> Vec<EigenRecord>
where
    Complex<R>: RecField<R>,
{
    let runs = exec.map(&[n, 2 * n], |&k| closed_roots::<R>(eps, k, max_count.max(4) + 4, exec));
    let (coarse, fine) = (&runs[0], &runs[1]);
    let mut records: Vec<EigenRecord> = coarse
        .iter()
        .take(max_count)
        .map(|&z| {
            let zf = cto(z);
            let stabilized = fine.iter().any(|&w| cabs(w - z).to_f64() <= MATCH_TOL * (1.0 + zf.norm()));
            let lo = Complex64::new((z.re - R::from_f64(zf.re)).to_f64(), (z.im - R::from_f64(zf.im)).to_f64());
            EigenRecord { mu: zf, mu_lo: lo, residual: f64::NAN, stabilized, gap_to_nearest: f64::INFINITY }
        })
        .collect();
    // residuals of the closed-section eigenpairs at size N
    let residuals = exec.map(coarse.as_slice(), |&z| {
        closed_eigenvector(eps, z, n).map(|v| closed_residual(eps, z, &v)).unwrap_or(f64::INFINITY)
    });
    for (r, res) in records.iter_mut().zip(residuals) {
        r.residual = res;
    }
    let mus: Vec<Complex64> = records.iter().map(|r| r.mu).collect();
    for (i, r) in records.iter_mut().enumerate() {
        r.gap_to_nearest = mus
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, m)| (m - r.mu).norm())
            .fold(f64::INFINITY, f64::min);
    }
    records
}
