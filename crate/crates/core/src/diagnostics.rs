//! Basis-quality diagnostics: one-sided Jacobi SVD, Schatten partial sums of
//! A₊⁻¹, principal angles and Gram conditioning of eigenvector families, and
//! a completeness probe.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::EpsilonParam;
use crate::invsolve::inverse_columns;
use crate::scalar::{cabs, cdot, Real};
use num_complex::Complex;

/// Angles at or below this are reported but not trusted.
pub const PRECISION_FLOOR: f64 = 1e-15;
const SWEEP_CAP: usize = 80;

/// Column entries the Jacobi sweeps can rotate.
pub trait SvdElem: Copy + Send + Sync {
    type R: Real;
    fn nsq(self) -> Self::R;
    /// Σ conj(a_i) b_i.
    fn dot(a: &[Self], b: &[Self]) -> Complex<Self::R>;
    /// a_p ← c a_p − s φ a_q,  a_q ← s a_p + c φ a_q, with |φ| = 1 chosen so
    /// that φ·(a_p^H a_q) is real and non-negative.
    fn rotate(ap: &mut [Self], aq: &mut [Self], c: Self::R, s: Self::R, phase: Complex<Self::R>);
}

macro_rules! real_elem {
    ($r:ty) => {
        impl SvdElem for $r {
            type R = $r;
            fn nsq(self) -> $r {
                self * self
            }
            fn dot(a: &[$r], b: &[$r]) -> Complex<$r> {
                let mut s = <$r as num_traits::Zero>::zero();
                for (x, y) in a.iter().zip(b) {
                    s += *x * *y;
                }
                Complex::new(s, <$r as num_traits::Zero>::zero())
            }
            fn rotate(ap: &mut [$r], aq: &mut [$r], c: $r, s: $r, phase: Complex<$r>) {
                let ph = phase.re;
                for (x, y) in ap.iter_mut().zip(aq.iter_mut()) {
                    let yq = *y * ph;
                    let xp = *x;
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        impl SvdElem for Complex<$r> {
            type R = $r;
            fn nsq(self) -> $r {
                self.re * self.re + self.im * self.im
            }
            fn dot(a: &[Complex<$r>], b: &[Complex<$r>]) -> Complex<$r> {
                cdot(b, a)
            }
            fn rotate(ap: &mut [Complex<$r>], aq: &mut [Complex<$r>], c: $r, s: $r, phase: Complex<$r>) {
                for (x, y) in ap.iter_mut().zip(aq.iter_mut()) {
                    let yq = *y * phase;
                    let xp = *x;
                    *x = xp * c - yq * s;
                    *y = xp * s + yq * c;
                }
            }
        }
    };
}
real_elem!(f64);
real_elem!(Dd);

fn col_nsq<T: SvdElem>(a: &[T]) -> T::R {
    let mut s = <T::R as num_traits::Zero>::zero();
    for x in a {
        s += x.nsq();
    }
    s
}

/// One Hestenes rotation on a column pair; returns whether it rotated.
fn orthogonalize_pair<T: SvdElem>(ap: &mut [T], aq: &mut [T], tol: f64, floor: f64) -> bool {
    let alpha = col_nsq(ap);
    let beta = col_nsq(aq);
    // a column below the rounding level of the largest one is noise already
    if alpha.to_f64().min(beta.to_f64()) <= floor {
        return false;
    }
    let g = T::dot(ap, aq);
    let gabs = cabs(g);
    let zero = <T::R as num_traits::Zero>::zero();
    let one = <T::R as num_traits::One>::one();
    // √α·√β rather than √(αβ): the product underflows for tiny columns
    if gabs == zero || gabs.to_f64() <= tol * alpha.sqrt().to_f64() * beta.sqrt().to_f64() {
        return false;
    }
    // φ = conj(γ)/|γ| makes a_p^H (φ a_q) = |γ|
    let phase = Complex::new(g.re / gabs, -(g.im / gabs));
    let two = T::R::from_f64(2.0);
    let zeta = (beta - alpha) / (two * gabs);
    let t = {
        let r = one / (zeta.abs() + (one + zeta * zeta).sqrt());
        if zeta < zero {
            -r
        } else {
            r
        }
    };
    let c = one / (one + t * t).sqrt();
    let s = c * t;
    T::rotate(ap, aq, c, s, phase);
    true
}

/// Round-robin pairing for `n` (even) columns: round r pairs slot i with n−1−i.
fn round_pairs(n: usize, round: usize) -> Vec<(usize, usize)> {
    let m = n - 1;
    let slot = |i: usize| if i == 0 { 0 } else { 1 + (i - 1 + round) % m };
    (0..n / 2)
        .map(|i| {
            let (a, b) = (slot(i), slot(n - 1 - i));
            (a.min(b), a.max(b))
        })
        .collect()
}

/// Singular values (decreasing) of the matrix whose columns are `cols`.
pub fn singular_values_cols<T: SvdElem>(cols: Vec<Vec<T>>, exec: Execution) -> Result<Vec<f64>> {
    let n = cols.len();
    if n == 0 {
        return Ok(vec![]);
    }
    let rows = cols[0].len();
    if cols.iter().any(|c| c.len() != rows) {
        return Err(Error::Dimension("columns of unequal length".into()));
    }
    if cols.iter().flatten().any(|x| !x.nsq().to_f64().is_finite()) {
        return Err(Error::Precondition("matrix has non-finite entries".into()));
    }
    let tol = (rows.max(1) as f64).sqrt() * T::R::UNIT_ROUNDOFF;
    // an odd count gets a phantom slot; pairs touching it are skipped
    let mut work: Vec<Option<Vec<T>>> = cols.into_iter().map(Some).collect();
    let padded = n + n % 2;
    let mut converged = n == 1;
    let mut sweeps = 0;
    while !converged {
        if sweeps == SWEEP_CAP {
            return Err(Error::Numerical(format!("Jacobi SVD did not converge in {SWEEP_CAP} sweeps")));
        }
        sweeps += 1;
        let big = work.iter().flatten().map(|c| col_nsq(c).to_f64()).fold(0.0, f64::max);
        let floor = big * (T::R::UNIT_ROUNDOFF * rows.max(1) as f64).powi(2);
        let mut rotated = false;
        for round in 0..padded - 1 {
            let mut jobs: Vec<(usize, usize, Vec<T>, Vec<T>, bool)> = round_pairs(padded, round)
                .into_iter()
                .filter(|&(_, q)| q < n)
                .map(|(p, q)| {
                    let a = work[p].take().expect("column in use");
                    let b = work[q].take().expect("column in use");
                    (p, q, a, b, false)
                })
                .collect();
            exec.for_each_mut(&mut jobs, |(_, _, a, b, did)| {
                *did = orthogonalize_pair(a, b, tol, floor);
            });
            for (p, q, a, b, did) in jobs {
                rotated |= did;
                work[p] = Some(a);
                work[q] = Some(b);
            }
        }
        converged = !rotated;
    }
    let mut s: Vec<f64> = work.into_iter().map(|c| col_nsq(&c.unwrap()).sqrt().to_f64()).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(s)
}

/// Singular values of a dense row-major `rows × cols` matrix.
pub fn singular_values<T: SvdElem>(a: &[T], rows: usize, cols: usize) -> Result<Vec<f64>> {
    if a.len() != rows * cols {
        return Err(Error::Dimension(format!("{} entries for a {rows}×{cols} matrix", a.len())));
    }
    let columns = (0..cols).map(|j| (0..rows).map(|i| a[i * cols + j]).collect()).collect();
    singular_values_cols(columns, Execution::Sequential)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchattenReport {
    pub truncation: usize,
    pub singular_values: Vec<f64>,
    /// (p, Σ_{j≤N} s_j^p) at N.
    pub partial_sums: Vec<(f64, f64)>,
    /// (p, Σ s_j^p) at 2N.
    pub partial_sums_doubled: Vec<(f64, f64)>,
    /// (p, |sum(2N) − sum(N)| / sum(N)).
    pub stabilization: Vec<(f64, f64)>,
}

impl SchattenReport {
    /// S₁ evidence: stabilization at p = 1 below 2%.
    pub fn nuclear_supported(&self) -> Option<bool> {
        self.stabilization.iter().find(|(p, _)| *p == 1.0).map(|(_, r)| *r < 0.02)
    }
}

/// Singular values of the leading N×N block of A₊⁻¹, the inverse being
/// assembled from tridiagonal solves at truncation 2N.
pub fn inverse_singular_values(eps: EpsilonParam, n: usize, exec: Execution) -> Result<Vec<f64>> {
    let idx: Vec<usize> = (1..=n).collect();
    let cols = inverse_columns(eps, n, &idx, exec)?;
    singular_values_cols(cols, exec)
}

pub fn schatten_partial(eps: EpsilonParam, n: usize, p_list: &[f64]) -> Result<SchattenReport> {
    schatten_partial_with(eps, n, p_list, Execution::default())
}

pub fn schatten_partial_with(eps: EpsilonParam, n: usize, p_list: &[f64], exec: Execution) -> Result<SchattenReport> {
    if n < 64 {
        return Err(Error::Dimension(format!("Schatten sums need N ≥ 64, got {n}")));
    }
    if let Some(p) = p_list.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(Error::Domain(format!("Schatten exponent must be positive, got {p}")));
    }
    let s_n = inverse_singular_values(eps, n, exec)?;
    let s_2n = inverse_singular_values(eps, 2 * n, exec)?;
    let sums = |s: &[f64]| -> Vec<(f64, f64)> { p_list.iter().map(|&p| (p, s.iter().map(|x| x.powf(p)).sum())).collect() };
    let partial_sums = sums(&s_n);
    let partial_sums_doubled = sums(&s_2n);
    let stabilization = partial_sums
        .iter()
        .zip(&partial_sums_doubled)
        .map(|(&(p, a), &(_, b))| (p, (b - a).abs() / a))
        .collect();
    Ok(SchattenReport { truncation: n, singular_values: s_n, partial_sums, partial_sums_doubled, stabilization })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RieszDiagnostics {
    /// angles[N−1] = θ_N, the angle of u_{N+1} against span{u_1..u_N}.
    pub angles: Vec<f64>,
    /// gram_condition[N−1] = cond₂ of the Gram matrix of u_1..u_N.
    pub gram_condition: Vec<f64>,
    /// First N with θ_N ≤ 1e-15, if any.
    pub precision_floor_index: Option<usize>,
    /// Set when QR found u_j numerically inside the span of its predecessors;
    /// the report then stops at j − 1 vectors.
    pub rank_deficient_at: Option<usize>,
}

/// Incremental QR of unit-normalized vectors with one reorthogonalization pass.
struct NestedQr<R: Real> {
    q: Vec<Vec<Complex<R>>>,
    /// Column j of R (length j + 1).
    r: Vec<Vec<Complex<R>>>,
}

impl<R: Real> NestedQr<R> {
    fn new() -> Self {
        NestedQr { q: vec![], r: vec![] }
    }

    /// Project `w` off the current span twice; returns the accumulated coefficients.
    fn project_out(&self, w: &mut [Complex<R>]) -> Vec<Complex<R>> {
        let mut coef = vec![Complex::new(R::zero(), R::zero()); self.q.len()];
        for _ in 0..2 {
            for (j, qj) in self.q.iter().enumerate() {
                let c = cdot(w, qj);
                for (x, y) in w.iter_mut().zip(qj) {
                    *x = *x - *y * c;
                }
                coef[j] = coef[j] + c;
            }
        }
        coef
    }

    /// Appends u (unit); returns ‖(I − P)u‖, or None if u is numerically in the span.
    fn push(&mut self, u: &[Complex<R>]) -> (f64, bool) {
        let mut w = u.to_vec();
        let mut coef = self.project_out(&mut w);
        let nrm = crate::scalar::cnorm(&w);
        let rank_tol = R::from_f64(64.0 * (u.len() as f64).sqrt() * R::UNIT_ROUNDOFF);
        if nrm <= rank_tol {
            return (nrm.to_f64(), false);
        }
        for x in w.iter_mut() {
            *x = Complex::new(x.re / nrm, x.im / nrm);
        }
        coef.push(Complex::new(nrm, R::zero()));
        self.q.push(w);
        self.r.push(coef);
        (nrm.to_f64(), true)
    }

    /// Leading k×k block of R as columns.
    fn r_block(&self, k: usize) -> Vec<Vec<Complex<R>>> {
        (0..k)
            .map(|j| {
                let mut c = self.r[j].clone();
                c.resize(k, Complex::new(R::zero(), R::zero()));
                c
            })
            .collect()
    }
}

fn normalized<R: Real>(v: &[Complex<R>]) -> Result<Vec<Complex<R>>> {
    let n = crate::scalar::cnorm(v);
    if n == R::zero() || !n.to_f64().is_finite() {
        return Err(Error::Precondition("zero or non-finite vector".into()));
    }
    Ok(v.iter().map(|x| Complex::new(x.re / n, x.im / n)).collect())
}

/// Principal angles θ_N and Gram condition numbers for an ordered family.
pub fn subspace_angles<R: Real>(vectors: &[Vec<Complex<R>>]) -> Result<RieszDiagnostics>
where
    Complex<R>: SvdElem<R = R>,
{
    if let Some(v) = vectors.first() {
        if vectors.iter().any(|u| u.len() != v.len()) {
            return Err(Error::Dimension("vectors of unequal length".into()));
        }
    }
    let mut qr = NestedQr::<R>::new();
    let mut angles = vec![];
    let mut rank_deficient_at = None;
    for (j, u) in vectors.iter().enumerate() {
        let u = normalized(u)?;
        let (dist, ok) = qr.push(&u);
        if j > 0 {
            angles.push(dist.min(1.0).asin());
        }
        if !ok {
            rank_deficient_at = Some(j + 1);
            break;
        }
    }
    if rank_deficient_at.is_some() {
        angles.pop();
    }
    // cond₂(G_N) = (s_max/s_min)² with s the singular values of R_N
    let gram_condition = (1..=qr.q.len())
        .map(|k| {
            let s = singular_values_cols(qr.r_block(k), Execution::Sequential)?;
            let ratio = s[0] / s[k - 1];
            Ok(ratio * ratio)
        })
        .collect::<Result<Vec<f64>>>()?;
    let precision_floor_index = angles.iter().position(|&a| a <= PRECISION_FLOOR).map(|i| i + 1);
    Ok(RieszDiagnostics { angles, gram_condition, precision_floor_index, rank_deficient_at })
}

/// residual[N−1] = distance from `target` to span{u_1..u_N}.
pub fn completeness_probe<R: Real>(vectors: &[Vec<Complex<R>>], target: &[Complex<R>]) -> Result<Vec<f64>> {
    if vectors.iter().any(|u| u.len() != target.len()) {
        return Err(Error::Dimension("target and vectors differ in length".into()));
    }
    let mut qr = NestedQr::<R>::new();
    let mut out = Vec::with_capacity(vectors.len());
    for u in vectors {
        let u = normalized(u)?;
        let (_, ok) = qr.push(&u);
        if !ok {
            break;
        }
        let mut w = target.to_vec();
        qr.project_out(&mut w);
        out.push(crate::scalar::cnorm(&w).to_f64());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_robin_covers_all_pairs() {
        let n = 6;
        let mut seen = std::collections::BTreeSet::new();
        for r in 0..n - 1 {
            let pairs = round_pairs(n, r);
            let mut used: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
            used.sort();
            assert_eq!(used, (0..n).collect::<Vec<_>>());
            seen.extend(pairs);
        }
        assert_eq!(seen.len(), n * (n - 1) / 2);
    }

    #[test]
    fn diagonal_singular_values() {
        let a = [3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0];
        let s = singular_values(&a, 3, 3).unwrap();
        assert_eq!(s, vec![3.0, 2.0, 1.0]);
    }
}
