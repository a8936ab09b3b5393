//! P1 finite elements for the singular Sturm–Liouville problem
//!   𝔟[u] = −(1/w)(p u′)′ = μ u  on (0, 1),
//!   p(x) = (1−x)^{1+1/ε}(1+x)^{1−1/ε},  w(x) = x^{−1}(1−x)^{1/ε}(1+x)^{−1/ε},
//! whose eigenvalues are μ_SL = 2μ/ε for the eigenvalues μ of A₊.
//!
//! There is no degree of freedom at x = 0 and a free (natural) one at x = 1.

use crate::error::{Error, Result};
use crate::grid::EpsilonParam;
use crate::quadrature::GaussLegendre;
use crate::spectrum::{stabilized_spectrum, PrecisionMode};

const RAMP_RATIO: f64 = 1.1;
const MAX_RAMP: usize = 60;

pub fn p_coeff(x: f64, eps: EpsilonParam) -> f64 {
    let a = 1.0 / eps.value();
    (1.0 - x).powf(1.0 + a) * (1.0 + x).powf(1.0 - a)
}

pub fn w_coeff(x: f64, eps: EpsilonParam) -> f64 {
    q_coeff(x, eps) / x
}

/// The smooth factor of w: w(x) = q(x)/x.
fn q_coeff(x: f64, eps: EpsilonParam) -> f64 {
    let a = 1.0 / eps.value();
    (1.0 - x).powf(a) * (1.0 + x).powf(-a)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SLDiscretization {
    /// Nodes 0 = x₀ < … < x_M = 1.
    pub mesh: Vec<f64>,
    /// Stiffness, diagonal and off-diagonal over the DOFs x₁..x_M.
    pub k_diag: Vec<f64>,
    pub k_off: Vec<f64>,
    pub m_diag: Vec<f64>,
    pub m_off: Vec<f64>,
    pub epsilon: EpsilonParam,
}

impl SLDiscretization {
    pub fn dofs(&self) -> usize {
        self.k_diag.len()
    }

    pub fn elements(&self) -> usize {
        self.mesh.len() - 1
    }
}

/// Mesh with `m` elements, geometrically graded (ratio 1.1) toward both ends.
pub fn graded_mesh(m: usize) -> Vec<f64> {
    let ramp = MAX_RAMP.min(m / 4);
    let s: f64 = (1..=ramp).map(|k| RAMP_RATIO.powi(-(k as i32))).sum();
    let h_mid = 1.0 / (2.0 * s + (m - 2 * ramp) as f64);
    let mut sizes = Vec::with_capacity(m);
    for k in (1..=ramp).rev() {
        sizes.push(h_mid * RAMP_RATIO.powi(-(k as i32)));
    }
    sizes.extend(std::iter::repeat(h_mid).take(m - 2 * ramp));
    for k in 1..=ramp {
        sizes.push(h_mid * RAMP_RATIO.powi(-(k as i32)));
    }
    let mut x = Vec::with_capacity(m + 1);
    x.push(0.0);
    let mut acc = 0.0;
    for h in &sizes {
        acc += h;
        x.push(acc);
    }
    x[m] = 1.0;
    x
}

pub fn sl_assemble(eps: EpsilonParam, m: usize) -> Result<SLDiscretization> {
    if m < 64 {
        return Err(Error::Dimension(format!("SL mesh needs at least 64 elements, got {m}")));
    }
    let mesh = graded_mesh(m);
    let gl = GaussLegendre::new(8);
    // full node-indexed matrices, then drop node 0
    let mut kd = vec![0.0; m + 1];
    let mut ko = vec![0.0; m];
    let mut md = vec![0.0; m + 1];
    let mut mo = vec![0.0; m];
    for e in 0..m {
        let (a, b) = (mesh[e], mesh[e + 1]);
        let h = b - a;
        let pint = gl.integrate(a, b, |x| p_coeff(x, eps));
        let kloc = pint / (h * h);
        kd[e] += kloc;
        kd[e + 1] += kloc;
        ko[e] -= kloc;
        let (mll, mlr, mrr) = element_mass(a, b, eps, &gl);
        md[e] += mll;
        md[e + 1] += mrr;
        mo[e] += mlr;
    }
    let check = |v: &[f64]| v.iter().all(|x| x.is_finite());
    if !(check(&kd) && check(&md) && check(&ko) && check(&mo)) {
        return Err(Error::Accuracy { message: "non-finite element integral near a singular endpoint".into(), estimate: f64::NAN });
    }
    Ok(SLDiscretization {
        mesh,
        k_diag: kd[1..].to_vec(),
        k_off: ko[1..].to_vec(),
        m_diag: md[1..].to_vec(),
        m_off: mo[1..].to_vec(),
        epsilon: eps,
    })
}

/// Element mass integrals ∫ w φ_iφ_j for the two hats on [a, b].
///
/// Near 0 (a < 2h) the 1/x factor is integrated in product form: with
/// φ_iφ_j = c₀ + c₁x + c₂x², the c₀/x part contributes c₀[q(a) ln(b/a) + ∫(q − q(a))/x]
/// and the rest is smooth. On the first element c₀ = 0 for every product that
/// is kept, because there is no hat at x = 0.
fn element_mass(a: f64, b: f64, eps: EpsilonParam, gl: &GaussLegendre) -> (f64, f64, f64) {
    let h = b - a;
    let h2 = h * h;
    if a >= 2.0 * h {
        let mut ll = 0.0;
        let mut lr = 0.0;
        let mut rr = 0.0;
        for (x, wt) in gl.on(a, b) {
            let w = w_coeff(x, eps) * wt;
            let l = (b - x) / h;
            let r = (x - a) / h;
            ll += w * l * l;
            lr += w * l * r;
            rr += w * r * r;
        }
        return (ll, lr, rr);
    }
    let prod = |c0: f64, c1: f64, c2: f64| {
        let smooth = gl.integrate(a, b, |x| q_coeff(x, eps) * (c1 + c2 * x));
        let sing = if c0 == 0.0 || a == 0.0 {
            0.0
        } else {
            let qa = q_coeff(a, eps);
            c0 * (qa * (b / a).ln() + gl.integrate(a, b, |x| (q_coeff(x, eps) - qa) / x))
        };
        smooth + sing
    };
    let ll = if a == 0.0 { 0.0 } else { prod(b * b / h2, -2.0 * b / h2, 1.0 / h2) };
    let lr = if a == 0.0 { 0.0 } else { prod(-a * b / h2, (a + b) / h2, -1.0 / h2) };
    // φ_R² = (x − a)²/h²; at a = 0 this is x²/h² and c₀ = 0
    let rr = prod(a * a / h2, -2.0 * a / h2, 1.0 / h2);
    (ll, lr, rr)
}

/// Number of generalized eigenvalues of (K, Mass) below σ (Sylvester inertia of K − σ Mass).
pub fn count_below(d: &SLDiscretization, sigma: f64) -> usize {
    let n = d.dofs();
    let mut count = 0;
    let mut piv = d.k_diag[0] - sigma * d.m_diag[0];
    if piv < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let off = d.k_off[i - 1] - sigma * d.m_off[i - 1];
        if piv == 0.0 {
            piv = f64::EPSILON * (d.k_diag[i - 1].abs() + sigma.abs() * d.m_diag[i - 1]);
        }
        piv = d.k_diag[i] - sigma * d.m_diag[i] - off * off / piv;
        if piv < 0.0 {
            count += 1;
        }
    }
    count
}

/// The k smallest generalized eigenvalues, by inertia bisection polished with
/// shifted inverse iteration (Rayleigh quotient).
pub fn sl_eigenvalues(d: &SLDiscretization, k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Ok(vec![]);
    }
    if k > d.elements() / 4 {
        return Err(Error::Precondition(format!(
            "requested {k} eigenvalues but at most M/4 = {} are supported",
            d.elements() / 4
        )));
    }
    let mut hi = 1.0;
    while count_below(d, hi) < k {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Numerical("could not bracket SL eigenvalues".into()));
        }
    }
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        // j-th eigenvalue (0-based): smallest σ with count_below(σ) > j
        let mut lo = -1.0;
        let mut up = hi;
        for _ in 0..200 {
            let mid = 0.5 * (lo + up);
            if count_below(d, mid) > j {
                up = mid;
            } else {
                lo = mid;
            }
            if up - lo <= 4.0 * f64::EPSILON * up.abs().max(1e-300) {
                break;
            }
        }
        let sigma = 0.5 * (lo + up);
        out.push(polish(d, sigma).unwrap_or(sigma));
    }
    Ok(out)
}

/// Two steps of inverse iteration at the bisection estimate; returns the
/// Rayleigh quotient uᵀKu / uᵀMu if the factorization is usable.
fn polish(d: &SLDiscretization, sigma: f64) -> Option<f64> {
    let n = d.dofs();
    let shift = sigma * (1.0 + 1e-12) + 1e-300;
    let sub: Vec<f64> = (0..n - 1).map(|i| d.k_off[i] - shift * d.m_off[i]).collect();
    let diag: Vec<f64> = (0..n).map(|i| d.k_diag[i] - shift * d.m_diag[i]).collect();
    let mut u = vec![1.0; n];
    for _ in 0..2 {
        let rhs = sym_mul(&d.m_diag, &d.m_off, &u);
        u = crate::linalg::solve_tridiagonal_real(&sub, &diag, &sub, &rhs)?;
        let nrm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(nrm.is_finite() && nrm > 0.0) {
            return None;
        }
        u.iter_mut().for_each(|x| *x /= nrm);
    }
    let ku = sym_mul(&d.k_diag, &d.k_off, &u);
    let mu = sym_mul(&d.m_diag, &d.m_off, &u);
    let num: f64 = u.iter().zip(&ku).map(|(a, b)| a * b).sum();
    let den: f64 = u.iter().zip(&mu).map(|(a, b)| a * b).sum();
    let rq = num / den;
    // keep the bisection value if the polish jumped to another eigenvalue
    if ((rq - sigma) / sigma.abs().max(1e-300)).abs() < 1e-8 {
        Some(rq)
    } else {
        None
    }
}

fn sym_mul(diag: &[f64], off: &[f64], u: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i] * u[i];
            if i > 0 {
                s += off[i - 1] * u[i - 1];
            }
            if i + 1 < n {
                s += off[i] * u[i + 1];
            }
            s
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossCheckReport {
    /// (μ_SL, 2μ_{A₊}/ε) in increasing order.
    pub pairs: Vec<(f64, f64)>,
    pub max_rel_diff: f64,
}

/// Compare the first k SL eigenvalues on a mesh of `mesh_size` elements with
/// the stabilized eigenvalues of A₊ at truncation N.
pub fn cross_check(
    eps: EpsilonParam,
    n: usize,
    k: usize,
    mesh_size: usize,
    precision: PrecisionMode,
) -> Result<CrossCheckReport> {
    let spec = stabilized_spectrum(eps, n, precision)?;
    let mus: Vec<f64> = spec.stabilized().map(|r| r.mu.re).collect();
    if mus.len() < k {
        return Err(Error::Diagnostic(format!(
            "only {} stabilized eigenvalues at N = {n}, need {k}",
            mus.len()
        )));
    }
    let d = sl_assemble(eps, mesh_size)?;
    let sl = sl_eigenvalues(&d, k)?;
    let pairs: Vec<(f64, f64)> = sl.iter().zip(&mus).map(|(&a, &m)| (a, 2.0 * m / eps.value())).collect();
    let max_rel_diff = pairs.iter().map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
    Ok(CrossCheckReport { pairs, max_rel_diff })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_is_graded_and_closed() {
        let x = graded_mesh(256);
        assert_eq!(x.len(), 257);
        assert_eq!(x[0], 0.0);
        assert_eq!(x[256], 1.0);
        let h0 = x[1] - x[0];
        let h1 = x[2] - x[1];
        assert!((h1 / h0 - RAMP_RATIO).abs() < 1e-12);
        let hl = x[256] - x[255];
        assert!((hl / h0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn small_mesh_rejected() {
        let e = EpsilonParam::new(0.5).unwrap();
        assert!(matches!(sl_assemble(e, 32), Err(Error::Dimension(_))));
    }
}
