//! Invariant suite behind `fbheat verify`: one quick check per module property,
//! sized to finish in a few seconds.

use crate::diagnostics::{schatten_partial, subspace_angles};
use crate::evolve::{propagate, propagator_norm_growth, sobolev_norm};
use crate::grid::{apply_ell, dft, idft, EpsilonParam, FourierCoeffsFull, PeriodicGridFunction};
use crate::invsolve::{solve_explicit, solve_galerkin};
use crate::operator::{build_aminus, build_aplus, dissipativity_report};
use crate::spectrum::{stabilized_spectrum, PrecisionMode};
use crate::sturm::cross_check;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

type Probe = fn(EpsilonParam) -> Result<(bool, String)>;

const PROBES: &[(&str, &str, Probe)] = &[
    ("grid", "dft/idft round trip", grid_round_trip),
    ("grid", "L annihilates constants, raises band by one", grid_ell),
    ("operator", "A- = -A+ entrywise", operator_sign),
    ("operator", "Re<A+ v, v> >= |v|^2", operator_dissipative),
    ("invsolve", "manufactured cos solution", invsolve_manufactured),
    ("invsolve", "explicit and Galerkin agree", invsolve_agree),
    ("invsolve", "non-mean-zero data rejected", invsolve_mean),
    ("spectrum", "stabilized eigenvalues real, >= 1, small residual", spectrum_real),
    ("sturm", "SL eigenvalues match 2mu/eps", sturm_match),
    ("diagnostics", "singular values of the inverse sorted and summable", diagnostics_sv),
    ("diagnostics", "subspace angles in (0, pi/2]", diagnostics_angles),
    ("evolve", "identity at t = 0 and mean preserved", evolve_identity),
    ("evolve", "semigroup property", evolve_semigroup),
    ("evolve", "Sobolev norm of e^{i theta}", evolve_sobolev),
    ("evolve", "propagator norm grows with N", evolve_growth),
];

pub fn run_suite(eps: EpsilonParam) -> Vec<Check> {
    PROBES
        .iter()
        .map(|&(module, name, probe)| {
            let (pass, detail) = probe(eps).unwrap_or_else(|e| (false, format!("error: {e}")));
            Check { module, name, pass, detail }
        })
        .collect()
}

fn random_coeffs(band: usize, seed: u64, mean: bool) -> FourierCoeffsFull {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = FourierCoeffsFull::zeros(band);
    let b = band as i64;
    for k in -b..=b {
        if k != 0 || mean {
            c.set(k, Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        }
    }
    c
}

fn grid_round_trip(_: EpsilonParam) -> Result<(bool, String)> {
    let c = random_coeffs(8, 1, true);
    let back = dft(&idft(&c, 64)?).with_band(8);
    let err = back.sub(&c).l2_norm() / c.l2_norm();
    Ok((err < 1e-13, format!("rel err {err:.1e}")))
}

fn grid_ell(eps: EpsilonParam) -> Result<(bool, String)> {
    let mut one = FourierCoeffsFull::zeros(3);
    one.set(0, Complex64::new(1.0, 0.0));
    let l1 = apply_ell(&one, eps).l2_norm();
    let c = random_coeffs(5, 2, false);
    let lc = apply_ell(&c, eps);
    Ok((l1 == 0.0 && lc.band() == 6, format!("|L1| = {l1:e}, band {}", lc.band())))
}

fn operator_sign(eps: EpsilonParam) -> Result<(bool, String)> {
    let p = build_aplus(eps, 32)?;
    let m = build_aminus(eps, 32)?;
    let neg = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| *x == -*y);
    let ok = neg(&p.diag, &m.diag) && neg(&p.sup, &m.sup) && neg(&p.sub, &m.sub);
    Ok((ok, "N = 32".into()))
}

fn operator_dissipative(eps: EpsilonParam) -> Result<(bool, String)> {
    let r = dissipativity_report(&build_aplus(eps, 64)?, 2000, 3);
    let ok = r.structural_pass && r.min_quadratic_form >= 1.0 - 1e-12;
    Ok((ok, format!("min {:.15}", r.min_quadratic_form)))
}

fn manufactured(eps: EpsilonParam, m: usize) -> Result<PeriodicGridFunction> {
    let e = eps.value();
    PeriodicGridFunction::from_real_fn(m, |t| -e * (2.0 * t).sin() - t.sin())
}

fn invsolve_manufactured(eps: EpsilonParam) -> Result<(bool, String)> {
    let f = manufactured(eps, 128)?;
    let sol = solve_explicit(&f, eps)?;
    let ee = (0..f.len()).map(|j| (sol.h.samples()[j] - f.theta(j).cos()).norm()).fold(0.0, f64::max);
    let g = solve_galerkin(&dft(&f).with_band(8), eps, 8)?;
    let eg = (0..f.len()).map(|j| (g.evaluate(f.theta(j)) - f.theta(j).cos()).norm()).fold(0.0, f64::max);
    Ok((ee < 1e-8 && eg < 1e-13, format!("explicit {ee:.1e}, galerkin {eg:.1e}")))
}

fn invsolve_agree(eps: EpsilonParam) -> Result<(bool, String)> {
    let c = random_coeffs(4, 4, false);
    let f = idft(&c, 128)?;
    let he = solve_explicit(&f, eps)?;
    let diff = |n: usize| -> Result<f64> {
        let hg = solve_galerkin(&c, eps, n)?;
        let hg = PeriodicGridFunction::from_fn(f.len(), |t| hg.evaluate(t))?;
        Ok(he.h.sub(&hg)?.l2_norm() / he.h.l2_norm())
    };
    let (coarse, fine) = (diff(1 << 13)?, diff(1 << 15)?);
    // for ε > 1 the truncation converges too slowly for a fixed threshold
    let ok = fine < 1e-5 || (eps.value() > 1.0 && fine < coarse);
    Ok((ok, format!("rel diff {coarse:.1e} at N = 2^13, {fine:.1e} at 2^15")))
}

fn invsolve_mean(eps: EpsilonParam) -> Result<(bool, String)> {
    let f = PeriodicGridFunction::from_real_fn(64, |t| 1.0 + t.cos())?;
    match solve_explicit(&f, eps) {
        Err(e @ Error::Precondition(_)) => Ok((true, e.to_string())),
        Err(e) => Ok((false, format!("wrong error: {e}"))),
        Ok(_) => Ok((false, "accepted".into())),
    }
}

fn spectrum_real(eps: EpsilonParam) -> Result<(bool, String)> {
    let s = stabilized_spectrum(eps, 32, PrecisionMode::Standard)?;
    let st: Vec<_> = s.stabilized().collect();
    let im = st.iter().map(|r| r.mu.im.abs() / r.mu.norm()).fold(0.0, f64::max);
    let res = st.iter().map(|r| r.residual).fold(0.0, f64::max);
    let ok = im < 1e-8 && res < 1e-8 && st.iter().all(|r| r.mu.re >= 1.0);
    Ok((ok, format!("{} stabilized, max |Im|/|mu| {im:.1e}, max residual {res:.1e}", st.len())))
}

fn sturm_match(eps: EpsilonParam) -> Result<(bool, String)> {
    let r = cross_check(eps, 32, 3, 4096, PrecisionMode::Standard)?;
    Ok((r.max_rel_diff < 1e-3, format!("max rel diff {:.1e}", r.max_rel_diff)))
}

fn diagnostics_sv(eps: EpsilonParam) -> Result<(bool, String)> {
    let r = schatten_partial(eps, 64, &[1.0])?;
    let sv = &r.singular_values;
    let sorted = sv.windows(2).all(|w| w[0] >= w[1]) && sv.iter().all(|&s| s > 0.0);
    let s1 = r.partial_sums[0].1;
    Ok((sorted && s1.is_finite(), format!("S1 partial sum {s1:.5}")))
}

fn diagnostics_angles(eps: EpsilonParam) -> Result<(bool, String)> {
    let s = stabilized_spectrum(eps, 32, PrecisionMode::Standard)?;
    let mut v = s.eigenvectors::<f64>(64)?;
    v.truncate(6);
    let d = subspace_angles(&v)?;
    let ok = d.angles.iter().all(|&a| a > 0.0 && a <= std::f64::consts::FRAC_PI_2 + 1e-12);
    Ok((ok, format!("{} angles, min {:.2e}", d.angles.len(), d.angles.iter().cloned().fold(f64::INFINITY, f64::min))))
}

fn evolve_identity(eps: EpsilonParam) -> Result<(bool, String)> {
    let h = random_coeffs(6, 5, true);
    let same = propagate(&h, eps, 16, 0.0)? == h;
    let mean = propagate(&h, eps, 16, 0.3)?.mean() == h.mean();
    Ok((same && mean, format!("identity {same}, mean preserved {mean}")))
}

fn evolve_semigroup(eps: EpsilonParam) -> Result<(bool, String)> {
    let h = random_coeffs(6, 6, true);
    let once = propagate(&h, eps, 16, 0.5)?;
    let twice = propagate(&propagate(&h, eps, 16, 0.2)?, eps, 16, 0.3)?;
    let rel = once.sub(&twice).l2_norm() / once.l2_norm();
    Ok((rel < 1e-9, format!("rel diff {rel:.1e}")))
}

fn evolve_sobolev(_: EpsilonParam) -> Result<(bool, String)> {
    let mut h = FourierCoeffsFull::zeros(1);
    h.set(1, Complex64::new(1.0, 0.0));
    let s = sobolev_norm(&h, 1.0);
    Ok(((s - 2f64.sqrt()).abs() < 1e-15, format!("{s}")))
}

fn evolve_growth(eps: EpsilonParam) -> Result<(bool, String)> {
    let r = propagator_norm_growth(eps, 1.0, &[8, 16, 32])?;
    let ok = r.log_norms.windows(2).all(|w| w[1] > w[0]);
    Ok((ok, format!("ln norms {:?}", r.log_norms.iter().map(|x| (x * 100.0).round() / 100.0).collect::<Vec<_>>())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_at_half() {
        let checks = run_suite(EpsilonParam::new(0.5).unwrap());
        let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }
}
