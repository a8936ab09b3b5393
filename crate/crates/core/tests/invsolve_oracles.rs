use fbheat::grid::*;
use fbheat::invsolve::*;
use fbheat::operator::build_aplus;
use fbheat::{Error, Execution};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn eps(v: f64) -> EpsilonParam {
    EpsilonParam::new(v).unwrap()
}

fn random_mean_zero(band: usize, seed: u64) -> FourierCoeffsFull {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = FourierCoeffsFull::zeros(band);
    for k in 1..=band as i64 {
        for s in [1, -1] {
            c.set(s * k, Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        }
    }
    c
}

fn manufactured(e: f64, m: usize) -> PeriodicGridFunction {
    PeriodicGridFunction::from_real_fn(m, |t| -e * (2.0 * t).sin() - t.sin()).unwrap()
}

#[test]
fn weight_ratio_hand_values() {
    let e = eps(0.5);
    assert_eq!(weight_ratio(0.0, 1.0, e).unwrap(), 0.0);
    assert!((weight_ratio(1.0, 1.0, e).unwrap() - 1.0).abs() < 1e-15);
    assert!((weight_ratio(PI / 2.0, 2.0 * PI / 3.0, e).unwrap() - 1.0 / 3.0).abs() < 1e-14);
}

#[test]
fn explicit_recovers_cosine() {
    for e in [0.3, 0.7, 1.0, 1.6] {
        let f = manufactured(e, 256);
        let sol = solve_explicit(&f, eps(e)).unwrap();
        let err = (0..256).map(|j| (sol.h.samples()[j] - f.theta(j).cos()).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "eps {e}: {err:e}");
        // the closed form pins h(0) = k₁
        assert!((compute_k1(&f, eps(e)).unwrap().value - Complex64::new(1.0, 0.0)).norm() < 1e-8);
    }
}

#[test]
fn galerkin_recovers_cosine_at_small_band() {
    for n in [2, 5, 16] {
        let e = eps(0.7);
        let h = solve_galerkin(&dft(&manufactured(0.7, 64)).with_band(n), e, n).unwrap();
        for k in -(n as i64)..=n as i64 {
            let want = if k.abs() == 1 { 0.5 } else { 0.0 };
            assert!((h.get(k) - Complex64::new(want, 0.0)).norm() < 1e-13, "N {n} mode {k}");
        }
    }
}

#[test]
fn nonzero_mean_is_rejected() {
    let f = PeriodicGridFunction::from_real_fn(64, |_| 1.0).unwrap();
    assert!(matches!(solve_explicit(&f, eps(0.5)), Err(Error::Precondition(_))));
    assert!(matches!(solve_galerkin(&dft(&f), eps(0.5), 8), Err(Error::Precondition(_))));
}

#[test]
fn zero_data_gives_zero() {
    let z = FourierCoeffsFull::zeros(4);
    assert_eq!(solve_galerkin(&z, eps(0.5), 8).unwrap().l2_norm(), 0.0);
    let f = PeriodicGridFunction::from_real_fn(32, |_| 0.0).unwrap();
    assert_eq!(compute_k1(&f, eps(0.5)).unwrap().value, Complex64::new(0.0, 0.0));
}

#[test]
fn single_mode_solves_with_the_dense_inverse() {
    // Lh = f on positive modes reads iA₊v = f
    let n = 8;
    let e = eps(0.5);
    let mut f = FourierCoeffsFull::zeros(1);
    f.set(1, Complex64::new(1.0, 0.0));
    let h = solve_galerkin(&f, e, n).unwrap();
    let a = build_aplus(e, n).unwrap();
    let ia = DMatrix::from_row_slice(n, n, &a.to_dense()).map(|x| Complex64::new(0.0, x));
    let inv = ia.try_inverse().unwrap();
    for m in 1..=n {
        assert!((h.get(m as i64) - inv[(m - 1, 0)]).norm() < 1e-14, "mode {m}");
        assert_eq!(h.get(-(m as i64)), Complex64::new(0.0, 0.0));
    }
}

#[test]
fn sine_agrees_between_solvers() {
    let e = eps(0.5);
    let f = PeriodicGridFunction::from_real_fn(256, f64::sin).unwrap();
    let sol = solve_explicit(&f, e).unwrap();
    let g = solve_galerkin(&dft(&f).with_band(1), e, 1 << 14).unwrap();
    let diff = (0..256).map(|j| (sol.h.samples()[j] - g.evaluate(f.theta(j))).norm()).fold(0.0, f64::max);
    assert!(diff < 1e-6, "{diff:e}");
    // forward residual of the explicit solution
    let lh = apply_ell(&sol.modes, e);
    let res = lh.with_band(1).sub(&dft(&f).with_band(1)).l2_norm() / dft(&f).l2_norm();
    assert!(res < 1e-7, "{res:e}");
}

#[test]
fn two_solvers_agree_on_random_data() {
    // the finite section converges like N^{-1/ε}, so ε = 1.5 needs a longer one
    for (i, (ev, n)) in [(0.4, 1 << 17), (0.9, 1 << 17), (1.0, 1 << 17), (1.5, 1 << 21)].into_iter().enumerate() {
        let e = eps(ev);
        let c = random_mean_zero(5, 40 + i as u64);
        let f = idft(&c, 256).unwrap();
        let he = solve_explicit(&f, e).unwrap();
        let hg = solve_galerkin(&c, e, n).unwrap();
        let hg = PeriodicGridFunction::from_fn(256, |t| hg.evaluate(t)).unwrap();
        let rel = he.h.sub(&hg).unwrap().l2_norm() / c.l2_norm();
        assert!(rel < 1e-5, "eps {ev}: {rel:e}");
    }
}

#[test]
fn galerkin_residual_on_retained_modes() {
    let e = eps(0.8);
    let f = random_mean_zero(12, 3);
    let h = solve_galerkin(&f, e, 64).unwrap();
    assert!(galerkin_residual(&f, &h, e, 64) < 1e-11);
}

#[test]
fn k1_is_linear() {
    let e = eps(0.6);
    let f = idft(&random_mean_zero(4, 9), 128).unwrap();
    let a = Complex64::new(-1.7, 0.4);
    let k = compute_k1(&f, e).unwrap().value;
    let ka = compute_k1(&f.scale(a), e).unwrap().value;
    assert!((ka - a * k).norm() < 1e-10 * (1.0 + k.norm()));
}

#[test]
fn energy_ratio_is_truncation_stable() {
    let e = eps(0.5);
    let samples: Vec<_> = (0..100).map(|s| random_mean_zero(8, 1000 + s)).collect();
    let a = energy_estimate_check(&samples, e, 64).unwrap();
    let b = energy_estimate_check(&samples, e, 128).unwrap();
    assert!(((a.max_ratio - b.max_ratio) / b.max_ratio).abs() < 0.05);
    let zero = energy_estimate_check(&[FourierCoeffsFull::zeros(2)], e, 16).unwrap();
    assert_eq!(zero.ratios, vec![0.0]);
}

#[test]
fn column_norms_decay_like_the_bound() {
    let half = column_norm_decay(eps(0.5), 512).unwrap();
    assert!((-1.65..=-1.35).contains(&half.exponent), "{}", half.exponent);
    let big = column_norm_decay(eps(1.5), 512).unwrap();
    assert!(big.exponent <= -1.0, "{}", big.exponent);
}

#[test]
fn entries_decay_fast_along_rows() {
    let (row, _) = entry_decay(eps(0.5), 256).unwrap();
    assert!(row.exponent <= -2.8, "{}", row.exponent);
    let cols = inverse_columns(eps(0.5), 64, &[1, 5, 20], Execution::Sequential).unwrap();
    for (j, col) in [1usize, 5, 20].iter().zip(&cols) {
        assert!(col[j - 1] > 0.0, "diagonal entry of column {j}");
    }
}

#[test]
fn inverse_columns_match_the_dense_inverse() {
    let n = 24;
    let e = eps(0.9);
    let a = build_aplus(e, 2 * n).unwrap();
    let dense = DMatrix::from_row_slice(2 * n, 2 * n, &a.to_dense());
    let inv = dense.try_inverse().unwrap();
    let cols = inverse_columns(e, n, &[1, 7, 24], Execution::Parallel).unwrap();
    for (&j, col) in [1usize, 7, 24].iter().zip(&cols) {
        for i in 0..n {
            assert!((col[i] - inv[(i, j - 1)]).abs() < 1e-12 * (1.0 + inv[(i, j - 1)].abs()));
        }
    }
}

#[test]
fn parallel_and_sequential_columns_are_identical() {
    let e = eps(0.5);
    let cols: Vec<usize> = (1..=64).collect();
    assert_eq!(
        inverse_columns(e, 128, &cols, Execution::Sequential).unwrap(),
        inverse_columns(e, 128, &cols, Execution::Parallel).unwrap()
    );
}

#[test]
fn short_fits_may_be_inconclusive() {
    let f = column_norm_decay(eps(0.5), 16).unwrap();
    assert!(f.exponent.is_finite() || f.inconclusive);
}

#[test]
fn hardy_ratio_is_bounded_under_refinement() {
    let e = eps(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (a, b, p) = (rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() * 3.0);
        let f = move |t: f64| a + b * t.powf(p);
        let coarse = hardy_ratio(f, 0.5, e, 40);
        let fine = hardy_ratio(f, 0.5, e, 80);
        assert!((coarse - fine).abs() <= 1e-6 * fine.max(1e-12));
        worst = worst.max(fine);
    }
    assert!(worst <= hardy_constant(e) * (1.0 + 1e-9), "{worst} vs {}", hardy_constant(e));
}

#[test]
fn solutions_gain_one_power_of_decay() {
    let (f, h) = regularity_shift(eps(0.2), 2.5, 1024).unwrap();
    let shift = f.exponent - h.exponent;
    assert!((shift - 1.0).abs() <= 0.2, "{} {}", f.exponent, h.exponent);
}
