use fbheat::grid::*;
use fbheat::operator::*;
use fbheat::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn eps(v: f64) -> EpsilonParam {
    EpsilonParam::new(v).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn coeffs(band: usize, vals: &[(f64, f64)]) -> FourierCoeffsFull {
    let mut out = FourierCoeffsFull::zeros(band);
    for (i, &(re, im)) in vals.iter().enumerate() {
        out.set(i as i64 - band as i64, c(re, im));
    }
    out
}

fn arb_coeffs(band: usize) -> impl Strategy<Value = FourierCoeffsFull> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2 * band + 1).prop_map(move |v| coeffs(band, &v))
}

#[test]
fn cosine_has_half_coefficients() {
    let g = PeriodicGridFunction::from_real_fn(32, f64::cos).unwrap();
    let v = dft(&g);
    for k in -16i64..=16 {
        let want = if k.abs() == 1 { 0.5 } else { 0.0 };
        assert!((v.get(k) - c(want, 0.0)).norm() < 1e-15, "mode {k}");
    }
}

#[test]
fn ell_of_cosine() {
    for e in [0.3, 1.0, 1.7] {
        let mut h = FourierCoeffsFull::zeros(1);
        h.set(1, c(0.5, 0.0));
        h.set(-1, c(0.5, 0.0));
        let g = idft(&apply_ell(&h, eps(e)), 64).unwrap();
        for j in 0..64 {
            let t = g.theta(j);
            assert!((g.samples()[j] - c(-e * (2.0 * t).sin() - t.sin(), 0.0)).norm() < 1e-14);
        }
    }
}

#[test]
fn ell_of_first_exponential_matches_the_matrix_column() {
    // e^{iθ} feeds mode 1 with a_{11} = 1 and mode 2 with a_{21} = ε
    let mut h = FourierCoeffsFull::zeros(1);
    h.set(1, c(1.0, 0.0));
    let l = apply_ell(&h, eps(1.0));
    assert_eq!(l.get(1), c(0.0, 1.0));
    assert_eq!(l.get(2), c(0.0, 1.0));
    let a = build_aplus(eps(1.0), 4).unwrap();
    assert_eq!((a.diag[0], a.sub[0]), (1.0, 1.0));
}

#[test]
fn j_fixes_sine_and_constants() {
    let s = PeriodicGridFunction::from_real_fn(16, f64::sin).unwrap();
    let js = apply_j(&s).unwrap();
    for (a, b) in js.samples().iter().zip(s.samples()) {
        assert!((a - b).norm() < 1e-15);
    }
    let one = PeriodicGridFunction::from_real_fn(16, |_| 1.0).unwrap();
    assert_eq!(apply_j(&one).unwrap(), one);
}

#[test]
fn epsilon_range_is_open() {
    for bad in [0.0, 2.0, -1.0, f64::NAN] {
        assert!(matches!(EpsilonParam::new(bad), Err(Error::Domain(_))));
    }
    assert!(EpsilonParam::new(1e-9).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dft_round_trip(v in arb_coeffs(6)) {
        let back = dft(&idft(&v, 32).unwrap()).with_band(6);
        prop_assert!(back.sub(&v).l2_norm() < 1e-12 * v.l2_norm().max(1.0));
    }

    #[test]
    fn parseval(v in arb_coeffs(5)) {
        let g = idft(&v, 24).unwrap();
        prop_assert!((g.l2_norm() - v.l2_norm()).abs() < 1e-12 * v.l2_norm().max(1.0));
    }

    #[test]
    fn j_is_an_involution(v in arb_coeffs(5)) {
        let g = idft(&v, 32).unwrap();
        prop_assert_eq!(apply_j(&apply_j(&g).unwrap()).unwrap(), g);
    }

    #[test]
    fn ell_kills_the_mean_and_keeps_blocks(v in arb_coeffs(6), e in 0.05..1.95f64) {
        let l = apply_ell(&v, eps(e));
        prop_assert_eq!(l.get(0), c(0.0, 0.0));
        let mut pos = v.clone();
        for k in -6..=0 { pos.set(k, c(0.0, 0.0)); }
        let lp = apply_ell(&pos, eps(e));
        for k in -7..=0 { prop_assert_eq!(lp.get(k), c(0.0, 0.0)); }
    }

    #[test]
    fn ell_adjoint_through_j(h in arb_coeffs(5), g in arb_coeffs(5), e in 0.05..1.95f64) {
        // L = J L* J, so ⟨Lh, g⟩ = ⟨h, J L J g⟩
        let e = eps(e);
        let lhs = apply_ell(&h, e).inner(&g.with_band(6));
        let rhs = h.with_band(6).inner(&apply_j_coeffs(&apply_ell(&apply_j_coeffs(&g), e)).with_band(6));
        prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn ell_matches_pointwise_derivative(v in arb_coeffs(4), e in 0.05..1.95f64) {
        // εθ-derivative of sinθ h′ plus h′, by exact differentiation of the trig polynomial
        let h = |t: f64, d: u32| -> Complex64 {
            (-4i64..=4).map(|k| v.get(k) * Complex64::new(0.0, k as f64).powu(d) * Complex64::from_polar(1.0, k as f64 * t)).sum()
        };
        let l = apply_ell(&v, eps(e));
        for j in 0..16 {
            let t = -3.0 + 0.37 * j as f64;
            let want = (h(t, 1) * t.cos() + h(t, 2) * t.sin()) * e + h(t, 1);
            prop_assert!((l.evaluate(t) - want).norm() < 1e-11 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn aplus_entry_formulas(n in 1usize..40, e in 0.05..1.95f64) {
        let a = build_aplus(eps(e), n).unwrap();
        for m in 1..=n {
            prop_assert_eq!(a.diag[m - 1], m as f64);
        }
        for m in 1..n {
            let w = 0.5 * e * (m * (m + 1)) as f64;
            prop_assert_eq!(a.sup[m - 1], -w);
            prop_assert_eq!(a.sub[m - 1], w);
        }
        let am = build_aminus(eps(e), n).unwrap();
        prop_assert!(am.diag.iter().zip(&a.diag).all(|(x, y)| *x == -*y));
    }

    #[test]
    fn quadratic_form_is_weighted_norm(v in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..48), e in 0.05..1.95f64) {
        let v: Vec<Complex64> = v.into_iter().map(|(a, b)| c(a, b)).collect();
        let a = build_aplus(eps(e), v.len()).unwrap();
        let want: f64 = v.iter().enumerate().map(|(m, z)| (m + 1) as f64 * z.norm_sqr()).sum();
        prop_assert!((quadratic_form(&a, &v) - want).abs() <= 1e-12 * want.max(1e-300));
    }

    #[test]
    fn apply_is_the_dense_product(v in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..24), e in 0.05..1.95f64) {
        let n = v.len();
        let v: Vec<Complex64> = v.into_iter().map(|(a, b)| c(a, b)).collect();
        let a = build_aplus(eps(e), n).unwrap();
        let dense = DMatrix::from_row_slice(n, n, &a.to_dense()).map(|x| c(x, 0.0));
        let want = &dense * nalgebra::DVector::from_vec(v.clone());
        let got = apply(&a, &OneSidedCoeffs::new(v)).unwrap();
        for (g, w) in got.as_slice().iter().zip(want.iter()) {
            prop_assert!((g - w).norm() <= 1e-12 * (1.0 + w.norm()));
        }
    }
}

#[test]
fn small_displayed_cases() {
    let a = build_aplus(eps(0.5), 2).unwrap();
    assert_eq!((a.diag.clone(), a.sup.clone(), a.sub.clone()), (vec![1.0, 2.0], vec![-0.5], vec![0.5]));
    let one = build_aplus(eps(1.0), 1).unwrap();
    assert_eq!(apply(&one, &OneSidedCoeffs::from_real(&[1.0])).unwrap().as_slice(), &[c(1.0, 0.0)]);
    let two = build_aplus(eps(1.0), 2).unwrap();
    assert_eq!(apply(&two, &OneSidedCoeffs::from_real(&[1.0, 0.0])).unwrap().as_slice(), &[c(1.0, 0.0), c(1.0, 0.0)]);
}

#[test]
fn dissipativity_on_random_vectors() {
    let r = dissipativity_report(&build_aplus(eps(0.5), 64).unwrap(), 1000, 11);
    assert!(r.structural_pass);
    assert!(r.min_quadratic_form >= 1.0 - 1e-12);
    let e1 = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    assert_eq!(quadratic_form(&build_aplus(eps(1.0), 4).unwrap(), &e1), 1.0);
}

#[test]
fn aminus_block_mirrors_aplus_on_two_modes() {
    // A₊ at ε = 1, N = 2 has characteristic polynomial μ² − 3μ + 3
    let am = build_aminus(eps(1.0), 2).unwrap();
    let tr: f64 = am.diag.iter().sum();
    let det = am.diag[0] * am.diag[1] - am.sup[0] * am.sub[0];
    assert_eq!((tr, det), (-3.0, 3.0));
}
