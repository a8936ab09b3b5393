use fbheat::diagnostics::*;
use fbheat::evolve::*;
use fbheat::grid::*;
use fbheat::linalg::CMatrix;
use fbheat::operator::{build_aminus, build_aplus};
use fbheat::spectrum::stabilized_spectrum_with;
use fbheat::{Execution, PrecisionMode};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn eps(v: f64) -> EpsilonParam {
    EpsilonParam::new(v).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rows * cols).map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect()
}

fn to_cmatrix(m: &DMatrix<Complex64>) -> CMatrix {
    CMatrix { rows: m.nrows(), cols: m.ncols(), data: (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect() }
}

#[test]
fn jacobi_matches_nalgebra_svd() {
    for (r, k, seed) in [(7, 7, 1), (12, 5, 2), (9, 9, 3)] {
        let a = random_matrix(r, k, seed);
        let ours = singular_values(&a, r, k).unwrap();
        let mut theirs: Vec<f64> = DMatrix::from_row_slice(r, k, &a).singular_values().iter().copied().collect();
        theirs.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).abs() < 1e-13 * theirs[0], "{x} vs {y}");
        }
    }
}

#[test]
fn identity_and_diagonal() {
    let mut id = vec![c(0.0, 0.0); 16];
    for i in 0..4 {
        id[i * 5] = c(1.0, 0.0);
    }
    assert_eq!(singular_values(&id, 4, 4).unwrap(), vec![1.0; 4]);
    let d = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -3.0)];
    assert_eq!(singular_values(&d, 2, 2).unwrap(), vec![3.0, 1.0]);
    assert!(singular_values::<f64>(&[1.0, f64::NAN], 1, 2).is_err());
}

#[test]
fn sum_of_squares_is_the_frobenius_norm() {
    let a = random_matrix(10, 6, 4);
    let s = singular_values(&a, 10, 6).unwrap();
    let fro: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    assert!((s.iter().map(|x| x * x).sum::<f64>() - fro).abs() < 1e-12 * fro);
}

#[test]
fn inverse_singular_values_match_the_dense_oracle() {
    let n = 16;
    let e = eps(0.5);
    let a = build_aplus(e, 2 * n).unwrap();
    let inv = DMatrix::from_row_slice(2 * n, 2 * n, &a.to_dense()).try_inverse().unwrap();
    let block = inv.view((0, 0), (n, n)).into_owned();
    // eigenvalues of BᵀB are the squared singular values
    let mut want: Vec<f64> = (block.transpose() * &block).symmetric_eigenvalues().iter().map(|x| x.max(0.0).sqrt()).collect();
    want.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let got = inverse_singular_values(e, n, Execution::Sequential).unwrap();
    for (x, y) in got.iter().zip(&want) {
        assert!((x - y).abs() < 1e-10 * want[0], "{x} vs {y}");
    }
}

#[test]
fn aminus_inverse_has_the_same_singular_values() {
    let n = 24;
    let e = eps(0.8);
    let dense = |m: fbheat::TridiagonalMatrix| DMatrix::from_row_slice(n, n, &m.to_dense()).try_inverse().unwrap();
    let sp = dense(build_aplus(e, n).unwrap()).singular_values();
    let sm = dense(build_aminus(e, n).unwrap()).singular_values();
    for (x, y) in sp.iter().zip(sm.iter()) {
        assert!((x - y).abs() < 1e-12 * sp[0]);
    }
}

#[test]
fn schatten_two_is_the_frobenius_norm_of_the_inverse() {
    let e = eps(0.5);
    let r = schatten_partial_with(e, 64, &[2.0, 0.5], Execution::Sequential).unwrap();
    let cols: Vec<usize> = (1..=64).collect();
    let inv = fbheat::invsolve::inverse_columns(e, 64, &cols, Execution::Sequential).unwrap();
    let fro: f64 = inv.iter().flatten().map(|x| x * x).sum();
    assert!((r.partial_sums[0].1 - fro).abs() < 1e-10 * fro);
    assert!(r.singular_values.windows(2).all(|w| w[0] >= w[1]));
    assert!(schatten_partial(e, 32, &[1.0]).is_err());
    assert!(schatten_partial(e, 64, &[0.0]).is_err());
}

#[test]
fn orthonormal_vectors_are_at_right_angles() {
    let vs: Vec<Vec<Complex64>> = (0..5).map(|j| (0..8).map(|i| if i == j { c(0.0, 1.0) } else { c(0.0, 0.0) }).collect()).collect();
    let d = subspace_angles(&vs).unwrap();
    assert!(d.angles.iter().all(|a| (a - PI / 2.0).abs() < 1e-15));
    assert!(d.gram_condition.iter().all(|g| (g - 1.0).abs() < 1e-14));
    assert_eq!((d.precision_floor_index, d.rank_deficient_at), (None, None));
}

#[test]
fn thirty_degrees_in_three_dimensions() {
    let e1 = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    let u = vec![c(3f64.sqrt() / 2.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)];
    let d = subspace_angles(&[e1.clone(), u.clone()]).unwrap();
    assert!((d.angles[0] - PI / 6.0).abs() < 1e-14);
    // cond of [[1, c], [c, 1]] with c = cos 30°
    let cs = 3f64.sqrt() / 2.0;
    assert!((d.gram_condition[1] - (1.0 + cs) / (1.0 - cs)).abs() < 1e-10);
    let scaled = subspace_angles(&[e1.iter().map(|z| z * 7.0).collect(), u.iter().map(|z| z * c(0.0, -0.01)).collect()]).unwrap();
    assert!((scaled.angles[0] - d.angles[0]).abs() < 1e-15);
}

#[test]
fn dependent_vectors_stop_the_report() {
    let a = vec![c(1.0, 0.0), c(1.0, 0.0)];
    let d = subspace_angles(&[a.clone(), a.iter().map(|z| z * 2.0).collect()]).unwrap();
    assert_eq!(d.rank_deficient_at, Some(2));
    assert!(d.angles.is_empty());
    assert_eq!(d.gram_condition.len(), 1);
}

#[test]
fn gram_condition_grows_along_an_eigenvector_family() {
    let s = stabilized_spectrum_with(eps(0.5), 64, PrecisionMode::Standard, 10, Execution::Sequential).unwrap();
    let v = s.eigenvectors::<f64>(128).unwrap();
    let d = subspace_angles(&v).unwrap();
    assert_eq!(d.angles.len(), v.len() - 1);
    assert!(d.gram_condition.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
    assert!(d.angles.iter().all(|&a| a > 0.0 && a <= PI / 2.0));
}

#[test]
fn completeness_probe_distances() {
    let vs: Vec<Vec<Complex64>> = vec![vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]];
    let r = completeness_probe(&vs, &vs[0]).unwrap();
    assert!(r.iter().all(|&x| x < 1e-15));
    let off = vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.5)];
    let r = completeness_probe(&vs, &off).unwrap();
    assert!(r.iter().all(|&x| (x - 2.5).abs() < 1e-15));
    let target = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
    let r = completeness_probe(&vs, &target).unwrap();
    assert!((r[0] - 0.5f64.sqrt()).abs() < 1e-15 && r[1] < 1e-15);
}

#[test]
fn expm_matches_nalgebra() {
    for (n, scale, seed) in [(6, 0.3, 7), (10, 4.0, 8), (5, 40.0, 9)] {
        let m = DMatrix::from_row_slice(n, n, &random_matrix(n, n, seed)) * c(scale, 0.0);
        let want = m.exp();
        let got = expm(&to_cmatrix(&m)).unwrap();
        let top = want.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for i in 0..n {
            for j in 0..n {
                assert!((got.at(i, j) - want[(i, j)]).norm() < 1e-11 * top, "scale {scale} ({i},{j})");
            }
        }
    }
}

#[test]
fn propagator_at_time_zero_is_the_identity() {
    let p = propagator(eps(0.5), 12, 0.0).unwrap();
    assert_eq!(p.log_scale, 0.0);
    assert_eq!(p.matrix, CMatrix::identity(12));
    let h = FourierCoeffsFull::from_vec(random_matrix(1, 9, 3)).unwrap();
    assert_eq!(propagate(&h, eps(0.5), 8, 0.0).unwrap(), h);
    let r = propagator_norm_growth(eps(0.5), 0.0, &[8, 16]).unwrap();
    assert!(r.operator_norms.iter().all(|&x| (x - 1.0).abs() < 1e-14));
}

#[test]
fn mean_is_conserved() {
    let mut h = FourierCoeffsFull::zeros(4);
    h.set(0, c(2.5, -1.0));
    h.set(3, c(0.1, 0.0));
    h.set(-2, c(0.0, 0.4));
    let out = propagate(&h, eps(1.2), 16, 0.7).unwrap();
    assert_eq!(out.get(0), c(2.5, -1.0));
    assert!(propagate(&h, eps(1.2), 2, 0.7).is_err());
    assert!(propagate(&h, eps(1.2), 16, -1.0).is_err());
}

#[test]
fn propagation_is_a_semigroup() {
    let e = eps(0.7);
    let h = FourierCoeffsFull::from_vec(random_matrix(1, 17, 12)).unwrap();
    let once = propagate(&h, e, 24, 0.3).unwrap();
    let twice = propagate(&propagate(&h, e, 24, 0.1).unwrap(), e, 24, 0.2).unwrap();
    assert!(once.sub(&twice).l2_norm() < 1e-10 * once.l2_norm());
}

#[test]
fn real_data_stays_real() {
    // J-symmetry of the blocks: the negative block evolves by the conjugate propagator
    let g = PeriodicGridFunction::from_real_fn(64, |t| t.cos() - 0.3 * (2.0 * t).sin()).unwrap();
    let out = propagate(&dft(&g).with_band(4), eps(0.6), 12, 0.5).unwrap();
    // the propagator is large, so the tolerance is relative
    assert!(out.is_real(1e-12 * out.l2_norm()));
}

#[test]
fn eigenvector_modes_rotate_in_phase() {
    let e = eps(0.5);
    let s = stabilized_spectrum_with(e, 64, PrecisionMode::Standard, 8, Execution::Sequential).unwrap();
    let len = 256;
    let vecs = s.eigenvectors::<f64>(len).unwrap();
    let pairs: Vec<(Complex64, OneSidedCoeffs)> = s.stabilized().zip(vecs).map(|(r, u)| (r.mu, OneSidedCoeffs::new(u))).take(4).collect();
    let weights = [c(1.0, 0.0), c(-0.5, 0.2), c(0.0, 0.3), c(0.1, 0.0)];
    let norm0 = harmonic_coeffs(&pairs, &weights, 0.0).unwrap().l2_norm();
    let dt = 1e-4;
    for t in [0.2, 1.0, 3.0] {
        let h = harmonic_coeffs(&pairs, &weights, t).unwrap();
        // a single mode keeps its norm; the eigenvectors are not orthogonal, so sums need not
        let single = harmonic_coeffs(&pairs[1..2], &weights[1..2], t).unwrap().l2_norm();
        assert!((single - harmonic_coeffs(&pairs[1..2], &weights[1..2], 0.0).unwrap().l2_norm()).abs() < 1e-13);
        // h_t + Lh on the modes away from the cut
        let dh = harmonic_coeffs(&pairs, &weights, t + dt).unwrap().sub(&harmonic_coeffs(&pairs, &weights, t - dt).unwrap());
        let res = dh.scale(c(0.5 / dt, 0.0)).add(&apply_ell(&h, e)).with_band(200);
        assert!(res.l2_norm() < 1e-5 * norm0, "t {t}: {:e}", res.l2_norm());
    }
    let (mu, u) = &pairs[0];
    let one = harmonic_coeffs(&pairs[..1], &[c(1.0, 0.0)], 2.0).unwrap();
    let phase = (c(0.0, -2.0) * mu).exp();
    assert!((one.get(1) - phase * u.get(1)).norm() < 1e-14);
    let g = harmonic_solution(&pairs[..1], &[c(1.0, 0.0)], 2.0, 1024).unwrap();
    assert!((g.l2_norm() - one.l2_norm()).abs() < 1e-12);
    assert!(harmonic_solution(&pairs, &weights[..2], 0.0, 1024).is_err());
}

#[test]
fn sobolev_norm_examples() {
    let mut h = FourierCoeffsFull::zeros(3);
    h.set(3, c(1.0, 0.0));
    assert!((sobolev_norm(&h, 1.0) - 10f64.sqrt()).abs() < 1e-15);
    h.set(0, c(1.0, 0.0));
    assert!((sobolev_norm(&h, 0.5) - (1.0 + 10f64.sqrt()).sqrt()).abs() < 1e-14);
    // s = 0 is the L² norm up to the 2π of the measure
    let v = FourierCoeffsFull::from_vec(random_matrix(1, 11, 5)).unwrap();
    assert!((sobolev_norm(&v, 0.0) * (2.0 * PI).sqrt() - v.l2_norm()).abs() < 1e-13);
}

#[test]
fn algebraic_data_is_nested() {
    let a = algebraic_data(8, 1.5, 3);
    let b = algebraic_data(32, 1.5, 3);
    assert_eq!(a, b.with_band(8));
    assert!((b.get(-4).norm() - 4f64.powf(-1.5)).abs() < 1e-15);
    assert_eq!(b.get(0), c(0.0, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn singular_values_are_unitarily_invariant(seed in 0u64..1000, angle in 0.0..PI) {
        // a plane rotation on the left leaves the spectrum alone
        let a = random_matrix(4, 3, seed);
        let (cs, sn) = (angle.cos(), angle.sin());
        let mut b = a.clone();
        for j in 0..3 {
            b[j] = a[j] * cs - a[3 + j] * sn;
            b[3 + j] = a[j] * sn + a[3 + j] * cs;
        }
        let sa = singular_values(&a, 4, 3).unwrap();
        let sb = singular_values(&b, 4, 3).unwrap();
        for (x, y) in sa.iter().zip(&sb) {
            prop_assert!((x - y).abs() < 1e-13 * sa[0]);
        }
    }

    #[test]
    fn evolution_is_linear(seed in 0u64..1000, t in 0.0..1.0f64) {
        let e = eps(0.9);
        let f = FourierCoeffsFull::from_vec(random_matrix(1, 9, seed)).unwrap();
        let g = FourierCoeffsFull::from_vec(random_matrix(1, 9, seed + 1)).unwrap();
        let a = c(0.3, -1.1);
        let lhs = propagate(&f.scale(a).add(&g), e, 12, t).unwrap();
        let rhs = propagate(&f, e, 12, t).unwrap().scale(a).add(&propagate(&g, e, 12, t).unwrap());
        prop_assert!(lhs.sub(&rhs).l2_norm() < 1e-10 * (1.0 + rhs.l2_norm()));
    }
}
