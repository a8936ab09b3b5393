//! Small dense and banded kernels: tridiagonal LU with partial pivoting,
//! dense complex matrices, and the Francis double-shift QR iteration on an
//! upper Hessenberg matrix.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::scalar::{cabs, cdiv, Real};
use num_complex::{Complex, Complex64};
use num_traits::{One, Zero};

/// LU factorization with partial pivoting of a complex tridiagonal matrix
/// (LAPACK `gttrf` layout: one extra superdiagonal `du2` from row swaps).
#[derive(Clone, Debug)]
pub struct TriLu<R: Real> {
    dl: Vec<Complex<R>>,
    d: Vec<Complex<R>>,
    du: Vec<Complex<R>>,
    du2: Vec<Complex<R>>,
    ipiv: Vec<bool>,
}

impl<R: Real> TriLu<R> {
    /// Factor the matrix with subdiagonal `sub`, diagonal `diag`, superdiagonal `sup`.
    /// Returns `None` when an exactly zero pivot appears.
    pub fn factor(sub: &[Complex<R>], diag: &[Complex<R>], sup: &[Complex<R>]) -> Option<Self> {
        let n = diag.len();
        debug_assert!(sub.len() + 1 == n.max(1) && sup.len() + 1 == n.max(1));
        let mut dl = sub.to_vec();
        let mut d = diag.to_vec();
        let mut du = sup.to_vec();
        let zero = Complex::new(R::zero(), R::zero());
        let mut du2 = vec![zero; n.saturating_sub(2)];
        let mut ipiv = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            if cabs(d[i]) >= cabs(dl[i]) {
                // no interchange
                if d[i] == zero {
                    return None;
                }
                let f = cdiv(dl[i], d[i]);
                dl[i] = f;
                d[i + 1] = d[i + 1] - f * du[i];
            } else {
                let f = cdiv(d[i], dl[i]);
                d[i] = dl[i];
                dl[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du[i + 1];
                }
                ipiv[i] = true;
            }
        }
        if n > 0 && d[n - 1] == zero {
            return None;
        }
        Some(TriLu { dl, d, du, du2, ipiv })
    }

    pub fn solve_in_place(&self, b: &mut [Complex<R>]) {
        let n = self.d.len();
        // forward: L y = P b
        for i in 0..n.saturating_sub(1) {
            if self.ipiv[i] {
                b.swap(i, i + 1);
            }
            let t = b[i];
            b[i + 1] = b[i + 1] - self.dl[i] * t;
        }
        // backward: U x = y
        if n == 0 {
            return;
        }
        b[n - 1] = cdiv(b[n - 1], self.d[n - 1]);
        if n > 1 {
            b[n - 2] = cdiv(b[n - 2] - self.du[n - 2] * b[n - 1], self.d[n - 2]);
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = cdiv(b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2], self.d[i]);
        }
    }

    /// Smallest |pivot|, a cheap singularity indicator.
    pub fn min_pivot(&self) -> R {
        self.d.iter().map(|z| cabs(*z)).fold(R::from_f64(f64::INFINITY), |a, b| if b < a { b } else { a })
    }
}

/// Solve a real tridiagonal system with partial pivoting; real right-hand side.
pub fn solve_tridiagonal_real(sub: &[f64], diag: &[f64], sup: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
    let lu = TriLu::<f64>::factor(&c(sub), &c(diag), &c(sup))?;
    let mut x = c(b);
    lu.solve_in_place(&mut x);
    Some(x.into_iter().map(|z| z.re).collect())
}

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex64::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::one();
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &CMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Matrix product; rows of the result are independent work items.
    pub fn matmul_with(&self, other: &CMatrix, exec: Execution) -> Self {
        assert_eq!(self.cols, other.rows);
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let rows = exec.map_range(n, |i| {
            let mut row = vec![Complex64::zero(); m];
            for l in 0..k {
                let a = self.data[i * k + l];
                if a == Complex64::zero() {
                    continue;
                }
                let brow = &other.data[l * m..(l + 1) * m];
                for (r, b) in row.iter_mut().zip(brow) {
                    *r += a * b;
                }
            }
            row
        });
        CMatrix { rows: n, cols: m, data: rows.concat() }
    }

    pub fn matmul(&self, other: &CMatrix) -> Self {
        self.matmul_with(other, Execution::default())
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.at(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Solve `self · X = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix> {
        let n = self.rows;
        if self.cols != n || rhs.rows != n {
            return Err(Error::Dimension(format!(
                "solve needs a square system, got {}x{} with {} rhs rows",
                self.rows, self.cols, rhs.rows
            )));
        }
        let mut a = self.data.clone();
        let mut b = rhs.data.clone();
        let m = rhs.cols;
        for col in 0..n {
            let (piv, pmax) = (col..n)
                .map(|r| (r, a[r * n + col].norm()))
                .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(Error::Numerical(format!("singular matrix at column {col}")));
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                for j in 0..m {
                    b.swap(col * m + j, piv * m + j);
                }
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                if f == Complex64::zero() {
                    continue;
                }
                for j in col..n {
                    let t = a[col * n + j];
                    a[r * n + j] -= f * t;
                }
                for j in 0..m {
                    let t = b[col * m + j];
                    b[r * m + j] -= f * t;
                }
            }
        }
        for col in (0..n).rev() {
            let d = a[col * n + col];
            for j in 0..m {
                let mut s = b[col * m + j];
                for k in col + 1..n {
                    s -= a[col * n + k] * b[k * m + j];
                }
                b[col * m + j] = s / d;
            }
        }
        Ok(CMatrix { rows: n, cols: m, data: b })
    }
}

/// All eigenvalues of a real upper Hessenberg matrix (row-major, `n × n`) by
/// the Francis double-shift QR iteration with deflation. The input is destroyed.
pub fn hessenberg_eigenvalues<R: Real>(a: &mut [R], n: usize) -> Result<Vec<Complex<R>>> {
    let idx = |i: usize, j: usize| i * n + j;
    let zero = R::zero();
    let u = R::from_f64(R::UNIT_ROUNDOFF);
    let half = R::from_f64(0.5);
    let sign = |a: R, b: R| if b >= zero { a.abs() } else { -a.abs() };
    let mut wr = vec![zero; n];
    let mut wi = vec![zero; n];
    let mut anorm = zero;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[idx(i, j)].abs();
        }
    }
    let max_its = 60;
    let mut nn = n as isize - 1;
    let mut t = zero;
    while nn >= 0 {
        let nu = nn as usize;
        let mut its = 0;
        loop {
            // look for a negligible subdiagonal element
            let mut l = nu;
            while l >= 1 {
                let mut s = a[idx(l - 1, l - 1)].abs() + a[idx(l, l)].abs();
                if s == zero {
                    s = anorm;
                }
                if a[idx(l, l - 1)].abs() <= u * s {
                    a[idx(l, l - 1)] = zero;
                    break;
                }
                l -= 1;
            }
            let mut x = a[idx(nu, nu)];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = zero;
                nn -= 1;
                break;
            }
            let mut y = a[idx(nu - 1, nu - 1)];
            let mut w = a[idx(nu, nu - 1)] * a[idx(nu - 1, nu)];
            if l + 1 == nu {
                let p = half * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= zero {
                    let z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = if z != zero { x - w / z } else { x + z };
                    wi[nu - 1] = zero;
                    wi[nu] = zero;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if its == max_its {
                return Err(Error::Numerical(format!(
                    "QR iteration did not converge while deflating index {nu}"
                )));
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 0..=nu {
                    a[idx(i, i)] -= x;
                }
                let s = a[idx(nu, nu - 1)].abs() + a[idx(nu - 1, nu - 2)].abs();
                x = R::from_f64(0.75) * s;
                y = x;
                w = R::from_f64(-0.4375) * s * s;
            }
            its += 1;
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            let mut z;
            loop {
                z = a[idx(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[idx(m + 1, m)] + a[idx(m, m + 1)];
                q = a[idx(m + 1, m + 1)] - z - rr - ss;
                r = a[idx(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let uu = a[idx(m, m - 1)].abs() * (q.abs() + r.abs());
                let vv = p.abs() * (a[idx(m - 1, m - 1)].abs() + z.abs() + a[idx(m + 1, m + 1)].abs());
                if uu <= u * vv {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[idx(i, i - 2)] = zero;
                if i != m + 2 {
                    a[idx(i, i - 3)] = zero;
                }
            }
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[idx(k, k - 1)];
                    q = a[idx(k + 1, k - 1)];
                    r = zero;
                    if k + 1 != nu {
                        r = a[idx(k + 2, k - 1)];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != zero {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != zero {
                    if k == m {
                        if l != m {
                            a[idx(k, k - 1)] = -a[idx(k, k - 1)];
                        }
                    } else {
                        a[idx(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..n.min(nu + 1) {
                        let mut pp = a[idx(k, j)] + q * a[idx(k + 1, j)];
                        if k + 1 != nu {
                            pp += r * a[idx(k + 2, j)];
                            a[idx(k + 2, j)] -= pp * z;
                        }
                        a[idx(k + 1, j)] -= pp * y;
                        a[idx(k, j)] -= pp * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * a[idx(i, k)] + y * a[idx(i, k + 1)];
                        if k + 1 != nu {
                            pp += z * a[idx(i, k + 2)];
                            a[idx(i, k + 2)] -= pp * r;
                        }
                        a[idx(i, k + 1)] -= pp * q;
                        a[idx(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex::new(re, im)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solve_matches_residual() {
        let sub = [1.0, -2.0, 0.5];
        let diag = [1e-3, 4.0, -1.0, 2.0];
        let sup = [3.0, 1.0, -1.5];
        let b = [1.0, 2.0, 3.0, 4.0];
        let x = solve_tridiagonal_real(&sub, &diag, &sup, &b).unwrap();
        for i in 0..4 {
            let mut r = diag[i] * x[i];
            if i > 0 {
                r += sub[i - 1] * x[i - 1];
            }
            if i < 3 {
                r += sup[i] * x[i + 1];
            }
            assert!((r - b[i]).abs() < 1e-12, "row {i}");
        }
    }

    #[test]
    fn hessenberg_qr_finds_rotation_pair() {
        // [[0,-1],[1,0]] has eigenvalues ±i
        let mut a = vec![0.0, -1.0, 1.0, 0.0];
        let mut ev = hessenberg_eigenvalues(&mut a, 2).unwrap();
        ev.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn dense_solve_inverts() {
        let mut a = CMatrix::zeros(3, 3);
        let vals = [2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0];
        for (z, v) in a.data.iter_mut().zip(vals) {
            *z = Complex64::new(v, 0.5 * v);
        }
        let x = a.solve(&CMatrix::identity(3)).unwrap();
        let p = a.matmul(&x);
        assert!(p.sub(&CMatrix::identity(3)).frobenius() < 1e-14);
    }
}
