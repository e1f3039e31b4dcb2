//! Small dense linear algebra: row-major matrices, symmetric eigenvalues
//! (Householder tridiagonalization + implicit QL) and singular values
//! (one-sided Jacobi).

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{hypot, sqrt};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries.
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// Eigenvalues of a symmetric matrix, ascending. Only the lower triangle is read.
pub fn symmetric_eigenvalues(m: &Matrix) -> Vec<f64> {
    assert_eq!(m.rows, m.cols, "square matrix required");
    let n = m.rows;
    if n == 0 {
        return Vec::new();
    }
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if j <= i { m.get(i, j) } else { m.get(j, i) }).collect())
        .collect();
    let (mut d, mut e) = tridiagonalize(&mut a);
    tql(&mut d, &mut e);
    d.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    d
}

/// Householder reduction to tridiagonal form (eigenvalues only).
/// Returns the diagonal and the subdiagonal (`e[0] = 0`).
fn tridiagonalize(a: &mut [Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[i][k].abs()).sum();
            if scale == 0.0 {
                e[i] = a[i][l];
            } else {
                for k in 0..=l {
                    a[i][k] /= scale;
                    h += a[i][k] * a[i][k];
                }
                let f = a[i][l];
                let g = if f >= 0.0 { -sqrt(h) } else { sqrt(h) };
                e[i] = scale * g;
                h -= f * g;
                a[i][l] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j][k] * a[i][k];
                    }
                    for k in j + 1..=l {
                        g += a[k][j] * a[i][k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i][j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[i][j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j][k] -= f * e[k] + g * a[i][k];
                    }
                }
            }
        } else {
            e[i] = a[i][l];
        }
        d[i] = h;
    }
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[i][i];
    }
    (d, e)
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
fn tql(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Singular values, descending.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    // work on the orientation with more rows than columns
    let a = if m.rows >= m.cols { m.clone() } else { m.transpose() };
    let (rows, cols) = (a.rows, a.cols);
    let mut u: Vec<Vec<f64>> = (0..cols).map(|j| a.column(j)).collect();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..rows {
                    alpha += u[p][i] * u[p][i];
                    beta += u[q][i] * u[q][i];
                    gamma += u[p][i] * u[q][i];
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + hypot(1.0, zeta));
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / hypot(1.0, t);
                let s = c * t;
                for i in 0..rows {
                    let (x, y) = (u[p][i], u[q][i]);
                    u[p][i] = c * x - s * y;
                    u[q][i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = u.iter().map(|col| sqrt(col.iter().map(|v| v * v).sum())).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    sv
}

/// Numerical rank with threshold `rel · σ_max`.
pub fn rank(m: &Matrix, rel: f64) -> usize {
    let sv = singular_values(m);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel * top).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn to_na(m: &Matrix) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(m.rows, m.cols, &m.data)
    }

    fn random_symmetric(n: usize, vals: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        let mut it = vals.iter().cycle();
        for i in 0..n {
            for j in 0..=i {
                let v = *it.next().unwrap();
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    #[test]
    fn diagonal_and_known_spectrum() {
        let m = Matrix::from_rows(3, 3, vec![2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 5.0]);
        assert_eq!(symmetric_eigenvalues(&m), vec![-1.0, 2.0, 5.0]);
        // [[2,1],[1,2]] → 1, 3
        let m = Matrix::from_rows(2, 2, vec![2.0, 1.0, 1.0, 2.0]);
        let ev = symmetric_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn bordered_indefinite() {
        // [[1,0,1],[0,1,0],[1,0,0]] has one negative eigenvalue
        let m = Matrix::from_rows(3, 3, vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let ev = symmetric_eigenvalues(&m);
        assert_eq!(ev.iter().filter(|&&v| v < 0.0).count(), 1);
        assert_eq!(ev.iter().filter(|&&v| v > 0.0).count(), 2);
    }

    #[test]
    fn rank_deficient() {
        let m = Matrix::from_rows(3, 2, vec![1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert_eq!(rank(&m, 1e-10), 1);
        let sv = singular_values(&m);
        assert!((sv[0] - sqrt(70.0)).abs() < 1e-12);
        assert_eq!(rank(&Matrix::zeros(2, 2), 1e-10), 0);
    }

    proptest! {
        #[test]
        fn eigenvalues_match_nalgebra(n in 1usize..9, vals in proptest::collection::vec(-10.0f64..10.0, 45)) {
            let m = random_symmetric(n, &vals);
            let ours = symmetric_eigenvalues(&m);
            let mut theirs: std::vec::Vec<f64> = to_na(&m).symmetric_eigenvalues().iter().copied().collect();
            theirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let scale = m.max_abs().max(1.0);
            for (a, b) in ours.iter().zip(&theirs) {
                prop_assert!((a - b).abs() < 1e-10 * scale * n as f64, "{:?} vs {:?}", ours, theirs);
            }
        }

        #[test]
        fn singular_values_match_nalgebra(r in 1usize..8, c in 1usize..8, vals in proptest::collection::vec(-5.0f64..5.0, 64)) {
            let m = Matrix::from_rows(r, c, vals[..r * c].to_vec());
            let ours = singular_values(&m);
            let mut theirs: std::vec::Vec<f64> = to_na(&m).singular_values().iter().copied().collect();
            theirs.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (a, b) in ours.iter().zip(&theirs) {
                prop_assert!((a - b).abs() < 1e-10 * (1.0 + theirs[0]));
            }
        }
    }
}
