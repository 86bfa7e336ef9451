//! Dense row-major matrices, Householder least squares and a one-sided
//! Jacobi singular value decomposition.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::FeatureError;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { rows: rows.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(i);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    /// Keep only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                out[(i, jj)] = self[(i, j)];
            }
        }
        out
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "column mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self { rows: self.rows + other.rows, cols: self.cols, data }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub coeffs: Vec<f64>,
    /// Residual sum of squares.
    pub sse: f64,
}

/// Ordinary least squares `min |X b - y|` via Householder QR.
pub fn least_squares(x: &Matrix, y: &[f64]) -> Result<LeastSquares, FeatureError> {
    let (n, p) = (x.rows(), x.cols());
    assert_eq!(n, y.len(), "design/response length mismatch");
    if n < p || p == 0 {
        return Err(FeatureError::SingularDesign);
    }
    // Column-major working copy.
    let mut a: Vec<Vec<f64>> = (0..p).map(|j| x.column(j)).collect();
    let mut b = y.to_vec();
    let col_norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();
    for k in 0..p {
        let alpha = norm(&a[k][k..]);
        if !(alpha > 1e-12 * col_norms[k].max(f64::MIN_POSITIVE)) {
            return Err(FeatureError::SingularDesign);
        }
        let alpha = if a[k][k] > 0.0 { -alpha } else { alpha };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|e| e * e).sum();
        if vnorm2 > 0.0 {
            for col in a.iter_mut().skip(k) {
                reflect(&v, vnorm2, &mut col[k..]);
            }
            reflect(&v, vnorm2, &mut b[k..]);
        }
    }
    let mut coeffs = vec![0.0; p];
    for k in (0..p).rev() {
        let mut s = b[k];
        for j in k + 1..p {
            s -= a[j][k] * coeffs[j];
        }
        coeffs[k] = s / a[k][k];
    }
    let sse = b[p..].iter().map(|e| e * e).sum();
    if !coeffs.iter().all(|c| c.is_finite()) {
        return Err(FeatureError::SingularDesign);
    }
    Ok(LeastSquares { coeffs, sse })
}

fn reflect(v: &[f64], vnorm2: f64, x: &mut [f64]) {
    let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let f = 2.0 * dot / vnorm2;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= f * vi;
    }
}

fn norm(x: &[f64]) -> f64 {
    // Scaled to avoid overflow on large inputs.
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * x.iter().map(|v| (v / scale) * (v / scale)).sum::<f64>().sqrt()
}

/// Thin SVD `A = U diag(s) V^T` with singular values in non-increasing order.
/// `V` is always a full `p x p` orthogonal matrix; `U` columns belonging to
/// zero singular values are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(a: &Matrix) -> Svd {
    let (n, p) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<f64>> = (0..p).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            e
        })
        .collect();
    const MAX_SWEEPS: usize = 80;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in i + 1..p {
                let (alpha, beta, gamma) = {
                    let (ci, cj) = (&cols[i], &cols[j]);
                    let mut al = 0.0;
                    let mut be = 0.0;
                    let mut ga = 0.0;
                    for k in 0..n {
                        al += ci[k] * ci[k];
                        be += cj[k] * cj[k];
                        ga += ci[k] * cj[k];
                    }
                    (al, be, ga)
                };
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut cols, i, j, c, s);
                rotate_pair(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let sv: Vec<f64> = cols.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| sv[y].total_cmp(&sv[x]).then(x.cmp(&y)));
    let mut u = Matrix::zeros(n, p);
    let mut vm = Matrix::zeros(p, p);
    let mut singular_values = Vec::with_capacity(p);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    for (jj, &j) in order.iter().enumerate() {
        let s = sv[j];
        // Deterministic sign: largest-magnitude loading positive.
        let pivot = v[j].iter().cloned().fold(0.0f64, |m, e| if e.abs() > m.abs() { e } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for k in 0..p {
            vm[(k, jj)] = sign * v[j][k];
        }
        let live = s > 1e-13 * smax.max(f64::MIN_POSITIVE);
        for k in 0..n {
            u[(k, jj)] = if live { sign * cols[j][k] / s } else { 0.0 };
        }
        singular_values.push(if live { s } else { 0.0 });
    }
    Svd { u, singular_values, v: vm }
}

fn rotate_pair(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(j);
    let (ci, cj) = (&mut left[i], &mut right[0]);
    for (a, b) in ci.iter_mut().zip(cj.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_recovers_line() {
        let x = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0], vec![1.0, 3.0]]);
        let fit = least_squares(&x, &[1.0, 3.0, 5.0, 7.0]).unwrap();
        assert!((fit.coeffs[0] - 1.0).abs() < 1e-12);
        assert!((fit.coeffs[1] - 2.0).abs() < 1e-12);
        assert!(fit.sse < 1e-20);
    }

    #[test]
    fn least_squares_detects_collinearity() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]);
        assert_eq!(least_squares(&x, &[1.0, 2.0, 3.0]), Err(FeatureError::SingularDesign));
    }

    #[test]
    fn svd_reconstructs() {
        let a =
            Matrix::from_rows(&[vec![2.0, 0.0, 1.0], vec![-1.0, 3.0, 0.5], vec![0.0, 1.0, 1.0], vec![4.0, -2.0, 0.0]]);
        let d = svd(&a);
        for w in d.singular_values.windows(2) {
            assert!(w[0] >= w[1]);
        }
        let vtv = d.v.transpose().matmul(&d.v);
        let mut us = d.u.clone();
        for i in 0..us.rows() {
            for j in 0..us.cols() {
                us[(i, j)] *= d.singular_values[j];
            }
        }
        let back = us.matmul(&d.v.transpose());
        for i in 0..4 {
            for j in 0..3 {
                assert!((back[(i, j)] - a[(i, j)]).abs() < 1e-12);
                if i < 3 {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((vtv[(i, j)] - e).abs() < 1e-12);
                }
            }
        }
    }
}
