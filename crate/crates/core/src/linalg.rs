//! Small dense linear algebra: a row-major matrix, Jacobi eigenvalues for
//! symmetric matrices, a shifted Cholesky definiteness test and a one-sided
//! Jacobi SVD that yields right singular vectors.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major `f64` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
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

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, actual: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices, rejecting ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Ragged { row: i, len: r.len(), expected: cols });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
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

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on a zero chunk size
        let step = self.cols.max(1);
        self.data.chunks_exact(step).take(if self.cols == 0 { 0 } else { self.rows })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// New matrix holding the given rows, in order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self { rows: indices.len(), cols: self.cols, data }
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

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows.min(self.cols) {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
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

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, ascending.
pub fn symmetric_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let mut a = m.clone();
    for sweep in 0..100 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            diag += a[(i, i)] * a[(i, i)];
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        if sweep == 99 {
            log::warn!("jacobi eigenvalue iteration hit sweep cap");
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// True when `m + shift·I` admits a Cholesky factorisation, i.e. the smallest
/// eigenvalue of `m` exceeds `-shift` up to rounding.
pub fn is_positive_definite_shifted(m: &Matrix, shift: f64) -> bool {
    let n = m.rows();
    if n != m.cols() {
        return false;
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)] + shift - dot(&l.row(j)[..j], &l.row(j)[..j]);
        if d.is_nan() || d <= 0.0 {
            return false;
        }
        d = libm::sqrt(d);
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let s = m[(i, j)] - dot(&l.row(i)[..j], &l.row(j)[..j]);
            l[(i, j)] = s / d;
        }
    }
    true
}

/// Singular values (descending) and matching right singular vectors of `a`.
///
/// Vectors are returned as rows of length `a.cols()`; there are
/// `min(rows, cols)` of them. Directions belonging to zero singular values
/// are completed to an orthonormal set.
pub fn right_singular_vectors(a: &Matrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (n, d) = (a.rows(), a.cols());
    let mut pairs: Vec<(f64, Vec<f64>)> = if n <= d {
        // Orthogonalise the n columns of Aᵀ: Aᵀ W = V Σ, so normalised columns
        // are the right singular vectors directly.
        let mut cols: Vec<Vec<f64>> = a.iter_rows().map(<[f64]>::to_vec).collect();
        one_sided_jacobi(&mut cols, None);
        cols.into_iter()
            .map(|c| {
                let s = libm::sqrt(dot(&c, &c));
                let v = if s > 0.0 { c.iter().map(|x| x / s).collect() } else { vec![0.0; d] };
                (s, v)
            })
            .collect()
    } else {
        // Orthogonalise the d columns of A while accumulating V.
        let t = a.transpose();
        let mut cols: Vec<Vec<f64>> = t.iter_rows().map(<[f64]>::to_vec).collect();
        let mut v: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e
            })
            .collect();
        one_sided_jacobi(&mut cols, Some(&mut v));
        cols.iter().zip(v).map(|(c, v)| (libm::sqrt(dot(c, c)), v)).collect()
    };
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));

    let scale = pairs.first().map_or(0.0, |p| p.0);
    let cutoff = scale * 1e-13 * (n.max(d) as f64);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(pairs.len());
    let mut sigmas = Vec::with_capacity(pairs.len());
    let mut missing = 0usize;
    for (s, v) in pairs {
        if s > cutoff && s > 0.0 {
            sigmas.push(s);
            basis.push(v);
        } else {
            sigmas.push(0.0);
            missing += 1;
        }
    }
    // Null-space completion by Gram-Schmidt against the standard basis.
    let mut e = 0;
    while missing > 0 && e < d {
        let mut cand = vec![0.0; d];
        cand[e] = 1.0;
        e += 1;
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&cand, b);
                cand.iter_mut().zip(b).for_each(|(c, bi)| *c -= p * bi);
            }
        }
        let norm = libm::sqrt(dot(&cand, &cand));
        if norm > 1e-6 {
            cand.iter_mut().for_each(|c| *c /= norm);
            basis.push(cand);
            missing -= 1;
        }
    }
    (sigmas, basis)
}

fn one_sided_jacobi(cols: &mut [Vec<f64>], mut accumulate: Option<&mut [Vec<f64>]>) {
    let m = cols.len();
    let mut norms: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(&cols[p], &cols[q]);
                if gamma.abs() <= 1e-15 * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
                norms[p] = dot(&lo[p], &lo[p]);
                norms[q] = dot(&hi[0], &hi[0]);
                if let Some(v) = accumulate.as_deref_mut() {
                    let (lo, hi) = v.split_at_mut(q);
                    rotate(&mut lo[p], &mut hi[0], c, s);
                }
            }
        }
        if !rotated {
            return;
        }
    }
    log::warn!("one-sided jacobi svd hit sweep cap");
}

fn rotate(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xa, yb) = (*x, *y);
        *x = c * xa - s * yb;
        *y = s * xa + c * yb;
    }
}
