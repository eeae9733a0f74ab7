//! PCA projection and MinMax scaling, both fit on training rows only.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, right_singular_vectors, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Orthonormal principal directions, one per row, by decreasing variance.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
}

/// Fits `k` principal components to the rows of `x` via an SVD of the
/// mean-centred data.
///
/// Each component is sign-normalised so that its largest-magnitude entry is
/// positive.
pub fn pca_fit(x: &Matrix, k: usize) -> Result<PcaModel> {
    let (n, d) = (x.rows(), x.cols());
    if n < 2 {
        return Err(Error::InvalidParameter(alloc::format!("pca needs at least 2 samples, got {n}")));
    }
    if k == 0 || k > (n - 1).min(d) {
        return Err(Error::InvalidParameter(alloc::format!("pca components {k} outside 1..={}", (n - 1).min(d))));
    }
    let mut mean = vec![0.0; d];
    for r in x.iter_rows() {
        mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut centred = x.clone();
    for i in 0..n {
        centred.row_mut(i).iter_mut().zip(&mean).for_each(|(v, m)| *v -= m);
    }
    let (sigmas, mut vectors) = right_singular_vectors(&centred);
    vectors.truncate(k);
    for v in &mut vectors {
        let pivot = v.iter().copied().fold(0.0_f64, |best, e| if e.abs() > best.abs() { e } else { best });
        if pivot < 0.0 {
            v.iter_mut().for_each(|e| *e = -*e);
        }
    }
    let explained_variance = sigmas.iter().take(k).map(|s| s * s / (n - 1) as f64).collect();
    Ok(PcaModel { mean, components: vectors, explained_variance })
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    /// Keeps only the leading `k` components.
    pub fn truncated(&self, k: usize) -> Result<PcaModel> {
        if k == 0 || k > self.n_components() {
            return Err(Error::InvalidParameter(alloc::format!(
                "cannot truncate {} components to {k}",
                self.n_components()
            )));
        }
        Ok(PcaModel {
            mean: self.mean.clone(),
            components: self.components[..k].to_vec(),
            explained_variance: self.explained_variance[..k].to_vec(),
        })
    }

    /// Rows become `(x − mean)·componentsᵀ`.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), actual: x.cols() });
        }
        let k = self.n_components();
        let mut out = Matrix::zeros(x.rows(), k);
        let mut centred = vec![0.0; self.mean.len()];
        for (i, r) in x.iter_rows().enumerate() {
            centred.iter_mut().zip(r.iter().zip(&self.mean)).for_each(|(c, (v, m))| *c = v - m);
            for (j, comp) in self.components.iter().enumerate() {
                out[(i, j)] = dot(&centred, comp);
            }
        }
        Ok(out)
    }

    /// Maps projected rows back to the original feature space.
    pub fn inverse_transform(&self, z: &Matrix) -> Result<Matrix> {
        if z.cols() != self.n_components() {
            return Err(Error::DimensionMismatch { expected: self.n_components(), actual: z.cols() });
        }
        let mut out = Matrix::zeros(z.rows(), self.mean.len());
        for i in 0..z.rows() {
            let row = out.row_mut(i);
            row.copy_from_slice(&self.mean);
            for (c, comp) in z.row(i).iter().zip(&self.components) {
                row.iter_mut().zip(comp).for_each(|(o, v)| *o += c * v);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub range: (f64, f64),
}

pub fn minmax_fit(x: &Matrix) -> Result<MinMaxScaler> {
    if x.rows() == 0 {
        return Err(Error::Empty);
    }
    let mut min = x.row(0).to_vec();
    let mut max = min.clone();
    for r in x.iter_rows().skip(1) {
        for (j, v) in r.iter().enumerate() {
            min[j] = min[j].min(*v);
            max[j] = max[j].max(*v);
        }
    }
    Ok(MinMaxScaler { min, max, range: (-1.0, 1.0) })
}

impl MinMaxScaler {
    /// Values outside the fitted range pass through unclipped; constant
    /// features map to the middle of the target range.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.min.len() {
            return Err(Error::DimensionMismatch { expected: self.min.len(), actual: x.cols() });
        }
        let (lo, hi) = self.range;
        let mut out = x.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                let span = self.max[j] - self.min[j];
                *v = if span > 0.0 { lo + (hi - lo) * (*v - self.min[j]) / span } else { (lo + hi) / 2.0 };
            }
        }
        Ok(out)
    }
}
