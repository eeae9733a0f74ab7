//! Fidelity quantum kernel `|⟨φ(x)|φ(y)⟩|²` and the classical RBF kernel.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_map::{build_feature_map, encode_with, FeatureMapSpec};
use crate::linalg::{symmetric_eigenvalues, Matrix};
use crate::statevector::Statevector;

/// Largest correction clamping may apply before it is treated as a bug.
pub const CLAMP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelRole {
    /// Square and symmetric, rows and columns both index training points.
    Train,
    /// Rows index test points, columns index training points.
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub values: Matrix,
    pub role: KernelRole,
}

impl KernelMatrix {
    pub fn new(values: Matrix, role: KernelRole) -> Result<Self> {
        if role == KernelRole::Train && values.rows() != values.cols() {
            return Err(Error::NotSquare { rows: values.rows(), cols: values.cols() });
        }
        if values.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kernel entry"));
        }
        Ok(Self { values, role })
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = symmetric_eigenvalues(&self.values)?;
        Ok(eig.first().copied().unwrap_or(0.0))
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.values.max_abs_asymmetry()
    }

    pub fn max_diagonal_deviation(&self) -> f64 {
        (0..self.rows().min(self.cols())).map(|i| (self.get(i, i) - 1.0).abs()).fold(0.0, f64::max)
    }
}

fn squared_overlap(a: &Statevector, b: &Statevector) -> Result<f64> {
    let raw = a.inner_product(b)?.norm_sqr();
    let clamped = raw.clamp(0.0, 1.0);
    if (raw - clamped).abs() > CLAMP_TOLERANCE {
        log::error!("fidelity {raw} outside [0,1] beyond rounding");
        debug_assert!(false, "fidelity {raw} outside [0,1]");
    }
    Ok(clamped)
}

pub fn fidelity(spec: &FeatureMapSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let circuit = build_feature_map(spec)?;
    squared_overlap(&encode_with(&circuit, x)?, &encode_with(&circuit, y)?)
}

fn check_rows<R: AsRef<[f64]>>(rows: &[R], width: usize) -> Result<()> {
    for (i, r) in rows.iter().enumerate() {
        let len = r.as_ref().len();
        if len != width {
            return Err(Error::Ragged { row: i, len, expected: width });
        }
    }
    Ok(())
}

fn encode_all<R: AsRef<[f64]>>(spec: &FeatureMapSpec, rows: &[R]) -> Result<Vec<Statevector>> {
    let circuit = build_feature_map(spec)?;
    let out_of_range = rows.iter().flat_map(|r| r.as_ref()).filter(|v| v.abs() > 1.0).count();
    if out_of_range > 0 {
        log::warn!("{out_of_range} feature values outside [-1, 1] encoded unclipped");
    }
    rows.iter().map(|r| encode_with(&circuit, r.as_ref())).collect()
}

/// Fidelity Gram matrix.
///
/// Without `y` the result is the square training matrix over `x`; only the
/// upper triangle is simulated. With `y`, entry `(i, j)` is the fidelity
/// between `y[i]` and `x[j]`.
pub fn gram_matrix<R: AsRef<[f64]>>(spec: &FeatureMapSpec, x: &[R], y: Option<&[R]>) -> Result<KernelMatrix> {
    spec.validate()?;
    check_rows(x, spec.n_features)?;
    let train = encode_all(spec, x)?;
    match y {
        None => {
            let n = train.len();
            let mut k = Matrix::zeros(n, n);
            for i in 0..n {
                k[(i, i)] = 1.0;
                for j in (i + 1)..n {
                    let v = squared_overlap(&train[i], &train[j])?;
                    k[(i, j)] = v;
                    k[(j, i)] = v;
                }
            }
            KernelMatrix::new(k, KernelRole::Train)
        }
        Some(y) => {
            check_rows(y, spec.n_features)?;
            let test = encode_all(spec, y)?;
            let mut k = Matrix::zeros(test.len(), train.len());
            for (i, t) in test.iter().enumerate() {
                for (j, s) in train.iter().enumerate() {
                    k[(i, j)] = squared_overlap(t, s)?;
                }
            }
            KernelMatrix::new(k, KernelRole::Test)
        }
    }
}

/// `K[i][j] = exp(-gamma·‖y_i − x_j‖²)`, or the square matrix over `x` when `y`
/// is absent.
pub fn rbf_kernel<R: AsRef<[f64]>>(x: &[R], y: Option<&[R]>, gamma: f64) -> Result<KernelMatrix> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::InvalidParameter(alloc::format!("rbf gamma must be positive, got {gamma}")));
    }
    let width = x.first().map_or(0, |r| r.as_ref().len());
    check_rows(x, width)?;
    let (rows, role): (&[R], KernelRole) = match y {
        Some(y) => {
            check_rows(y, width)?;
            (y, KernelRole::Test)
        }
        None => (x, KernelRole::Train),
    };
    let mut k = Matrix::zeros(rows.len(), x.len());
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in x.iter().enumerate() {
            let d2: f64 = a.as_ref().iter().zip(b.as_ref()).map(|(p, q)| (p - q) * (p - q)).sum();
            k[(i, j)] = libm::exp(-gamma * d2);
        }
    }
    KernelMatrix::new(k, role)
}

/// `1 / (d · var(X))` over all entries of the training matrix; falls back to 1
/// when the data has no spread.
pub fn scale_gamma<R: AsRef<[f64]>>(x: &[R]) -> f64 {
    let d = x.first().map_or(0, |r| r.as_ref().len());
    let count = (x.len() * d) as f64;
    if count == 0.0 {
        return 1.0;
    }
    let mean = x.iter().flat_map(|r| r.as_ref()).sum::<f64>() / count;
    let var = x.iter().flat_map(|r| r.as_ref()).map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
    if var > 0.0 {
        1.0 / (d as f64 * var)
    } else {
        1.0
    }
}
