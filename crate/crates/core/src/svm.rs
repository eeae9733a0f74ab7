//! Binary soft-margin SVM on a precomputed kernel.
//!
//! Training runs SMO on the dual
//!
//! ```text
//! max  Σα_i − ½ ΣΣ α_i α_j y_i y_j K_ij
//! s.t. 0 ≤ α_i ≤ C,  Σ α_i y_i = 0
//! ```
//!
//! with second-order working-set selection: the first index maximises the
//! KKT violation, the second maximises the guaranteed objective gain.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;
use crate::linalg::is_positive_definite_shifted;

/// Minimum eigenvalue accepted before diagonal jitter is added.
pub const PSD_TOLERANCE: f64 = 1e-8;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoConfig {
    pub c: f64,
    /// Stop once the maximal KKT violation drops below this.
    pub tolerance: f64,
    /// Iteration cap, in units of `n` pair updates.
    pub max_sweeps: usize,
}

impl Default for SmoConfig {
    fn default() -> Self {
        Self { c: 1.0, tolerance: 1e-3, max_sweeps: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub alphas: Vec<f64>,
    pub labels: Vec<f64>,
    pub bias: f64,
    pub support_indices: Vec<usize>,
    pub c: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SvmModel {
    /// `Σα_i − ½ ΣΣ α_i α_j y_i y_j K_ij`
    pub fn dual_objective(&self, k: &KernelMatrix) -> f64 {
        dual_objective(k, &self.labels, &self.alphas)
    }
}

pub fn dual_objective(k: &KernelMatrix, y: &[f64], alphas: &[f64]) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alphas[i] * alphas[j] * y[i] * y[j] * k.get(i, j);
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

pub fn svm_train(k: &KernelMatrix, y: &[f64], config: &SmoConfig) -> Result<SvmModel> {
    Smo::new(k, y, config)?.run(None)
}

/// Like [`svm_train`], also returning the dual objective after every update.
pub fn svm_train_traced(k: &KernelMatrix, y: &[f64], config: &SmoConfig) -> Result<(SvmModel, Vec<f64>)> {
    let mut trace = Vec::new();
    let model = Smo::new(k, y, config)?.run(Some(&mut trace))?;
    Ok((model, trace))
}

struct Smo<'a> {
    k: &'a KernelMatrix,
    jitter: f64,
    y: &'a [f64],
    c: f64,
    tolerance: f64,
    max_iterations: usize,
    alpha: Vec<f64>,
    grad: Vec<f64>,
}

impl<'a> Smo<'a> {
    fn new(k: &'a KernelMatrix, y: &'a [f64], config: &SmoConfig) -> Result<Self> {
        let n = k.rows();
        if n != k.cols() {
            return Err(Error::NotSquare { rows: k.rows(), cols: k.cols() });
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: y.len() });
        }
        if n == 0 {
            return Err(Error::Empty);
        }
        if !config.c.is_finite() || config.c <= 0.0 {
            return Err(Error::InvalidParameter(alloc::format!("C must be positive, got {}", config.c)));
        }
        if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
            return Err(Error::InvalidParameter(alloc::format!("label {bad} is not +1 or -1")));
        }
        if !(y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0)) {
            return Err(Error::SingleClass);
        }
        let asym = k.max_asymmetry();
        if asym > 1e-8 {
            return Err(Error::InvalidParameter(alloc::format!("kernel asymmetric by {asym}")));
        }
        let jitter = if is_positive_definite_shifted(&k.values, PSD_TOLERANCE) {
            0.0
        } else {
            log::warn!("kernel matrix not PSD within {PSD_TOLERANCE}; adding {PSD_TOLERANCE} to diagonal");
            PSD_TOLERANCE
        };
        Ok(Self {
            k,
            jitter,
            y,
            c: config.c,
            tolerance: config.tolerance,
            max_iterations: config.max_sweeps.saturating_mul(n),
            alpha: vec![0.0; n],
            grad: vec![-1.0; n],
        })
    }

    fn kernel(&self, i: usize, j: usize) -> f64 {
        let v = self.k.get(i, j);
        if i == j {
            v + self.jitter
        } else {
            v
        }
    }

    fn is_upper(&self, t: usize) -> bool {
        self.alpha[t] >= self.c
    }

    fn is_lower(&self, t: usize) -> bool {
        self.alpha[t] <= 0.0
    }

    /// Returns `None` once the maximal violation is below tolerance.
    fn select_pair(&self) -> Option<(usize, usize)> {
        let n = self.alpha.len();
        let mut gmax = f64::NEG_INFINITY;
        let mut first = None;
        for t in 0..n {
            let in_up = if self.y[t] > 0.0 { !self.is_upper(t) } else { !self.is_lower(t) };
            if in_up {
                let v = -self.y[t] * self.grad[t];
                if v >= gmax {
                    gmax = v;
                    first = Some(t);
                }
            }
        }
        let i = first?;
        let mut gmax2 = f64::NEG_INFINITY;
        let mut second = None;
        let mut best_gain = f64::INFINITY;
        for j in 0..n {
            let in_low = if self.y[j] > 0.0 { !self.is_lower(j) } else { !self.is_upper(j) };
            if !in_low {
                continue;
            }
            let yg = self.y[j] * self.grad[j];
            gmax2 = gmax2.max(yg);
            let grad_diff = gmax + yg;
            if grad_diff > 0.0 {
                let quad = self.kernel(i, i) + self.kernel(j, j) - 2.0 * self.kernel(i, j);
                let gain = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                if gain <= best_gain {
                    best_gain = gain;
                    second = Some(j);
                }
            }
        }
        if gmax + gmax2 < self.tolerance {
            return None;
        }
        second.map(|j| (i, j))
    }

    fn update_pair(&mut self, i: usize, j: usize) {
        let c = self.c;
        let (yi, yj) = (self.y[i], self.y[j]);
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let kij = self.kernel(i, j);
        let mut quad = self.kernel(i, i) + self.kernel(j, j) - 2.0 * kij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let (mut ai, mut aj) = (old_i, old_j);
        if yi != yj {
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..self.alpha.len() {
            let yt = self.y[t];
            self.grad[t] += yt * (yi * self.kernel(i, t) * di + yj * self.kernel(j, t) * dj);
        }
    }

    fn objective(&self) -> f64 {
        // W(α) = −½ Σ α_i (G_i − 1)
        -0.5 * self.alpha.iter().zip(&self.grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>()
    }

    /// Bias from free support vectors, or the midpoint of the feasible
    /// interval when every multiplier sits at a bound.
    fn bias(&self) -> f64 {
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free, mut sum_free) = (0usize, 0.0);
        for t in 0..self.alpha.len() {
            let yg = self.y[t] * self.grad[t];
            if self.is_upper(t) {
                if self.y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if self.is_lower(t) {
                if self.y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum_free += yg;
            }
        }
        let rho = if free > 0 { sum_free / free as f64 } else { (ub + lb) / 2.0 };
        -rho
    }

    fn run(mut self, mut trace: Option<&mut Vec<f64>>) -> Result<SvmModel> {
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iterations {
            match self.select_pair() {
                None => {
                    converged = true;
                    break;
                }
                Some((i, j)) => self.update_pair(i, j),
            }
            iterations += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.push(self.objective());
            }
        }
        if !converged {
            log::warn!("SMO stopped at iteration cap {} without reaching tolerance", self.max_iterations);
        }
        let bias = self.bias();
        let support_indices = self.alpha.iter().enumerate().filter(|(_, &a)| a > 0.0).map(|(i, _)| i).collect();
        Ok(SvmModel {
            alphas: self.alpha,
            labels: self.y.to_vec(),
            bias,
            support_indices,
            c: self.c,
            iterations,
            converged,
        })
    }
}

/// `f_i = Σ_j α_j y_j K_test[i][j] + bias`
pub fn svm_decision(model: &SvmModel, k_test: &KernelMatrix) -> Result<Vec<f64>> {
    if k_test.cols() != model.alphas.len() {
        return Err(Error::DimensionMismatch { expected: model.alphas.len(), actual: k_test.cols() });
    }
    Ok((0..k_test.rows())
        .map(|i| {
            let row = k_test.row(i);
            model.support_indices.iter().map(|&j| model.alphas[j] * model.labels[j] * row[j]).sum::<f64>() + model.bias
        })
        .collect())
}

/// Signs of the decision values; zero maps to `+1`.
pub fn svm_predict(model: &SvmModel, k_test: &KernelMatrix) -> Result<Vec<f64>> {
    Ok(svm_decision(model, k_test)?.into_iter().map(|f| if f >= 0.0 { 1.0 } else { -1.0 }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelRole;
    use crate::linalg::Matrix;

    fn km(rows: &[&[f64]]) -> KernelMatrix {
        KernelMatrix::new(Matrix::from_rows(rows).unwrap(), KernelRole::Train).unwrap()
    }

    fn cfg(c: f64) -> SmoConfig {
        SmoConfig { c, ..SmoConfig::default() }
    }

    #[test]
    fn correlated_pair() {
        let k = km(&[&[1.0, 0.5], &[0.5, 1.0]]);
        let m = svm_train(&k, &[1.0, -1.0], &cfg(10.0)).unwrap();
        assert!((m.alphas[0] - 2.0).abs() < 1e-9 && (m.alphas[1] - 2.0).abs() < 1e-9);
        assert!(m.bias.abs() < 1e-9);
        let f = svm_decision(&m, &k).unwrap();
        assert!((f[0] - 1.0).abs() < 1e-9 && (f[1] + 1.0).abs() < 1e-9);
        assert_eq!(svm_predict(&m, &k).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn orthogonal_pair() {
        let k = km(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let m = svm_train(&k, &[1.0, -1.0], &cfg(10.0)).unwrap();
        assert!((m.alphas[0] - 1.0).abs() < 1e-9 && (m.alphas[1] - 1.0).abs() < 1e-9);
        assert!(m.bias.abs() < 1e-9);
    }

    #[test]
    fn duplicated_point_opposite_labels_hits_box() {
        let k = km(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let m = svm_train(&k, &[1.0, -1.0], &cfg(10.0)).unwrap();
        assert_eq!(m.alphas, vec![10.0, 10.0]);
    }

    #[test]
    fn zero_row_predicts_sign_of_bias() {
        let k = km(&[&[1.0, 0.2, 0.1], &[0.2, 1.0, 0.3], &[0.1, 0.3, 1.0]]);
        let m = svm_train(&k, &[1.0, 1.0, -1.0], &cfg(1.0)).unwrap();
        let zero = KernelMatrix::new(Matrix::zeros(1, 3), KernelRole::Test).unwrap();
        let f = svm_decision(&m, &zero).unwrap();
        assert_eq!(f[0], m.bias);
        let p = svm_predict(&m, &zero).unwrap()[0];
        assert_eq!(p, if m.bias >= 0.0 { 1.0 } else { -1.0 });
    }

    #[test]
    fn training_errors() {
        let k = km(&[&[1.0, 0.5], &[0.5, 1.0]]);
        assert_eq!(svm_train(&k, &[1.0, 1.0], &cfg(1.0)).unwrap_err(), Error::SingleClass);
        assert!(svm_train(&k, &[1.0, -1.0], &cfg(0.0)).is_err());
        assert!(svm_train(&k, &[1.0, 0.0], &cfg(1.0)).is_err());
        let rect = KernelMatrix::new(Matrix::zeros(2, 3), KernelRole::Test).unwrap();
        assert!(matches!(svm_train(&rect, &[1.0, -1.0], &cfg(1.0)), Err(Error::NotSquare { .. })));
        let m = svm_train(&k, &[1.0, -1.0], &cfg(1.0)).unwrap();
        assert!(svm_decision(&m, &rect).is_err());
    }

    #[test]
    fn indefinite_kernel_gets_jitter_not_error() {
        // eigenvalues 1 ± 1.0000001: slightly indefinite
        let k = km(&[&[1.0, 1.000_000_1], &[1.000_000_1, 1.0]]);
        assert!(svm_train(&k, &[1.0, -1.0], &cfg(1.0)).is_ok());
    }
}
