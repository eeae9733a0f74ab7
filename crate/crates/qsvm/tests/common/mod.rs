//! Test-only oracles that do not go through the library's simulation or
//! optimisation paths.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use qsvm_core::{Dataset, FeatureMapFamily, Label, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type CMatrix = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    (0..dim).map(|i| (0..dim).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()).collect()
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    let mut out = vec![vec![c(0.0, 0.0); m]; n];
    for i in 0..n {
        for k in 0..inner {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..m {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Single-qubit gate `g` on `target`, identity elsewhere; qubit 0 is the
/// rightmost tensor factor (least significant index bit).
pub fn embed(g: &CMatrix, target: usize, n: usize) -> CMatrix {
    let id = identity(2);
    let mut out = identity(1);
    for q in (0..n).rev() {
        out = kron(&out, if q == target { g } else { &id });
    }
    out
}

pub fn hadamard() -> CMatrix {
    vec![vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], vec![c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]]
}

pub fn rz(theta: f64) -> CMatrix {
    vec![
        vec![Complex64::from_polar(1.0, -theta / 2.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), Complex64::from_polar(1.0, theta / 2.0)],
    ]
}

pub fn cx(control: usize, target: usize, n: usize) -> CMatrix {
    let dim = 1 << n;
    let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
    for b in 0..dim {
        let out = if b >> control & 1 == 1 { b ^ (1 << target) } else { b };
        m[out][b] = c(1.0, 0.0);
    }
    m
}

/// Dense unitary of the feature-map circuit, assembled from the written-out
/// construction rule.
pub fn feature_map_unitary(family: FeatureMapFamily, x: &[f64], reps: usize) -> CMatrix {
    let n = x.len();
    let mut u = identity(1 << n);
    let mut then = |g: CMatrix| u = matmul(&g, &u);
    for _ in 0..reps {
        for q in 0..n {
            then(embed(&hadamard(), q, n));
        }
        match family {
            FeatureMapFamily::Z => {
                for q in 0..n {
                    then(embed(&rz(2.0 * x[q]), q, n));
                }
            }
            FeatureMapFamily::Zz => {
                for q in 0..n {
                    then(embed(&rz(2.0 * x[q]), q, n));
                }
                for i in 0..n {
                    for j in (i + 1)..n {
                        then(cx(i, j, n));
                        then(embed(&rz(2.0 * (PI - x[i]) * (PI - x[j])), j, n));
                        then(cx(i, j, n));
                    }
                }
            }
            FeatureMapFamily::PauliX => {
                for q in 0..n {
                    then(embed(&hadamard(), q, n));
                    then(embed(&rz(2.0 * x[q]), q, n));
                    then(embed(&hadamard(), q, n));
                }
            }
        }
    }
    u
}

pub fn dense_state(family: FeatureMapFamily, x: &[f64], reps: usize) -> Vec<Complex64> {
    feature_map_unitary(family, x, reps).iter().map(|row| row[0]).collect()
}

pub fn dense_fidelity(family: FeatureMapFamily, x: &[f64], y: &[f64], reps: usize) -> f64 {
    let a = dense_state(family, x, reps);
    let b = dense_state(family, y, reps);
    a.iter().zip(&b).map(|(p, q)| p.conj() * q).sum::<Complex64>().norm_sqr()
}

/// Dual objective `Σα − ½ αᵀQα` with `Q_ij = y_i y_j K_ij`.
pub fn dual_value(k: &[Vec<f64>], y: &[f64], a: &[f64]) -> f64 {
    let n = a.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += a[i] * a[j] * y[i] * y[j] * k[i][j];
        }
    }
    a.iter().sum::<f64>() - 0.5 * quad
}

/// Euclidean projection onto `{0 ≤ α ≤ C, Σ α_i y_i = 0}` by bisection on the
/// multiplier of the equality constraint.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |mu: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - mu * yi).clamp(0.0, c)).collect() };
    let g = |a: &[f64]| a.iter().zip(y).map(|(ai, yi)| ai * yi).sum::<f64>();
    let bound = v.iter().fold(0.0_f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Accelerated projected gradient ascent on the SVM dual.
pub fn projected_gradient_dual(k: &[Vec<f64>], y: &[f64], c: f64, iterations: usize) -> Vec<f64> {
    let n = y.len();
    let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect()).collect();
    let lipschitz = (0..n).map(|i| q[i][i]).sum::<f64>().max(1e-12);
    let step = 1.0 / lipschitz;
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0_f64;
    for _ in 0..iterations {
        let grad: Vec<f64> = (0..n).map(|i| 1.0 - (0..n).map(|j| q[i][j] * z[j]).sum::<f64>()).collect();
        let cand: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi + step * gi).collect();
        let next = project(&cand, y, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = next.iter().zip(&a).map(|(nx, ax)| nx + (t - 1.0) / t_next * (nx - ax)).collect();
        // restart on non-monotone progress
        if dual_value(k, y, &next) < dual_value(k, y, &a) {
            z = next.clone();
            t = 1.0;
        } else {
            t = t_next;
        }
        let moved = next.iter().zip(&a).fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
        a = next;
        if moved < 1e-14 && t == 1.0 {
            break;
        }
    }
    a
}

/// Bias from the KKT conditions given (approximate) multipliers.
pub fn kkt_bias(k: &[Vec<f64>], y: &[f64], a: &[f64], c: f64) -> f64 {
    let n = a.len();
    let margin = |i: usize| y[i] - (0..n).map(|j| a[j] * y[j] * k[i][j]).sum::<f64>();
    let eps = 1e-6 * c.max(1.0);
    let free: Vec<usize> = (0..n).filter(|&i| a[i] > eps && a[i] < c - eps).collect();
    if !free.is_empty() {
        return free.iter().map(|&i| margin(i)).sum::<f64>() / free.len() as f64;
    }
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let at_upper = a[i] >= c - eps;
        // y_i f_i ≥ 1 at zero, ≤ 1 at C
        if (y[i] > 0.0) != at_upper {
            lo = lo.max(margin(i));
        } else {
            hi = hi.min(margin(i));
        }
    }
    0.5 * (lo + hi)
}

pub fn gaussian_blobs(per_class: usize, dim: usize, separation: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    dir.iter_mut().for_each(|v| *v *= separation / norm);
    let mut values = Vec::with_capacity(2 * per_class * dim);
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    for (class, label) in [Label::Healthy, Label::Nonhealthy].into_iter().enumerate() {
        for i in 0..per_class {
            for d in dir.iter() {
                let noise: f64 = StandardNormal.sample(&mut rng);
                values.push(noise + if class == 1 { *d } else { 0.0 });
            }
            labels.push(label);
            ids.push(format!("{label}_{i:04}"));
        }
    }
    Dataset::new(ids, Matrix::from_vec(labels.len(), dim, values).unwrap(), labels).unwrap()
}

pub fn random_vectors(rng: &mut ChaCha8Rng, count: usize, dim: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..dim).map(|_| rng.random_range(lo..hi)).collect()).collect()
}
