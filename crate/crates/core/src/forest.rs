//! Random forest of bootstrapped CART trees with Gini splits.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{derive_seed, Label, STREAM_FOREST};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { n_trees: 100, min_samples_split: 2, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { counts: [usize; 2] },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Binary tree stored as an arena; node 0 is the root. Rows with
/// `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf_counts(&self, row: &[f64]) -> [usize; 2] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { counts } => return *counts,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Majority class of the reached leaf; ties go to `Nonhealthy`.
    pub fn predict_row(&self, row: &[f64]) -> Label {
        let [h, n] = self.leaf_counts(row);
        if h > n {
            Label::Healthy
        } else {
            Label::Nonhealthy
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub n_features: usize,
    /// `in_bag[t][i]` is true when sample `i` was drawn for tree `t`.
    pub in_bag: Vec<Vec<bool>>,
}

/// Features considered per node: `⌈√k⌉`.
pub fn max_features(k: usize) -> usize {
    let mut m = libm::sqrt(k as f64) as usize;
    while m * m < k {
        m += 1;
    }
    m.max(1)
}

pub fn forest_train(x: &Matrix, y: &[Label], config: &ForestConfig) -> Result<ForestModel> {
    let n = x.rows();
    if n == 0 || x.cols() == 0 {
        return Err(Error::Empty);
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: y.len() });
    }
    if !(y.contains(&Label::Healthy) && y.contains(&Label::Nonhealthy)) {
        return Err(Error::SingleClass);
    }
    if config.n_trees == 0 || config.min_samples_split < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "need n_trees >= 1 and min_samples_split >= 2, got {} and {}",
            config.n_trees,
            config.min_samples_split
        )));
    }
    let mut trees = Vec::with_capacity(config.n_trees);
    let mut in_bag = Vec::with_capacity(config.n_trees);
    for t in 0..config.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_FOREST, t as u64));
        let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut mask = vec![false; n];
        sample.iter().for_each(|&i| mask[i] = true);
        let mut builder = TreeBuilder { x, y, min_samples_split: config.min_samples_split, rng, nodes: Vec::new() };
        builder.grow(sample);
        trees.push(DecisionTree { nodes: builder.nodes });
        in_bag.push(mask);
    }
    Ok(ForestModel { trees, n_features: x.cols(), in_bag })
}

struct TreeBuilder<'a> {
    x: &'a Matrix,
    y: &'a [Label],
    min_samples_split: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

fn gini(counts: [usize; 2]) -> f64 {
    let total = (counts[0] + counts[1]) as f64;
    if total == 0.0 {
        return 0.0;
    }
    let p = counts[0] as f64 / total;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

impl TreeBuilder<'_> {
    fn counts(&self, samples: &[usize]) -> [usize; 2] {
        let mut c = [0; 2];
        samples.iter().for_each(|&i| c[self.y[i].index()] += 1);
        c
    }

    fn grow(&mut self, samples: Vec<usize>) -> usize {
        let id = self.nodes.len();
        let counts = self.counts(&samples);
        self.nodes.push(Node::Leaf { counts });
        if counts[0] == 0 || counts[1] == 0 || samples.len() < self.min_samples_split {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&samples) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = samples.iter().partition(|&&i| self.x[(i, feature)] <= threshold);
        let left = self.grow(left);
        let right = self.grow(right);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }

    /// Lowest weighted Gini over `⌈√k⌉` random non-constant features. Falls
    /// through to further features while the sampled ones are constant.
    fn best_split(&mut self, samples: &[usize]) -> Option<(usize, f64)> {
        let k = self.x.cols();
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(&mut self.rng);
        let wanted = max_features(k);
        let total = self.counts(samples);
        let n = samples.len() as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut visited = 0;
        let mut values: Vec<(f64, Label)> = Vec::with_capacity(samples.len());
        for &f in &order {
            if visited >= wanted && best.is_some() {
                break;
            }
            values.clear();
            values.extend(samples.iter().map(|&i| (self.x[(i, f)], self.y[i])));
            values.sort_by(|a, b| a.0.total_cmp(&b.0));
            if values[0].0 == values[values.len() - 1].0 {
                continue;
            }
            visited += 1;
            let mut left = [0usize; 2];
            for w in 0..values.len() - 1 {
                left[values[w].1.index()] += 1;
                if values[w].0 == values[w + 1].0 {
                    continue;
                }
                let right = [total[0] - left[0], total[1] - left[1]];
                let nl = (w + 1) as f64;
                let score = (nl * gini(left) + (n - nl) * gini(right)) / n;
                if best.is_none_or(|(s, _, _)| score < s) {
                    let mid = values[w].0 + (values[w + 1].0 - values[w].0) / 2.0;
                    // guard against the midpoint rounding onto the upper value
                    let threshold = if mid < values[w + 1].0 { mid } else { values[w].0 };
                    best = Some((score, f, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

impl ForestModel {
    fn check(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.n_features {
            return Err(Error::DimensionMismatch { expected: self.n_features, actual: x.cols() });
        }
        Ok(())
    }

    /// Vote counts `[healthy, nonhealthy]` for one row.
    pub fn votes(&self, row: &[f64]) -> [usize; 2] {
        let mut v = [0; 2];
        self.trees.iter().for_each(|t| v[t.predict_row(row).index()] += 1);
        v
    }

    /// Out-of-bag accuracy over the training samples that at least one tree
    /// left out; `None` when every tree saw every sample.
    pub fn oob_accuracy(&self, x: &Matrix, y: &[Label]) -> Result<Option<f64>> {
        self.check(x)?;
        let (mut hit, mut seen) = (0usize, 0usize);
        for (i, row) in x.iter_rows().enumerate() {
            let mut v = [0usize; 2];
            for (t, tree) in self.trees.iter().enumerate() {
                if !self.in_bag[t][i] {
                    v[tree.predict_row(row).index()] += 1;
                }
            }
            if v[0] + v[1] == 0 {
                continue;
            }
            seen += 1;
            let pred = if v[0] > v[1] { Label::Healthy } else { Label::Nonhealthy };
            hit += usize::from(pred == y[i]);
        }
        Ok((seen > 0).then(|| hit as f64 / seen as f64))
    }
}

/// Majority vote over trees; an even split goes to `Nonhealthy`.
pub fn forest_predict(model: &ForestModel, x: &Matrix) -> Result<Vec<Label>> {
    model.check(x)?;
    Ok(x.iter_rows()
        .map(|r| {
            let [h, n] = model.votes(r);
            if h > n {
                Label::Healthy
            } else {
                Label::Nonhealthy
            }
        })
        .collect())
}
