//! Cross-validated experiment grid: PCA sizes × models × feature maps.
//!
//! Per fold, PCA and the MinMax scaler are fit on the training rows only;
//! both splits are then transformed and every configured model is trained
//! and scored on the held-out rows.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cv::{accuracy, stratified_kfold, FoldSplit};
use crate::dataset::{derive_seed, Dataset, Label, STREAM_FOLDS, STREAM_FOREST};
use crate::error::{Error, Result};
use crate::feature_map::{FeatureMapFamily, FeatureMapSpec, DEFAULT_REPS};
use crate::forest::{forest_predict, forest_train, ForestConfig};
use crate::kernel::{gram_matrix, rbf_kernel, scale_gamma, KernelMatrix};
use crate::linalg::Matrix;
use crate::preprocess::{minmax_fit, pca_fit, MinMaxScaler, PcaModel};
use crate::statevector::MAX_QUBITS;
use crate::svm::{svm_predict, svm_train, SmoConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Svm,
    Rf,
    Qsvm,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Svm => "svm",
            ModelKind::Rf => "rf",
            ModelKind::Qsvm => "qsvm",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svm" => Ok(ModelKind::Svm),
            "rf" | "random_forest" => Ok(ModelKind::Rf),
            "qsvm" | "qsvc" => Ok(ModelKind::Qsvm),
            other => Err(Error::InvalidParameter(alloc::format!("unknown model '{other}'"))),
        }
    }
}

/// RBF bandwidth choice for the classical SVM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaRule {
    /// `1 / (d · var(X_train))`
    Scale,
    Fixed(f64),
}

impl FromStr for GammaRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("scale") {
            return Ok(GammaRule::Scale);
        }
        match s.parse::<f64>() {
            Ok(g) if g > 0.0 && g.is_finite() => Ok(GammaRule::Fixed(g)),
            _ => Err(Error::InvalidParameter(alloc::format!("gamma must be 'scale' or a positive number, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub pca_components: Vec<usize>,
    pub models: Vec<ModelKind>,
    pub maps: Vec<FeatureMapFamily>,
    pub reps: usize,
    pub c: f64,
    pub gamma: GammaRule,
    pub n_trees: usize,
    pub k_folds: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            pca_components: alloc::vec![3, 6, 9],
            models: alloc::vec![ModelKind::Svm, ModelKind::Rf, ModelKind::Qsvm],
            maps: FeatureMapFamily::ALL.to_vec(),
            reps: DEFAULT_REPS,
            c: 1.0,
            gamma: GammaRule::Scale,
            n_trees: 100,
            k_folds: 5,
            seed: 42,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.pca_components.is_empty() || self.pca_components.iter().any(|&k| !(1..=MAX_QUBITS).contains(&k)) {
            return bad(alloc::format!(
                "pca components {:?} must be non-empty and within 1..={MAX_QUBITS}",
                self.pca_components
            ));
        }
        if self.models.is_empty() {
            return bad("no models configured".into());
        }
        if self.models.contains(&ModelKind::Qsvm) {
            if self.maps.is_empty() {
                return bad("qsvm requested without feature maps".into());
            }
            FeatureMapSpec::new(FeatureMapFamily::Z, 1, self.reps)?;
        }
        if !self.c.is_finite() || self.c <= 0.0 {
            return bad(alloc::format!("C must be positive, got {}", self.c));
        }
        if self.k_folds < 2 {
            return bad(alloc::format!("k_folds must be at least 2, got {}", self.k_folds));
        }
        if self.n_trees == 0 {
            return bad("n_trees must be at least 1".into());
        }
        Ok(())
    }

    /// Model columns in report order: classical models as listed, with
    /// `qsvm` expanded into one column per feature map.
    pub fn variants(&self) -> Vec<ModelVariant> {
        let mut out = Vec::new();
        for m in &self.models {
            match m {
                ModelKind::Svm => out.push(ModelVariant::Svm),
                ModelKind::Rf => out.push(ModelVariant::Rf),
                ModelKind::Qsvm => out.extend(self.maps.iter().map(|&f| ModelVariant::Qsvm(f))),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelVariant {
    Svm,
    Rf,
    Qsvm(FeatureMapFamily),
}

impl ModelVariant {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelVariant::Svm => ModelKind::Svm,
            ModelVariant::Rf => ModelKind::Rf,
            ModelVariant::Qsvm(_) => ModelKind::Qsvm,
        }
    }

    pub fn feature_map(&self) -> Option<FeatureMapFamily> {
        match self {
            ModelVariant::Qsvm(f) => Some(*f),
            _ => None,
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelVariant::Qsvm(m) => write!(f, "qsvm-{m}"),
            v => f.write_str(v.kind().as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub pca_components: usize,
    pub model: ModelKind,
    pub feature_map: Option<FeatureMapFamily>,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Per fold: the single class predicted for every test row, if so.
    pub constant_prediction: Vec<Option<Label>>,
    /// Reserved; not computed.
    pub precision: Option<f64>,
    /// Reserved; not computed.
    pub recall: Option<f64>,
}

impl CellResult {
    pub fn variant(&self) -> ModelVariant {
        match (self.model, self.feature_map) {
            (ModelKind::Qsvm, Some(f)) => ModelVariant::Qsvm(f),
            (ModelKind::Rf, _) => ModelVariant::Rf,
            _ => ModelVariant::Svm,
        }
    }

    /// True when every fold predicted a single class throughout.
    pub fn collapsed(&self) -> bool {
        self.constant_prediction.iter().all(Option::is_some)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub train_size: usize,
    pub test_size: usize,
    /// `[healthy, nonhealthy]` among the test rows.
    pub test_class_counts: [usize; 2],
    pub majority_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub n_samples: usize,
    pub n_features: usize,
    pub folds: Vec<FoldSummary>,
    pub cells: Vec<CellResult>,
}

impl ExperimentReport {
    pub fn cell(&self, pca_components: usize, variant: ModelVariant) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.pca_components == pca_components && c.variant() == variant)
    }
}

/// PCA projection followed by MinMax scaling, fit on one training split.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessor {
    pub pca: PcaModel,
    pub scaler: MinMaxScaler,
}

impl Preprocessor {
    pub fn fit(train: &Matrix, k: usize) -> Result<Self> {
        Self::from_pca(pca_fit(train, k)?, train)
    }

    /// Fits the scaler on `train` projected through an existing PCA model.
    pub fn from_pca(pca: PcaModel, train: &Matrix) -> Result<Self> {
        let scaler = minmax_fit(&pca.transform(train)?)?;
        Ok(Self { pca, scaler })
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        self.scaler.transform(&self.pca.transform(x)?)
    }
}

/// Train/test indices for one fold, ordered by sample id so results do not
/// depend on storage order.
pub fn fold_indices(dataset: &Dataset, split: &FoldSplit, fold: usize) -> (Vec<usize>, Vec<usize>) {
    let by_id = |v: &mut Vec<usize>| v.sort_by(|&a, &b| dataset.ids[a].cmp(&dataset.ids[b]).then(a.cmp(&b)));
    let mut train = split.train_indices(fold);
    let mut test = split.test_indices(fold).to_vec();
    by_id(&mut train);
    by_id(&mut test);
    (train, test)
}

/// The preprocessing a fold's models see, fit on that fold's training rows.
pub fn fold_preprocessor(dataset: &Dataset, split: &FoldSplit, fold: usize, k: usize) -> Result<Preprocessor> {
    let (train, _) = fold_indices(dataset, split, fold);
    Preprocessor::fit(&dataset.features.select_rows(&train), k)
}

/// Kernel matrices built during a run, offered to an observer.
pub struct KernelEvent<'a> {
    pub fold: usize,
    pub pca_components: usize,
    pub variant: ModelVariant,
    pub train: &'a KernelMatrix,
    pub test: &'a KernelMatrix,
}

pub fn run_experiment(dataset: &Dataset, config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(dataset, config, &mut |_| {})
}

pub fn run_experiment_with(
    dataset: &Dataset,
    config: &ExperimentConfig,
    observer: &mut dyn FnMut(KernelEvent<'_>),
) -> Result<ExperimentReport> {
    config.validate()?;
    dataset.validate()?;
    let split = stratified_kfold(&dataset.labels, config.k_folds, derive_seed(config.seed, STREAM_FOLDS, 0))?;
    run_experiment_with_split(dataset, config, &split, observer)
}

/// Runs the grid over a caller-supplied split.
pub fn run_experiment_with_split(
    dataset: &Dataset,
    config: &ExperimentConfig,
    split: &FoldSplit,
    observer: &mut dyn FnMut(KernelEvent<'_>),
) -> Result<ExperimentReport> {
    config.validate()?;
    dataset.validate()?;
    if split.n_samples != dataset.len() {
        return Err(Error::DimensionMismatch { expected: dataset.len(), actual: split.n_samples });
    }
    let variants = config.variants();
    let max_k = *config.pca_components.iter().max().expect("validated non-empty");
    let mut cells: Vec<CellResult> = Vec::new();
    for &k in &config.pca_components {
        for v in &variants {
            cells.push(CellResult {
                pca_components: k,
                model: v.kind(),
                feature_map: v.feature_map(),
                fold_accuracies: Vec::with_capacity(split.k()),
                mean_accuracy: 0.0,
                constant_prediction: Vec::with_capacity(split.k()),
                precision: None,
                recall: None,
            });
        }
    }

    let mut folds = Vec::with_capacity(split.k());
    for fold in 0..split.k() {
        let (train_idx, test_idx) = fold_indices(dataset, split, fold);
        debug_assert!(train_idx.iter().all(|i| !test_idx.contains(i)));
        let train_raw = dataset.features.select_rows(&train_idx);
        let test_raw = dataset.features.select_rows(&test_idx);
        let y_train: Vec<Label> = train_idx.iter().map(|&i| dataset.labels[i]).collect();
        let y_test: Vec<Label> = test_idx.iter().map(|&i| dataset.labels[i]).collect();
        let signs: Vec<f64> = y_train.iter().map(|l| l.sign()).collect();

        let mut counts = [0usize; 2];
        y_test.iter().for_each(|l| counts[l.index()] += 1);
        folds.push(FoldSummary {
            train_size: train_idx.len(),
            test_size: test_idx.len(),
            test_class_counts: counts,
            majority_fraction: counts[0].max(counts[1]) as f64 / test_idx.len() as f64,
        });
        log::info!("fold {}/{}: {} train, {} test", fold + 1, split.k(), train_idx.len(), test_idx.len());

        // Leading components of a larger fit equal a smaller fit, so one SVD per fold.
        let full_pca = pca_fit(&train_raw, max_k)?;
        for &k in &config.pca_components {
            let prep = Preprocessor::from_pca(full_pca.truncated(k)?, &train_raw)?;
            let train = prep.transform(&train_raw)?;
            let test = prep.transform(&test_raw)?;
            let train_rows: Vec<&[f64]> = train.iter_rows().collect();
            let test_rows: Vec<&[f64]> = test.iter_rows().collect();
            let smo = SmoConfig { c: config.c, ..SmoConfig::default() };

            for v in &variants {
                let predicted: Vec<Label> = match v {
                    ModelVariant::Rf => {
                        let fc = ForestConfig {
                            n_trees: config.n_trees,
                            seed: derive_seed(config.seed, STREAM_FOREST, (fold * 64 + k) as u64),
                            ..ForestConfig::default()
                        };
                        forest_predict(&forest_train(&train, &y_train, &fc)?, &test)?
                    }
                    ModelVariant::Svm | ModelVariant::Qsvm(_) => {
                        let (k_train, k_test) = match v {
                            ModelVariant::Qsvm(fam) => {
                                let spec = FeatureMapSpec::new(*fam, k, config.reps)?;
                                (
                                    gram_matrix(&spec, &train_rows, None)?,
                                    gram_matrix(&spec, &train_rows, Some(&test_rows))?,
                                )
                            }
                            _ => {
                                let gamma = match config.gamma {
                                    GammaRule::Scale => scale_gamma(&train_rows),
                                    GammaRule::Fixed(g) => g,
                                };
                                (
                                    rbf_kernel(&train_rows, None, gamma)?,
                                    rbf_kernel(&train_rows, Some(&test_rows), gamma)?,
                                )
                            }
                        };
                        observer(KernelEvent { fold, pca_components: k, variant: *v, train: &k_train, test: &k_test });
                        let model = svm_train(&k_train, &signs, &smo)?;
                        svm_predict(&model, &k_test)?.into_iter().map(Label::from_sign).collect()
                    }
                };
                let acc = accuracy(&predicted, &y_test)?;
                let constant = predicted.iter().all(|p| *p == predicted[0]).then_some(predicted[0]);
                let cell = cells
                    .iter_mut()
                    .find(|c| c.pca_components == k && c.variant() == *v)
                    .expect("cell allocated for every grid point");
                cell.fold_accuracies.push(acc);
                cell.constant_prediction.push(constant);
            }
        }
    }
    for c in &mut cells {
        c.mean_accuracy = c.fold_accuracies.iter().sum::<f64>() / c.fold_accuracies.len() as f64;
    }
    Ok(ExperimentReport {
        config: config.clone(),
        n_samples: dataset.len(),
        n_features: dataset.n_features(),
        folds,
        cells,
    })
}
