//! Report emission: a human-readable table file plus JSON records.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use qsvm_core::pipeline::{CellResult, ModelVariant};
use qsvm_core::{ExperimentConfig, ExperimentReport, FeatureMapFamily};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Everything needed to rerun an experiment from its report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub input: PathBuf,
    pub output_dir: PathBuf,
    pub dump_kernels: bool,
    pub experiment: ExperimentConfig,
}

impl ResolvedConfig {
    /// SHA-256 over the canonical JSON of the experiment settings.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(&self.experiment).expect("config serialises");
        hex::encode(Sha256::digest(&json))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub config_hash: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub metadata: RunMetadata,
    pub config: ResolvedConfig,
    pub report: ExperimentReport,
}

/// One machine-readable record per grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub pca_components: usize,
    pub model: String,
    pub feature_map: Option<String>,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub collapsed: bool,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

impl From<&CellResult> for CellRecord {
    fn from(c: &CellResult) -> Self {
        Self {
            pca_components: c.pca_components,
            model: c.model.to_string(),
            feature_map: c.feature_map.map(|f| f.to_string()),
            fold_accuracies: c.fold_accuracies.clone(),
            mean_accuracy: c.mean_accuracy,
            collapsed: c.collapsed(),
            precision: c.precision,
            recall: c.recall,
        }
    }
}

fn map_title(f: FeatureMapFamily) -> &'static str {
    match f {
        FeatureMapFamily::Zz => "ZZ Feature Map",
        FeatureMapFamily::Z => "Z Feature Map",
        FeatureMapFamily::PauliX => "PauliX Feature Map",
    }
}

fn table(out: &mut String, title: &str, columns: &[(String, ModelVariant)], report: &ExperimentReport) {
    let _ = writeln!(out, "{title}");
    let mut header = format!("{:<16}", "PCA Components");
    for (name, _) in columns {
        let _ = write!(header, "  {name:>20}");
    }
    let _ = writeln!(out, "{header}");
    let _ = writeln!(out, "{}", "-".repeat(header.len()));
    for &k in &report.config.pca_components {
        let mut line = format!("{k:<16}");
        for (_, v) in columns {
            let cell = report.cell(k, *v).map_or_else(|| "-".to_string(), |c| format!("{:.4}", c.mean_accuracy));
            let _ = write!(line, "  {cell:>20}");
        }
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(out);
}

/// Text rendering: the QSVM-per-feature-map table, the classical comparison
/// table, per-fold detail and collapse diagnostics.
pub fn render_text(run: &RunReport) -> String {
    let report = &run.report;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "qsvm experiment: {} samples x {} features, {}-fold stratified CV, seed {}",
        report.n_samples, report.n_features, report.config.k_folds, run.metadata.seed
    );
    let _ = writeln!(out, "config hash {}\n", run.metadata.config_hash);

    let variants = report.config.variants();
    let quantum: Vec<(String, ModelVariant)> =
        variants.iter().filter_map(|v| v.feature_map().map(|f| (map_title(f).to_string(), *v))).collect();
    if !quantum.is_empty() {
        table(&mut out, "Mean accuracy of QSVM by feature map", &quantum, report);
    }
    let mut compare: Vec<(String, ModelVariant)> = Vec::new();
    for v in &variants {
        match v {
            ModelVariant::Svm => compare.push(("SVM".into(), *v)),
            ModelVariant::Rf => compare.push(("Random Forest".into(), *v)),
            ModelVariant::Qsvm(FeatureMapFamily::Z) => compare.push(("QSVM (Z Feature Map)".into(), *v)),
            _ => {}
        }
    }
    if !compare.is_empty() {
        table(&mut out, "Classical models against QSVM (Z feature map)", &compare, report);
    }

    let _ = writeln!(out, "Per-fold accuracy");
    for c in &report.cells {
        let folds: Vec<String> = c.fold_accuracies.iter().map(|a| format!("{a:.4}")).collect();
        let _ = writeln!(
            out,
            "  pca={:<2} {:<12} mean {:.4}  folds [{}]",
            c.pca_components,
            c.variant().to_string(),
            c.mean_accuracy,
            folds.join(", ")
        );
    }
    let majority: f64 = report.folds.iter().map(|f| f.majority_fraction).sum::<f64>() / report.folds.len() as f64;
    let collapsed: Vec<&CellResult> = report.cells.iter().filter(|c| c.collapsed()).collect();
    let _ = writeln!(out, "\nMean majority-class fraction of test folds: {majority:.4}");
    for c in collapsed {
        let _ = writeln!(
            out,
            "  collapsed: pca={} {} predicts one class in every fold (mean accuracy {:.4})",
            c.pca_components,
            c.variant(),
            c.mean_accuracy
        );
    }
    out
}

/// Writes `report.txt`, `report.json` and `cells.jsonl` into `dir`.
pub fn write_report(dir: &Path, run: &RunReport) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let txt = dir.join("report.txt");
    let json = dir.join("report.json");
    let cells = dir.join("cells.jsonl");
    fs::write(&txt, render_text(run))?;
    fs::write(&json, serde_json::to_string_pretty(run).map_err(std::io::Error::other)?)?;
    let mut lines = String::new();
    for c in &run.report.cells {
        lines.push_str(&serde_json::to_string(&CellRecord::from(c)).map_err(std::io::Error::other)?);
        lines.push('\n');
    }
    fs::write(&cells, lines)?;
    Ok(vec![txt, json, cells])
}
