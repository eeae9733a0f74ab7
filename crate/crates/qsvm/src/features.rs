//! Feature CSV format: header `id,label,f0,…,f{d-1}`, one sample per row.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qsvm_core::{Dataset, Label, Matrix};

pub const EXPECTED_WIDTH: usize = 2048;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {source}")]
    Csv { line: u64, source: csv::Error },
    #[error("line 1: header must start with `id,label` followed by feature columns")]
    Header,
    #[error("line {line}: row has {found} feature columns, expected {expected}")]
    Ragged { line: u64, found: usize, expected: usize },
    #[error("line {line}: unknown label `{token}` (expected healthy, nonhealthy or soft_rot)")]
    UnknownLabel { line: u64, token: String },
    #[error("line {line}, column {column}: `{value}` is not a finite number")]
    NonNumeric { line: u64, column: usize, value: String },
    #[error("file contains no samples")]
    Empty,
    #[error("invalid dataset: {0}")]
    Dataset(#[from] qsvm_core::Error),
}

pub fn load_feature_csv(path: &Path) -> Result<Dataset, LoadError> {
    let file = File::open(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).has_headers(true).from_reader(file);
    let header = reader.headers().map_err(|source| LoadError::Csv { line: 1, source })?.clone();
    if header.len() < 3
        || !header[0].trim().eq_ignore_ascii_case("id")
        || !header[1].trim().eq_ignore_ascii_case("label")
    {
        return Err(LoadError::Header);
    }
    let width = header.len() - 2;
    if width != EXPECTED_WIDTH {
        log::warn!("{}: {width} feature columns (expected {EXPECTED_WIDTH}); continuing", path.display());
    }

    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|source| {
            let line = source.position().map_or(0, |p| p.line());
            LoadError::Csv { line, source }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width + 2 {
            return Err(LoadError::Ragged { line, found: record.len().saturating_sub(2), expected: width });
        }
        ids.push(record[0].to_string());
        let token = &record[1];
        labels
            .push(Label::parse_token(token).ok_or_else(|| LoadError::UnknownLabel { line, token: token.to_string() })?);
        for (c, cell) in record.iter().enumerate().skip(2) {
            let v: f64 = cell
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| LoadError::NonNumeric { line, column: c + 1, value: cell.to_string() })?;
            values.push(v);
        }
    }
    if ids.is_empty() {
        return Err(LoadError::Empty);
    }
    let features = Matrix::from_vec(ids.len(), width, values)?;
    Ok(Dataset::new(ids, features, labels)?)
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_feature_csv(path: &Path, dataset: &Dataset) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "id,label")?;
    for j in 0..dataset.n_features() {
        write!(out, ",f{j}")?;
    }
    writeln!(out)?;
    for (i, row) in dataset.features.iter_rows().enumerate() {
        write!(out, "{},{}", dataset.ids[i], dataset.labels[i].token())?;
        for v in row {
            write!(out, ",{}", format_value(*v))?;
        }
        writeln!(out)?;
    }
    out.flush()
}

/// Full matrix, row-major, no header.
pub fn write_matrix_csv(path: &Path, m: &Matrix) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for row in m.iter_rows() {
        let line: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()
}
