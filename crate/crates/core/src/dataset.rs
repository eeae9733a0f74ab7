use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Binary class label. `Nonhealthy` is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Healthy,
    Nonhealthy,
}

impl Label {
    /// `Healthy → −1`, `Nonhealthy → +1`
    pub fn sign(self) -> f64 {
        match self {
            Label::Healthy => -1.0,
            Label::Nonhealthy => 1.0,
        }
    }

    pub fn from_sign(v: f64) -> Label {
        if v >= 0.0 {
            Label::Nonhealthy
        } else {
            Label::Healthy
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Case-insensitive decode of `healthy`, `nonhealthy` and `soft_rot`.
    pub fn parse_token(token: &str) -> Option<Label> {
        let t = token.trim().to_ascii_lowercase();
        match t.as_str() {
            "healthy" => Some(Label::Healthy),
            "nonhealthy" | "soft_rot" => Some(Label::Nonhealthy),
            _ => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Label::Healthy => "healthy",
            Label::Nonhealthy => "nonhealthy",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Labelled feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub ids: Vec<String>,
    pub features: Matrix,
    pub labels: Vec<Label>,
}

impl Dataset {
    /// Checks shape and finiteness only; see [`Dataset::validate`] for the
    /// class-count requirement of cross-validation.
    pub fn new(ids: Vec<String>, features: Matrix, labels: Vec<Label>) -> Result<Self> {
        let ds = Self { ids, features, labels };
        ds.check_shape()?;
        Ok(ds)
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.features.rows();
        if self.labels.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: self.labels.len() });
        }
        if self.ids.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: self.ids.len() });
        }
        if n == 0 {
            return Err(Error::Empty);
        }
        if self.features.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature value"));
        }
        Ok(())
    }

    /// Shape checks plus at least two samples of each class.
    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        let counts = self.class_counts();
        if counts.iter().any(|&c| c < 2) {
            return Err(Error::InvalidParameter(alloc::format!(
                "each class needs at least 2 samples, counts are {counts:?}"
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    /// `[healthy, nonhealthy]`
    pub fn class_counts(&self) -> [usize; 2] {
        let mut c = [0; 2];
        for l in &self.labels {
            c[l.index()] += 1;
        }
        c
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// splitmix64 finaliser over `(master, stream, index)`; gives each random
/// consumer its own reproducible seed.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub const STREAM_FOLDS: u64 = 1;
pub const STREAM_FOREST: u64 = 2;
