//! Quantum-kernel SVM pipeline core.
//!
//! Exact statevector simulation of the Z, ZZ and Pauli-X feature maps, the
//! fidelity kernel built on top of it, an SMO solver for precomputed-kernel
//! SVMs, PCA and MinMax preprocessing, a random-forest baseline, and the
//! stratified cross-validation driver tying them together.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cv;
pub mod dataset;
pub mod error;
pub mod feature_map;
pub mod forest;
pub mod kernel;
pub mod linalg;
pub mod pipeline;
pub mod preprocess;
pub mod statevector;
pub mod svm;

pub use cv::{accuracy, stratified_kfold, FoldSplit};
pub use dataset::{Dataset, Label};
pub use error::{Error, Result};
pub use feature_map::{build_feature_map, encode, CircuitDescription, FeatureMapFamily, FeatureMapSpec};
pub use forest::{forest_predict, forest_train, ForestConfig, ForestModel};
pub use kernel::{fidelity, gram_matrix, rbf_kernel, KernelMatrix, KernelRole};
pub use linalg::Matrix;
pub use pipeline::{run_experiment, ExperimentConfig, ExperimentReport, ModelKind, ModelVariant};
pub use preprocess::{minmax_fit, pca_fit, MinMaxScaler, PcaModel};
pub use statevector::{Gate, Statevector};
pub use svm::{svm_decision, svm_predict, svm_train, SmoConfig, SvmModel};
