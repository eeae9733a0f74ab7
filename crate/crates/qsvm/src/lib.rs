//! Std companion to `qsvm-core`: feature CSV ingestion, report writers and
//! the `qsvm` command line.

pub mod cli;
pub mod features;
pub mod report;
