//! Scenario runner for the multikink laboratory: JSON scenario files,
//! perturbations, acceptance checks and reports.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod perturbation;
pub mod report;
pub mod scenarios;

pub use error::{exit, CliError};
