//! Copula-driven Bernoulli amputation.
//!
//! A complete dataset `Y` is amputed by drawing a missingness indicator
//! matrix `M` whose entries are Bernoulli with marginal probabilities `P` and
//! whose dependence is carried by a copula. The crate provides the copula
//! engine, logistic missingness models, the amputation modes (row-wise,
//! grouped cell sets, monotone mixtures, scenario-based), closed-form
//! joint-missingness analytics, a small FCS/PMM imputer with a bias-study
//! harness, and the I/O used by the `bamp` command-line tool.

pub mod analytics;
pub mod cli;
pub mod copula;
pub mod dataset;
pub mod engine;
mod error;
pub mod imputation;
pub mod io;
pub mod model;
pub mod mtcars;
pub mod rng;
pub mod scenario;

pub use copula::{Copula, CopulaSpec, UniformSample};
pub use dataset::{AmputedDataset, CompleteDataset, MissProbMatrix, MissingnessMask};
pub use error::{Error, Result};
