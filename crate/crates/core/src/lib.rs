//! Fine-grained sentiment regression for financial news headlines.
//!
//! The crate is organized as a pipeline:
//!
//! - [`corpus`]: headline records, loaders, company masking, tokenization and
//!   augmentation mappers.
//! - [`vectorize`]: bag of n-grams, TF-IDF and paragraph vectors.
//! - [`regress`]: least squares, linear ε-SVR and gradient-boosted trees.
//! - [`eval`]: R², cosine and the coverage-weighted cosine score, k-fold
//!   cross-validation and hyperparameter sweeps.
//! - [`pipeline`]: configs, fitted pipelines and the single-file model bundle.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod persist;
pub mod pipeline;
pub mod regress;
pub mod synth;
pub mod vectorize;

pub use error::{Error, Result};
