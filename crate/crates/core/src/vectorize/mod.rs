//! Document vectorizers: raw n-gram counts, smoothed TF-IDF, and PV-DM
//! paragraph vectors.

mod ngram;
mod paragraph;
mod sparse;
mod tfidf;

pub use ngram::{fit_ngram, ngrams, transform_ngram, NgramConfig, Vocabulary};
pub use paragraph::{fit_pv, infer_pv, InferredVector, Matrix, ParagraphVectorModel, PvConfig};
pub use sparse::{DenseVector, SparseVector};
pub use tfidf::{fit_tfidf, smoothed_idf, transform_tfidf, TfidfModel};
