use serde::{Deserialize, Serialize};

use super::ngram::{fit_ngram, transform_ngram, NgramConfig, Vocabulary};
use super::sparse::SparseVector;
use crate::corpus::TokenSequence;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfidfModel {
    pub vocabulary: Vocabulary,
    pub idf: Vec<f64>,
}

/// Smoothed inverse document frequency, `ln((1 + N) / (1 + df)) + 1`.
pub fn smoothed_idf(num_docs: usize, doc_freq: usize) -> f64 {
    ((1.0 + num_docs as f64) / (1.0 + doc_freq as f64)).ln() + 1.0
}

pub fn fit_tfidf(corpus: &[TokenSequence], config: &NgramConfig) -> Result<TfidfModel> {
    let vocabulary = fit_ngram(corpus, config)?;
    let idf = vocabulary
        .doc_freq()
        .iter()
        .map(|&df| smoothed_idf(vocabulary.num_docs(), df))
        .collect();
    Ok(TfidfModel { vocabulary, idf })
}

/// Count × idf, L2-normalized. All-zero vectors are returned unnormalized.
pub fn transform_tfidf(model: &TfidfModel, doc: &TokenSequence) -> SparseVector {
    let counts = transform_ngram(&model.vocabulary, doc);
    let weighted: Vec<(usize, f64)> = counts
        .entries()
        .iter()
        .map(|&(i, c)| (i, c * model.idf[i]))
        .collect();
    let norm = weighted.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt();
    let entries = if norm > 0.0 {
        weighted.into_iter().map(|(i, v)| (i, v / norm)).collect()
    } else {
        weighted
    };
    SparseVector::new(counts.dimension(), entries).expect("indices come from a sorted vector")
}

impl TfidfModel {
    pub(crate) fn check(&self) -> Result<()> {
        if self.idf.len() != self.vocabulary.len() {
            return Err(Error::Format(
                "idf length differs from vocabulary size".into(),
            ));
        }
        if self.idf.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(Error::Format(
                "idf weights must be finite and positive".into(),
            ));
        }
        Ok(())
    }
}
