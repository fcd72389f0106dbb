//! Bag of word n-grams with raw counts.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::sparse::SparseVector;
use crate::corpus::TokenSequence;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NgramConfig {
    pub n_min: usize,
    pub n_max: usize,
    /// Minimum number of documents a term must occur in.
    pub min_df: usize,
    /// Keep only the most document-frequent terms.
    pub max_features: Option<usize>,
}

impl Default for NgramConfig {
    /// Unigrams and bigrams.
    fn default() -> Self {
        NgramConfig {
            n_min: 1,
            n_max: 2,
            min_df: 1,
            max_features: None,
        }
    }
}

impl NgramConfig {
    pub fn unigrams() -> Self {
        NgramConfig {
            n_max: 1,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min < 1 {
            return Err(Error::config("n_min", "must be at least 1"));
        }
        if self.n_max < self.n_min {
            return Err(Error::config(
                "n_max",
                format!("must be >= n_min ({} < {})", self.n_max, self.n_min),
            ));
        }
        if self.min_df < 1 {
            return Err(Error::config("min_df", "must be at least 1"));
        }
        if self.max_features == Some(0) {
            return Err(Error::config("max_features", "must be at least 1 when set"));
        }
        Ok(())
    }
}

/// Fitted n-gram vocabulary. Term indices follow lexicographic term order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    n_min: usize,
    n_max: usize,
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    num_docs: usize,
    index: HashMap<String, usize>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.n_min == other.n_min
            && self.n_max == other.n_max
            && self.terms == other.terms
            && self.doc_freq == other.doc_freq
            && self.num_docs == other.num_docs
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VocabularyRepr {
    n_min: usize,
    n_max: usize,
    num_docs: usize,
    terms: Vec<String>,
    doc_freq: Vec<usize>,
}

impl TryFrom<VocabularyRepr> for Vocabulary {
    type Error = Error;

    fn try_from(r: VocabularyRepr) -> Result<Self> {
        if r.terms.len() != r.doc_freq.len() {
            return Err(Error::Format("terms and doc_freq lengths differ".into()));
        }
        if r.terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format(
                "vocabulary terms must be sorted and unique".into(),
            ));
        }
        Ok(Vocabulary::from_parts(
            r.n_min, r.n_max, r.num_docs, r.terms, r.doc_freq,
        ))
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            n_min: v.n_min,
            n_max: v.n_max,
            num_docs: v.num_docs,
            terms: v.terms,
            doc_freq: v.doc_freq,
        }
    }
}

impl Vocabulary {
    fn from_parts(
        n_min: usize,
        n_max: usize,
        num_docs: usize,
        terms: Vec<String>,
        doc_freq: Vec<usize>,
    ) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            n_min,
            n_max,
            terms,
            doc_freq,
            num_docs,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_docs(&self) -> usize {
        self.num_docs
    }

    pub fn ngram_range(&self) -> (usize, usize) {
        (self.n_min, self.n_max)
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    pub fn contains(&self, term: &str) -> bool {
        self.index.contains_key(term)
    }
}

/// All word n-grams of `doc` with `n_min <= n <= n_max`, space-joined.
pub fn ngrams(
    doc: &TokenSequence,
    n_min: usize,
    n_max: usize,
) -> impl Iterator<Item = String> + '_ {
    let tokens = doc.tokens();
    (n_min..=n_max).flat_map(move |n| tokens.windows(n).map(|w| w.join(" ")))
}

pub fn fit_ngram(corpus: &[TokenSequence], config: &NgramConfig) -> Result<Vocabulary> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in corpus {
        let mut seen: Vec<String> = ngrams(doc, config.n_min, config.n_max).collect();
        seen.sort_unstable();
        seen.dedup();
        for term in seen {
            *df.entry(term).or_default() += 1;
        }
    }
    let mut kept: Vec<(String, usize)> = df
        .into_iter()
        .filter(|&(_, count)| count >= config.min_df)
        .collect();
    if let Some(max) = config.max_features {
        if kept.len() > max {
            // Most frequent first; the BTreeMap already put ties in term order.
            kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            kept.truncate(max);
            kept.sort_by(|a, b| a.0.cmp(&b.0));
        }
    }
    let (terms, doc_freq) = kept.into_iter().unzip();
    Ok(Vocabulary::from_parts(
        config.n_min,
        config.n_max,
        corpus.len(),
        terms,
        doc_freq,
    ))
}

/// Raw n-gram counts; out-of-vocabulary n-grams are ignored.
pub fn transform_ngram(vocab: &Vocabulary, doc: &TokenSequence) -> SparseVector {
    let entries = ngrams(doc, vocab.n_min, vocab.n_max)
        .filter_map(|g| vocab.index_of(&g).map(|i| (i, 1.0)))
        .collect();
    SparseVector::from_unsorted(vocab.len(), entries)
}
