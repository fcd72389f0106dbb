//! Paragraph vectors, distributed-memory variant (PV-DM), trained with
//! negative sampling.
//!
//! Each position of a document predicts its center word from the mean of the
//! document vector and the surrounding context word vectors. Training is
//! single-threaded and driven by one seeded ChaCha stream, so a fixed seed,
//! corpus and config always produce the same model bit for bit.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sparse::DenseVector;
use crate::corpus::TokenSequence;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PvConfig {
    pub dim: usize,
    pub epochs: usize,
    pub window: usize,
    pub negative: usize,
    pub initial_rate: f64,
    pub final_rate: f64,
    pub seed: u64,
}

impl Default for PvConfig {
    fn default() -> Self {
        PvConfig {
            dim: 832,
            epochs: 40,
            window: 5,
            negative: 5,
            initial_rate: 0.025,
            final_rate: 0.0001,
            seed: 0,
        }
    }
}

impl PvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::config("dim", "must be at least 1"));
        }
        if self.epochs < 1 {
            return Err(Error::config("epochs", "must be at least 1"));
        }
        if self.window < 1 {
            return Err(Error::config("window", "must be at least 1"));
        }
        if self.negative < 1 {
            return Err(Error::config("negative", "must be at least 1"));
        }
        if self.final_rate.is_nan() || self.final_rate <= 0.0 {
            return Err(Error::config("final_rate", "must be positive"));
        }
        if !(self.initial_rate.is_finite() && self.initial_rate > self.final_rate) {
            return Err(Error::config("initial_rate", "must exceed final_rate"));
        }
        Ok(())
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn is_consistent(&self) -> bool {
        self.data.len() == self.rows * self.cols
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PvRepr", into = "PvRepr")]
pub struct ParagraphVectorModel {
    pub config: PvConfig,
    words: Vec<String>,
    counts: Vec<u64>,
    input_words: Matrix,
    output_words: Matrix,
    docs: Matrix,
    /// Cumulative unigram^0.75 weights used to draw negative samples.
    noise_cdf: Vec<f64>,
    /// Mean negative-sampling loss per training epoch.
    epoch_loss: Vec<f64>,
    index: HashMap<String, usize>,
}

impl PartialEq for ParagraphVectorModel {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.words == other.words
            && self.counts == other.counts
            && self.input_words == other.input_words
            && self.output_words == other.output_words
            && self.docs == other.docs
            && self.noise_cdf == other.noise_cdf
            && self.epoch_loss == other.epoch_loss
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PvRepr {
    config: PvConfig,
    words: Vec<String>,
    counts: Vec<u64>,
    input_words: Matrix,
    output_words: Matrix,
    docs: Matrix,
    noise_cdf: Vec<f64>,
    epoch_loss: Vec<f64>,
}

impl TryFrom<PvRepr> for ParagraphVectorModel {
    type Error = Error;

    fn try_from(r: PvRepr) -> Result<Self> {
        let v = r.words.len();
        let dim = r.config.dim;
        let shapes_ok = r.counts.len() == v
            && r.noise_cdf.len() == v
            && r.input_words.rows == v
            && r.output_words.rows == v
            && r.input_words.cols == dim
            && r.output_words.cols == dim
            && r.docs.cols == dim
            && r.input_words.is_consistent()
            && r.output_words.is_consistent()
            && r.docs.is_consistent();
        if !shapes_ok {
            return Err(Error::Format(
                "paragraph-vector matrix shapes are inconsistent".into(),
            ));
        }
        let index = index_words(&r.words);
        if index.len() != v {
            return Err(Error::Format(
                "duplicate word in paragraph-vector vocabulary".into(),
            ));
        }
        Ok(ParagraphVectorModel {
            config: r.config,
            words: r.words,
            counts: r.counts,
            input_words: r.input_words,
            output_words: r.output_words,
            docs: r.docs,
            noise_cdf: r.noise_cdf,
            epoch_loss: r.epoch_loss,
            index,
        })
    }
}

impl From<ParagraphVectorModel> for PvRepr {
    fn from(m: ParagraphVectorModel) -> Self {
        PvRepr {
            config: m.config,
            words: m.words,
            counts: m.counts,
            input_words: m.input_words,
            output_words: m.output_words,
            docs: m.docs,
            noise_cdf: m.noise_cdf,
            epoch_loss: m.epoch_loss,
        }
    }
}

fn index_words(words: &[String]) -> HashMap<String, usize> {
    words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect()
}

/// Result of [`infer_pv`].
#[derive(Debug, Clone, PartialEq)]
pub struct InferredVector {
    pub vector: DenseVector,
    /// Set when no token of the document is in the vocabulary; `vector` is
    /// then the untouched seeded initialization.
    pub out_of_vocabulary: bool,
}

impl ParagraphVectorModel {
    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn vocab_len(&self) -> usize {
        self.words.len()
    }

    pub fn num_docs(&self) -> usize {
        self.docs.rows
    }

    /// Trained vector of the `i`-th training document.
    pub fn doc_vector(&self, i: usize) -> &[f64] {
        self.docs.row(i)
    }

    pub fn doc_matrix(&self) -> &Matrix {
        &self.docs
    }

    pub fn epoch_loss(&self) -> &[f64] {
        &self.epoch_loss
    }

    pub fn word_index(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn is_finite(&self) -> bool {
        [&self.input_words, &self.output_words, &self.docs]
            .iter()
            .all(|m| m.data.iter().all(|x| x.is_finite()))
    }

    fn word_ids(&self, doc: &TokenSequence) -> Vec<usize> {
        doc.iter().filter_map(|w| self.word_index(w)).collect()
    }
}

fn random_row(rng: &mut ChaCha8Rng, row: &mut [f64]) {
    let scale = 1.0 / row.len() as f64;
    for x in row {
        *x = (rng.random::<f64>() - 0.5) * scale;
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

// -ln σ(x), stable for large |x|.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

enum Output<'a> {
    Frozen(&'a Matrix),
    Train(&'a mut Matrix),
}

impl Output<'_> {
    fn row(&self, r: usize) -> &[f64] {
        match self {
            Output::Frozen(m) => m.row(r),
            Output::Train(m) => m.row(r),
        }
    }
}

struct NoiseSampler<'a> {
    cdf: &'a [f64],
    negative: usize,
}

impl NoiseSampler<'_> {
    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cdf.last().expect("vocabulary is non-empty");
        let u = rng.random::<f64>() * total;
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1)
    }
}

/// One positive plus `negative` noise updates; accumulates the input error
/// into `grad` and returns the loss at the pre-update parameters.
fn negative_sampling_step(
    mut output: Output<'_>,
    noise: &NoiseSampler<'_>,
    rng: &mut ChaCha8Rng,
    lr: f64,
    target: usize,
    hidden: &[f64],
    grad: &mut [f64],
) -> f64 {
    let mut loss = 0.0;
    for k in 0..=noise.negative {
        let (word, label) = if k == 0 {
            (target, 1.0)
        } else {
            let w = noise.draw(rng);
            if w == target {
                continue;
            }
            (w, 0.0)
        };
        let score = dot(hidden, output.row(word));
        loss += if label == 1.0 {
            neg_log_sigmoid(score)
        } else {
            neg_log_sigmoid(-score)
        };
        let g = (label - sigmoid(score)) * lr;
        axpy(g, output.row(word), grad);
        if let Output::Train(m) = &mut output {
            axpy(g, hidden, m.row_mut(word));
        }
    }
    loss
}

/// Mean of the document vector and the context words around `pos`. Returns
/// the context range.
fn context_mean(
    input_words: &Matrix,
    window: usize,
    doc_vec: &[f64],
    ids: &[usize],
    pos: usize,
    hidden: &mut [f64],
) -> (usize, usize) {
    let lo = pos.saturating_sub(window);
    let hi = (pos + window + 1).min(ids.len());
    hidden.copy_from_slice(doc_vec);
    for (j, &w) in ids.iter().enumerate().take(hi).skip(lo) {
        if j != pos {
            axpy(1.0, input_words.row(w), hidden);
        }
    }
    let inv = 1.0 / (hi - lo) as f64;
    hidden.iter_mut().for_each(|x| *x *= inv);
    (lo, hi)
}

pub fn fit_pv(corpus: &[TokenSequence], config: &PvConfig) -> Result<ParagraphVectorModel> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    // Frequency-descending word order, ties by term.
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for doc in corpus {
        for w in doc.iter() {
            *freq.entry(w).or_default() += 1;
        }
    }
    if freq.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let mut vocab: Vec<(&str, u64)> = freq.into_iter().collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let words: Vec<String> = vocab.iter().map(|(w, _)| (*w).to_owned()).collect();
    let counts: Vec<u64> = vocab.iter().map(|&(_, c)| c).collect();
    let mut noise_cdf = Vec::with_capacity(counts.len());
    let mut acc = 0.0;
    for &c in &counts {
        acc += (c as f64).powf(0.75);
        noise_cdf.push(acc);
    }

    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut input_words = Matrix::zeros(words.len(), dim);
    for r in 0..words.len() {
        random_row(&mut rng, input_words.row_mut(r));
    }
    let mut docs = Matrix::zeros(corpus.len(), dim);
    for r in 0..corpus.len() {
        random_row(&mut rng, docs.row_mut(r));
    }

    let mut model = ParagraphVectorModel {
        config: config.clone(),
        index: index_words(&words),
        words,
        counts,
        input_words,
        output_words: Matrix::zeros(vocab.len(), dim),
        docs,
        noise_cdf,
        epoch_loss: Vec::with_capacity(config.epochs),
    };

    let id_docs: Vec<Vec<usize>> = corpus.iter().map(|d| model.word_ids(d)).collect();
    let tokens_per_epoch: usize = id_docs.iter().map(Vec::len).sum();
    let total_updates = (tokens_per_epoch * config.epochs) as f64;
    let rate_span = config.initial_rate - config.final_rate;

    let mut hidden = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let mut doc_vec = vec![0.0; dim];
    let mut processed = 0usize;
    for _ in 0..config.epochs {
        let mut loss_sum = 0.0;
        for (d, ids) in id_docs.iter().enumerate() {
            for pos in 0..ids.len() {
                let lr = config.initial_rate - rate_span * processed as f64 / total_updates;
                doc_vec.copy_from_slice(model.docs.row(d));
                let (lo, hi) = context_mean(
                    &model.input_words,
                    config.window,
                    &doc_vec,
                    ids,
                    pos,
                    &mut hidden,
                );
                grad.iter_mut().for_each(|g| *g = 0.0);
                let noise = NoiseSampler {
                    cdf: &model.noise_cdf,
                    negative: config.negative,
                };
                loss_sum += negative_sampling_step(
                    Output::Train(&mut model.output_words),
                    &noise,
                    &mut rng,
                    lr,
                    ids[pos],
                    &hidden,
                    &mut grad,
                );
                // word2vec convention: every input receives the full error.
                axpy(1.0, &grad, model.docs.row_mut(d));
                for (j, &w) in ids.iter().enumerate().take(hi).skip(lo) {
                    if j != pos {
                        axpy(1.0, &grad, model.input_words.row_mut(w));
                    }
                }
                processed += 1;
            }
        }
        model
            .epoch_loss
            .push(loss_sum / tokens_per_epoch.max(1) as f64);
    }
    Ok(model)
}

/// Learns a vector for an unseen document with all word vectors frozen.
/// `steps` passes over the document, learning rate decaying linearly from
/// the model's initial to final rate.
pub fn infer_pv(
    model: &ParagraphVectorModel,
    doc: &TokenSequence,
    steps: usize,
    seed: u64,
) -> Result<InferredVector> {
    if steps < 1 {
        return Err(Error::config("steps", "must be at least 1"));
    }
    let dim = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vector = vec![0.0; dim];
    random_row(&mut rng, &mut vector);

    let ids = model.word_ids(doc);
    if ids.is_empty() {
        return Ok(InferredVector {
            vector,
            out_of_vocabulary: true,
        });
    }

    let cfg = &model.config;
    let noise = NoiseSampler {
        cdf: &model.noise_cdf,
        negative: cfg.negative,
    };
    let total = (steps * ids.len()) as f64;
    let mut hidden = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    let mut processed = 0usize;
    for _ in 0..steps {
        for pos in 0..ids.len() {
            let lr =
                cfg.initial_rate - (cfg.initial_rate - cfg.final_rate) * processed as f64 / total;
            context_mean(
                &model.input_words,
                cfg.window,
                &vector,
                &ids,
                pos,
                &mut hidden,
            );
            grad.iter_mut().for_each(|g| *g = 0.0);
            negative_sampling_step(
                Output::Frozen(&model.output_words),
                &noise,
                &mut rng,
                lr,
                ids[pos],
                &hidden,
                &mut grad,
            );
            axpy(1.0, &grad, &mut vector);
            processed += 1;
        }
    }
    Ok(InferredVector {
        vector,
        out_of_vocabulary: false,
    })
}
