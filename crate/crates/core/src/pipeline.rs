//! Pipeline configuration and fitted pipelines: preprocessing, one
//! vectorizer and one regressor, persisted together as a single bundle.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::{mask_company, tokenize, Dataset, TokenSequence, ORG_PLACEHOLDER};
use crate::error::{Error, Result};
use crate::persist::SavedModel;
use crate::regress::{
    clip_scores, fit_gbm, fit_ols, fit_svr, DesignMatrix, GbmConfig, GbmModel, LinearModel,
    Predictor, SvrConfig, DEFAULT_RIDGE,
};
use crate::vectorize::{
    fit_ngram, fit_pv, fit_tfidf, infer_pv, transform_ngram, transform_tfidf, NgramConfig,
    ParagraphVectorModel, PvConfig, TfidfModel, Vocabulary,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VectorizerConfig {
    Ngram(NgramConfig),
    Tfidf(NgramConfig),
    Pv(PvConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OlsConfig {
    pub ridge: f64,
}

impl Default for OlsConfig {
    fn default() -> Self {
        OlsConfig {
            ridge: DEFAULT_RIDGE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RegressorConfig {
    Ols(OlsConfig),
    Svr(SvrConfig),
    Gbm(GbmConfig),
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub vectorizer: VectorizerConfig,
    pub regressor: RegressorConfig,
    #[serde(default = "yes")]
    pub mask_companies: bool,
    #[serde(default = "yes")]
    pub clip: bool,
    #[serde(default)]
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(vectorizer: VectorizerConfig, regressor: RegressorConfig) -> Self {
        PipelineConfig {
            vectorizer,
            regressor,
            mask_companies: true,
            clip: true,
            seed: 0,
        }
    }

    /// Unigrams and bigrams with least squares.
    pub fn ngram_ols() -> Self {
        Self::new(
            VectorizerConfig::Ngram(NgramConfig::default()),
            RegressorConfig::Ols(OlsConfig::default()),
        )
    }

    /// Sets the pipeline seed and every nested seed to `seed`.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let VectorizerConfig::Pv(pv) = &mut self.vectorizer {
            pv.seed = seed;
        }
        if let RegressorConfig::Svr(svr) = &mut self.regressor {
            svr.seed = seed;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.vectorizer {
            VectorizerConfig::Ngram(c) | VectorizerConfig::Tfidf(c) => c.validate(),
            VectorizerConfig::Pv(c) => c.validate(),
        }?;
        match &self.regressor {
            RegressorConfig::Ols(c) => {
                if !(c.ridge.is_finite() && c.ridge >= 0.0) {
                    return Err(Error::config("ridge", "must be a finite value >= 0"));
                }
                Ok(())
            }
            RegressorConfig::Svr(c) => c.validate(),
            RegressorConfig::Gbm(c) => c.validate(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let config: PipelineConfig =
            serde_json::from_value(value).map_err(|e| Error::InvalidConfig {
                field: "config".into(),
                message: e.to_string(),
            })?;
        config.validate()?;
        Ok(config)
    }

    /// Row label for result tables.
    pub fn vectorizer_label(&self) -> String {
        fn grams(c: &NgramConfig) -> String {
            match (c.n_min, c.n_max) {
                (1, 1) => "Unigrams".into(),
                (1, 2) => "Unigrams & Bigrams".into(),
                (2, 2) => "Bigrams".into(),
                (a, b) => format!("{a}- to {b}-grams"),
            }
        }
        match &self.vectorizer {
            VectorizerConfig::Ngram(c) => grams(c),
            VectorizerConfig::Tfidf(c) if (c.n_min, c.n_max) == (1, 2) => "TF-IDF".into(),
            VectorizerConfig::Tfidf(c) => format!("TF-IDF ({})", grams(c)),
            VectorizerConfig::Pv(c) if c.dim == PvConfig::default().dim => "Doc2Vec".into(),
            VectorizerConfig::Pv(c) => format!("Doc2Vec (dim={})", c.dim),
        }
    }

    pub fn learner_label(&self) -> &'static str {
        match self.regressor {
            RegressorConfig::Ols(_) => "Simple Linear Regression",
            RegressorConfig::Svr(_) => "Support Vector Regression",
            RegressorConfig::Gbm(_) => "Gradient Boosting Regression",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedVectorizer {
    Ngram(Vocabulary),
    Tfidf(TfidfModel),
    Pv(ParagraphVectorModel),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedRegressor {
    Ols(LinearModel),
    Svr(LinearModel),
    Gbm(GbmModel),
}

impl FittedRegressor {
    pub fn predictor(&self) -> &dyn Predictor {
        match self {
            FittedRegressor::Ols(m) | FittedRegressor::Svr(m) => m,
            FittedRegressor::Gbm(m) => m,
        }
    }
}

/// Fitted vectorizer and regressor plus the config that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BundleRepr", into = "BundleRepr")]
pub struct FittedPipeline {
    pub config: PipelineConfig,
    pub vectorizer: FittedVectorizer,
    pub regressor: FittedRegressor,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleRepr {
    config: PipelineConfig,
    vectorizer: Value,
    regressor: Value,
}

impl From<FittedPipeline> for BundleRepr {
    fn from(p: FittedPipeline) -> Self {
        let vectorizer = match p.vectorizer {
            FittedVectorizer::Ngram(m) => SavedModel::Ngram(m),
            FittedVectorizer::Tfidf(m) => SavedModel::Tfidf(m),
            FittedVectorizer::Pv(m) => SavedModel::Pv(m),
        };
        let regressor = match p.regressor {
            FittedRegressor::Ols(m) => SavedModel::Ols(m),
            FittedRegressor::Svr(m) => SavedModel::Svr(m),
            FittedRegressor::Gbm(m) => SavedModel::Gbm(m),
        };
        BundleRepr {
            config: p.config,
            vectorizer: vectorizer.to_value(),
            regressor: regressor.to_value(),
        }
    }
}

impl TryFrom<BundleRepr> for FittedPipeline {
    type Error = Error;

    fn try_from(r: BundleRepr) -> Result<Self> {
        r.config.validate()?;
        let vectorizer = match (SavedModel::from_value(r.vectorizer)?, &r.config.vectorizer) {
            (SavedModel::Ngram(m), VectorizerConfig::Ngram(_)) => FittedVectorizer::Ngram(m),
            (SavedModel::Tfidf(m), VectorizerConfig::Tfidf(_)) => FittedVectorizer::Tfidf(m),
            (SavedModel::Pv(m), VectorizerConfig::Pv(_)) => FittedVectorizer::Pv(m),
            (m, _) => {
                return Err(Error::Format(format!(
                    "bundle vectorizer kind {:?} does not match its config",
                    m.kind()
                )))
            }
        };
        let regressor = match (SavedModel::from_value(r.regressor)?, &r.config.regressor) {
            (SavedModel::Ols(m), RegressorConfig::Ols(_)) => FittedRegressor::Ols(m),
            (SavedModel::Svr(m), RegressorConfig::Svr(_)) => FittedRegressor::Svr(m),
            (SavedModel::Gbm(m), RegressorConfig::Gbm(_)) => FittedRegressor::Gbm(m),
            (m, _) => {
                return Err(Error::Format(format!(
                    "bundle regressor kind {:?} does not match its config",
                    m.kind()
                )))
            }
        };
        let pipeline = FittedPipeline {
            config: r.config,
            vectorizer,
            regressor,
        };
        let (dv, dr) = (
            pipeline.feature_dimension(),
            pipeline.regressor.predictor().dimension(),
        );
        if dv != dr {
            return Err(Error::DimensionMismatch {
                expected: dr,
                found: dv,
            });
        }
        Ok(pipeline)
    }
}

/// Masks (when enabled) and tokenizes every record title.
pub fn preprocess(dataset: &Dataset, mask_companies: bool) -> Vec<TokenSequence> {
    dataset
        .iter()
        .map(|r| {
            if mask_companies {
                tokenize(&mask_company(r, ORG_PLACEHOLDER).title)
            } else {
                tokenize(&r.title)
            }
        })
        .collect()
}

fn scored_targets(dataset: &Dataset) -> Result<Vec<f64>> {
    let unscored = dataset.unscored_ids();
    if !unscored.is_empty() {
        return Err(Error::validation(format!(
            "records without sentiment: {}",
            unscored.join(", ")
        )));
    }
    Ok(dataset.iter().filter_map(|r| r.sentiment).collect())
}

// FNV-1a, used to derive stable per-document inference seeds.
fn fnv1a(tokens: &TokenSequence) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for t in tokens.iter() {
        for b in t.bytes().chain(std::iter::once(0)) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

fn vectorize_with(
    vectorizer: &FittedVectorizer,
    docs: &[TokenSequence],
    seed: u64,
) -> Result<DesignMatrix> {
    match vectorizer {
        FittedVectorizer::Ngram(vocab) => DesignMatrix::sparse(
            docs.iter().map(|d| transform_ngram(vocab, d)).collect(),
            vocab.len(),
        ),
        FittedVectorizer::Tfidf(model) => DesignMatrix::sparse(
            docs.iter().map(|d| transform_tfidf(model, d)).collect(),
            model.vocabulary.len(),
        ),
        FittedVectorizer::Pv(model) => {
            let rows = docs
                .iter()
                .map(|d| infer_pv(model, d, model.config.epochs, seed ^ fnv1a(d)).map(|v| v.vector))
                .collect::<Result<Vec<_>>>()?;
            DesignMatrix::dense(rows, model.dim())
        }
    }
}

impl FittedPipeline {
    // Keeps the specific error from bundle validation instead of a serde message.
    pub(crate) fn from_payload(value: Value) -> Result<Self> {
        let repr: BundleRepr = serde_json::from_value(value)
            .map_err(|e| Error::Format(format!("bad bundle payload: {e}")))?;
        Self::try_from(repr)
    }

    /// Fits the vectorizer and then the regressor on every record of
    /// `dataset`. All records must be scored.
    pub fn fit(config: &PipelineConfig, dataset: &Dataset) -> Result<Self> {
        config.validate()?;
        let targets = scored_targets(dataset)?;
        if targets.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let docs = preprocess(dataset, config.mask_companies);

        let (vectorizer, features) = match &config.vectorizer {
            VectorizerConfig::Ngram(c) => {
                let v = FittedVectorizer::Ngram(fit_ngram(&docs, c)?);
                let x = vectorize_with(&v, &docs, config.seed)?;
                (v, x)
            }
            VectorizerConfig::Tfidf(c) => {
                let v = FittedVectorizer::Tfidf(fit_tfidf(&docs, c)?);
                let x = vectorize_with(&v, &docs, config.seed)?;
                (v, x)
            }
            VectorizerConfig::Pv(c) => {
                let model = fit_pv(&docs, c)?;
                // Training documents use their jointly trained vectors.
                let rows = (0..model.num_docs())
                    .map(|i| model.doc_vector(i).to_vec())
                    .collect();
                let x = DesignMatrix::dense(rows, model.dim())?;
                (FittedVectorizer::Pv(model), x)
            }
        };
        let x = features.with_targets(targets)?;

        let regressor = match &config.regressor {
            RegressorConfig::Ols(c) => FittedRegressor::Ols(fit_ols(&x, c.ridge)?),
            RegressorConfig::Svr(c) => FittedRegressor::Svr(fit_svr(&x, c)?),
            RegressorConfig::Gbm(c) => FittedRegressor::Gbm(fit_gbm(&x, c)?),
        };
        Ok(FittedPipeline {
            config: config.clone(),
            vectorizer,
            regressor,
        })
    }

    pub fn feature_dimension(&self) -> usize {
        match &self.vectorizer {
            FittedVectorizer::Ngram(v) => v.len(),
            FittedVectorizer::Tfidf(m) => m.vocabulary.len(),
            FittedVectorizer::Pv(m) => m.dim(),
        }
    }

    /// The n-gram vocabulary, for n-gram and TF-IDF pipelines.
    pub fn vocabulary(&self) -> Option<&Vocabulary> {
        match &self.vectorizer {
            FittedVectorizer::Ngram(v) => Some(v),
            FittedVectorizer::Tfidf(m) => Some(&m.vocabulary),
            FittedVectorizer::Pv(_) => None,
        }
    }

    pub fn features(&self, dataset: &Dataset) -> Result<DesignMatrix> {
        let docs = preprocess(dataset, self.config.mask_companies);
        vectorize_with(&self.vectorizer, &docs, self.config.seed)
    }

    /// Raw regressor outputs.
    pub fn predict_raw(&self, dataset: &Dataset) -> Result<Vec<f64>> {
        let x = self.features(dataset)?;
        self.regressor.predictor().predict(&x)
    }

    /// Predictions, clipped to [-1, 1] when the config asks for it.
    pub fn predict(&self, dataset: &Dataset) -> Result<Vec<f64>> {
        let raw = self.predict_raw(dataset)?;
        Ok(if self.config.clip {
            clip_scores(&raw)
        } else {
            raw
        })
    }

    pub fn to_bundle_json(&self) -> String {
        SavedModel::Bundle(Box::new(self.clone())).to_json()
    }

    pub fn from_bundle_json(text: &str) -> Result<Self> {
        match SavedModel::from_json(text)? {
            SavedModel::Bundle(p) => Ok(*p),
            other => Err(Error::Format(format!(
                "expected a bundle, found a {:?} model",
                other.kind()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::HeadlineRecord;

    fn dataset() -> Dataset {
        let rows = [
            ("1", "Tesco", "Tesco shares surge on strong sales", 0.8),
            ("2", "BP", "BP profit slumps after weak quarter", -0.7),
            ("3", "Shell", "Shell shares surge", 0.6),
            ("4", "Aviva", "Aviva profit slumps", -0.5),
            ("5", "Tesco", "Tesco holds dividend", 0.0),
        ];
        Dataset::new(
            "test",
            rows.iter()
                .map(|&(id, c, t, s)| HeadlineRecord::new(id, c, t, Some(s)).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn config_json_shape() {
        let text = r#"{"vectorizer":{"kind":"ngram","n_min":1,"n_max":2},
                       "regressor":{"kind":"ols"},"seed":3}"#;
        let c = PipelineConfig::from_json(text).unwrap();
        assert_eq!(
            c.vectorizer,
            VectorizerConfig::Ngram(NgramConfig::default())
        );
        assert_eq!(c.regressor, RegressorConfig::Ols(OlsConfig::default()));
        assert!(c.mask_companies && c.clip);
        assert_eq!(c.seed, 3);

        let back = PipelineConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let typo_top = r#"{"vectorizer":{"kind":"ngram"},"regressor":{"kind":"ols"},"clipp":true}"#;
        assert!(PipelineConfig::from_json(typo_top).is_err());
        let typo_nested = r#"{"vectorizer":{"kind":"ngram","nmax":2},"regressor":{"kind":"ols"}}"#;
        assert!(PipelineConfig::from_json(typo_nested).is_err());
        let typo_regressor = r#"{"vectorizer":{"kind":"pv"},"regressor":{"kind":"gbm","lamda":1}}"#;
        assert!(PipelineConfig::from_json(typo_regressor).is_err());
        let unknown_kind = r#"{"vectorizer":{"kind":"bert"},"regressor":{"kind":"ols"}}"#;
        assert!(PipelineConfig::from_json(unknown_kind).is_err());
    }

    #[test]
    fn config_rejects_invalid_values() {
        let bad =
            r#"{"vectorizer":{"kind":"ngram","n_min":3,"n_max":2},"regressor":{"kind":"ols"}}"#;
        match PipelineConfig::from_json(bad) {
            Err(Error::InvalidConfig { field, .. }) => assert_eq!(field, "n_max"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fit_and_predict_ngram_ols() {
        let ds = dataset();
        let p = FittedPipeline::fit(&PipelineConfig::ngram_ols(), &ds).unwrap();
        assert!(p.vocabulary().unwrap().contains("_org_ shares"));
        assert!(!p.vocabulary().unwrap().contains("tesco"));
        let preds = p.predict(&ds).unwrap();
        for (pred, r) in preds.iter().zip(ds.iter()) {
            assert!((pred - r.sentiment.unwrap()).abs() < 1e-4);
        }
    }

    #[test]
    fn unscored_training_records_rejected() {
        let ds = Dataset::new(
            "t",
            vec![
                HeadlineRecord::new("a", "X", "X up", Some(0.1)).unwrap(),
                HeadlineRecord::new("b", "X", "X down", None).unwrap(),
            ],
        )
        .unwrap();
        match FittedPipeline::fit(&PipelineConfig::ngram_ols(), &ds) {
            Err(Error::Validation(msg)) => assert!(msg.contains('b')),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bundles_round_trip_for_every_combination() {
        let ds = dataset();
        let vectorizers = [
            VectorizerConfig::Ngram(NgramConfig::default()),
            VectorizerConfig::Tfidf(NgramConfig::default()),
            VectorizerConfig::Pv(PvConfig {
                dim: 4,
                epochs: 2,
                ..PvConfig::default()
            }),
        ];
        let regressors = [
            RegressorConfig::Ols(OlsConfig::default()),
            RegressorConfig::Svr(SvrConfig {
                epochs: 5,
                ..SvrConfig::default()
            }),
            RegressorConfig::Gbm(GbmConfig {
                rounds: 3,
                ..GbmConfig::default()
            }),
        ];
        for v in &vectorizers {
            for r in &regressors {
                let config = PipelineConfig::new(v.clone(), r.clone());
                let p = FittedPipeline::fit(&config, &ds).unwrap();
                let text = p.to_bundle_json();
                let back = FittedPipeline::from_bundle_json(&text).unwrap();
                assert_eq!(back, p);
                assert_eq!(back.predict(&ds).unwrap(), p.predict(&ds).unwrap());
            }
        }
    }

    #[test]
    fn mismatched_bundle_rejected() {
        let p = FittedPipeline::fit(&PipelineConfig::ngram_ols(), &dataset()).unwrap();
        let mut value: Value = serde_json::from_str(&p.to_bundle_json()).unwrap();
        value["payload"]["regressor"]["kind"] = "svr".into();
        assert!(matches!(
            FittedPipeline::from_bundle_json(&value.to_string()),
            Err(Error::Format(_))
        ));

        let mut value: Value = serde_json::from_str(&p.to_bundle_json()).unwrap();
        value["payload"]["regressor"]["payload"]["weights"] = serde_json::json!([1.0]);
        assert!(matches!(
            FittedPipeline::from_bundle_json(&value.to_string()),
            Err(Error::DimensionMismatch { .. })
        ));

        let lin = SavedModel::Ols(LinearModel {
            weights: vec![],
            bias: 0.0,
        })
        .to_json();
        assert!(FittedPipeline::from_bundle_json(&lin).is_err());
    }

    #[test]
    fn pv_inference_is_stable_per_document() {
        let config = PipelineConfig::new(
            VectorizerConfig::Pv(PvConfig {
                dim: 4,
                epochs: 3,
                ..PvConfig::default()
            }),
            RegressorConfig::Ols(OlsConfig::default()),
        );
        let ds = dataset();
        let p = FittedPipeline::fit(&config, &ds).unwrap();
        let all = p.predict_raw(&ds).unwrap();
        let last = p.predict_raw(&ds.subset(&[4])).unwrap();
        assert_eq!(all[4], last[0]);
    }
}
