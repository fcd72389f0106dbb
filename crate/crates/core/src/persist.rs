//! Versioned JSON container for fitted models:
//!
//! ```json
//! {"format_version": 1, "kind": "ngram" | "tfidf" | "pv" | "ols" | "svr" | "gbm" | "bundle",
//!  "payload": { ... }}
//! ```
//!
//! Floats are written in shortest round-trip form and parsed back exactly.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::pipeline::FittedPipeline;
use crate::regress::{GbmModel, LinearModel};
use crate::vectorize::{ParagraphVectorModel, TfidfModel, Vocabulary};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Ngram(Vocabulary),
    Tfidf(TfidfModel),
    Pv(ParagraphVectorModel),
    Ols(LinearModel),
    Svr(LinearModel),
    Gbm(GbmModel),
    Bundle(Box<FittedPipeline>),
}

#[derive(Serialize)]
struct ContainerOut<'a, T: Serialize> {
    format_version: u32,
    kind: &'a str,
    payload: &'a T,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ContainerIn {
    format_version: u32,
    kind: String,
    payload: Value,
}

impl SavedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            SavedModel::Ngram(_) => "ngram",
            SavedModel::Tfidf(_) => "tfidf",
            SavedModel::Pv(_) => "pv",
            SavedModel::Ols(_) => "ols",
            SavedModel::Svr(_) => "svr",
            SavedModel::Gbm(_) => "gbm",
            SavedModel::Bundle(_) => "bundle",
        }
    }

    pub fn to_value(&self) -> Value {
        fn wrap<T: Serialize>(kind: &str, payload: &T) -> Value {
            serde_json::to_value(ContainerOut {
                format_version: FORMAT_VERSION,
                kind,
                payload,
            })
            .expect("models serialize to JSON")
        }
        let kind = self.kind();
        match self {
            SavedModel::Ngram(m) => wrap(kind, m),
            SavedModel::Tfidf(m) => wrap(kind, m),
            SavedModel::Pv(m) => wrap(kind, m),
            SavedModel::Ols(m) | SavedModel::Svr(m) => wrap(kind, m),
            SavedModel::Gbm(m) => wrap(kind, m),
            SavedModel::Bundle(m) => wrap(kind, m),
        }
    }

    pub fn to_json(&self) -> String {
        self.to_value().to_string()
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let c: ContainerIn = serde_json::from_value(value)
            .map_err(|e| Error::Format(format!("not a model container: {e}")))?;
        if c.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                c.format_version
            )));
        }
        fn payload<T: serde::de::DeserializeOwned>(kind: &str, v: Value) -> Result<T> {
            serde_json::from_value(v).map_err(|e| Error::Format(format!("bad {kind} payload: {e}")))
        }
        let model = match c.kind.as_str() {
            "ngram" => SavedModel::Ngram(payload(&c.kind, c.payload)?),
            "tfidf" => {
                let m: TfidfModel = payload(&c.kind, c.payload)?;
                m.check()?;
                SavedModel::Tfidf(m)
            }
            "pv" => SavedModel::Pv(payload(&c.kind, c.payload)?),
            "ols" => SavedModel::Ols(payload(&c.kind, c.payload)?),
            "svr" => SavedModel::Svr(payload(&c.kind, c.payload)?),
            "gbm" => {
                let m: GbmModel = payload(&c.kind, c.payload)?;
                m.check()?;
                SavedModel::Gbm(m)
            }
            "bundle" => SavedModel::Bundle(Box::new(FittedPipeline::from_payload(c.payload)?)),
            other => return Err(Error::Format(format!("unknown model kind {other:?}"))),
        };
        Ok(model)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        Self::from_value(value)
    }
}
