use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

fn check_pair(gold: &[f64], pred: &[f64]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.iter().chain(pred).any(|v| !v.is_finite()) {
        return Err(Error::validation("scores must be finite"));
    }
    Ok(())
}

/// Coefficient of determination, `1 - SSres / SStot`. Can be negative.
///
/// Constant gold (including a single value) has no variance to explain and
/// yields [`Error::DegenerateGold`].
pub fn r_squared(gold: &[f64], pred: &[f64]) -> Result<f64> {
    check_pair(gold, pred)?;
    if gold.len() < 2 || gold.iter().all(|&g| g == gold[0]) {
        return Err(Error::DegenerateGold);
    }
    let mean = gold.iter().sum::<f64>() / gold.len() as f64;
    let ss_tot: f64 = gold.iter().map(|g| (g - mean).powi(2)).sum();
    let ss_res: f64 = gold.iter().zip(pred).map(|(g, f)| (g - f).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Cosine of the angle between the gold and predicted score vectors.
pub fn cosine(gold: &[f64], pred: &[f64]) -> Result<f64> {
    check_pair(gold, pred)?;
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (ng, np) = (norm(gold), norm(pred));
    if ng == 0.0 || np == 0.0 {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = gold.iter().zip(pred).map(|(g, p)| g * p).sum();
    Ok((dot / (ng * np)).clamp(-1.0, 1.0))
}

/// Gold and predicted scores aligned by id. `num_gold_total` is the size of
/// the whole gold set, which may exceed the number of predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    gold: Vec<f64>,
    predicted: Vec<f64>,
    num_gold_total: usize,
}

impl ScoredPair {
    pub fn new(gold: Vec<f64>, predicted: Vec<f64>, num_gold_total: usize) -> Result<Self> {
        check_pair(&gold, &predicted)?;
        if predicted.len() > num_gold_total {
            return Err(Error::validation(format!(
                "{} predictions for a gold set of {num_gold_total}",
                predicted.len()
            )));
        }
        if predicted.is_empty() {
            return Err(Error::validation("no predictions to evaluate"));
        }
        Ok(ScoredPair {
            gold,
            predicted,
            num_gold_total,
        })
    }

    /// Full coverage: every gold score has a prediction.
    pub fn full(gold: Vec<f64>, predicted: Vec<f64>) -> Result<Self> {
        let n = gold.len();
        Self::new(gold, predicted, n)
    }

    pub fn gold(&self) -> &[f64] {
        &self.gold
    }

    pub fn predicted(&self) -> &[f64] {
        &self.predicted
    }

    pub fn num_gold_total(&self) -> usize {
        self.num_gold_total
    }

    pub fn coverage(&self) -> f64 {
        self.predicted.len() as f64 / self.num_gold_total as f64
    }
}

/// Returns `(cosine_weight, cosine_score)`.
pub fn cosine_score(pair: &ScoredPair) -> Result<(f64, f64)> {
    let c = cosine(&pair.gold, &pair.predicted)?;
    let weight = pair.coverage();
    Ok((weight, weight * c))
}

/// R², or a marker when the gold scores are constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum R2 {
    Value(f64),
    Degenerate,
}

pub const DEGENERATE_MARKER: &str = "degenerate";

impl R2 {
    pub fn value(self) -> Option<f64> {
        match self {
            R2::Value(v) => Some(v),
            R2::Degenerate => None,
        }
    }

    pub fn is_degenerate(self) -> bool {
        self == R2::Degenerate
    }
}

impl fmt::Display for R2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            R2::Value(v) => match f.precision() {
                Some(p) => write!(f, "{v:.p$}"),
                None => write!(f, "{v}"),
            },
            R2::Degenerate => f.pad(DEGENERATE_MARKER),
        }
    }
}

impl Serialize for R2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            R2::Value(v) => s.serialize_f64(*v),
            R2::Degenerate => s.serialize_str(DEGENERATE_MARKER),
        }
    }
}

impl<'de> Deserialize<'de> for R2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct R2Visitor;
        impl Visitor<'_> for R2Visitor {
            type Value = R2;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a number or {DEGENERATE_MARKER:?}")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<R2, E> {
                Ok(R2::Value(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<R2, E> {
                Ok(R2::Value(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<R2, E> {
                Ok(R2::Value(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<R2, E> {
                if v == DEGENERATE_MARKER {
                    Ok(R2::Degenerate)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(R2Visitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub r2: R2,
    pub cosine: f64,
    pub cosine_weight: f64,
    pub cosine_score: f64,
    pub n: usize,
}

/// All task metrics for one aligned set of scores.
pub fn evaluate(pair: &ScoredPair) -> Result<EvalReport> {
    let r2 = match r_squared(&pair.gold, &pair.predicted) {
        Ok(v) => R2::Value(v),
        Err(Error::DegenerateGold) => R2::Degenerate,
        Err(e) => return Err(e),
    };
    let c = cosine(&pair.gold, &pair.predicted)?;
    let weight = pair.coverage();
    Ok(EvalReport {
        r2,
        cosine: c,
        cosine_weight: weight,
        cosine_score: weight * c,
        n: pair.predicted.len(),
    })
}
