//! Deterministic synthetic headline corpus with planted lexical sentiment.
//!
//! Each headline is `{company} {subject} {verb} {qualifier}` and its score is
//! the sum of the planted weights of the three parts plus Gaussian noise,
//! clamped to [-1, 1].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{Dataset, HeadlineRecord};
use crate::error::Result;

pub const DEFAULT_SIZE: usize = 200;
pub const DEFAULT_SEED: u64 = 2017;
pub const NOISE_SD: f64 = 0.05;
pub const PROVENANCE: &str = "synthetic";

pub const COMPANIES: [&str; 8] = [
    "Northwind Traders",
    "Contoso",
    "Fabrikam",
    "Globex",
    "Initech",
    "Umbrella Holdings",
    "Tyrell",
    "Wayne Enterprises",
];

pub const SUBJECTS: [(&str, f64); 5] = [
    ("profit", 0.1),
    ("revenue", 0.05),
    ("stock", 0.0),
    ("outlook", 0.05),
    ("debt", -0.1),
];

pub const VERBS: [(&str, f64); 6] = [
    ("soars", 0.55),
    ("rises", 0.3),
    ("holds", 0.0),
    ("slips", -0.2),
    ("falls", -0.35),
    ("plunges", -0.6),
];

pub const QUALIFIERS: [(&str, f64); 6] = [
    ("after upgrade", 0.2),
    ("on strong demand", 0.15),
    ("in early trading", 0.0),
    ("", 0.0),
    ("amid probe", -0.2),
    ("after downgrade", -0.2),
];

/// Noise-free score of a headline built from the given part indices.
pub fn planted_score(subject: usize, verb: usize, qualifier: usize) -> f64 {
    SUBJECTS[subject].1 + VERBS[verb].1 + QUALIFIERS[qualifier].1
}

/// Generates `n` scored headlines. Scores are rounded to four decimals.
pub fn synthetic_headlines(n: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, NOISE_SD).expect("valid noise scale");
    let width = n.max(1).to_string().len().max(3);
    let records = (0..n)
        .map(|i| {
            let company = COMPANIES[rng.random_range(0..COMPANIES.len())];
            let s = rng.random_range(0..SUBJECTS.len());
            let v = rng.random_range(0..VERBS.len());
            let q = rng.random_range(0..QUALIFIERS.len());
            let mut title = format!("{company} {} {}", SUBJECTS[s].0, VERBS[v].0);
            if !QUALIFIERS[q].0.is_empty() {
                title.push(' ');
                title.push_str(QUALIFIERS[q].0);
            }
            let score = (planted_score(s, v, q) + noise.sample(&mut rng)).clamp(-1.0, 1.0);
            let score = (score * 1e4).round() / 1e4;
            HeadlineRecord::new(
                format!("syn-{:0width$}", i + 1),
                company,
                title,
                Some(score),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(PROVENANCE, records)
}

/// The committed sample corpus.
pub fn default_corpus() -> Dataset {
    synthetic_headlines(DEFAULT_SIZE, DEFAULT_SEED).expect("synthetic corpus is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_scored() {
        let a = synthetic_headlines(50, 1).unwrap();
        let b = synthetic_headlines(50, 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, synthetic_headlines(50, 2).unwrap());
        assert!(a.unscored_ids().is_empty());
        assert!(a.iter().all(|r| r.title.starts_with(&r.company)));
        assert!(a
            .iter()
            .all(|r| (-1.0..=1.0).contains(&r.sentiment.unwrap())));
    }

    #[test]
    fn planted_scores_stay_in_range() {
        for s in 0..SUBJECTS.len() {
            for v in 0..VERBS.len() {
                for q in 0..QUALIFIERS.len() {
                    assert!(planted_score(s, v, q).abs() <= 0.9);
                }
            }
        }
    }
}
