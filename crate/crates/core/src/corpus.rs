//! Headline records, file ingestion, text preprocessing and the mappers that
//! turn out-of-task corpora (star-rated reviews, phrasebank sentences) into
//! scored training records.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Placeholder substituted for the company name in a headline.
pub const ORG_PLACEHOLDER: &str = "_ORG_";

/// One scored (or unscored) headline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadlineRecord {
    pub id: String,
    pub company: String,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<f64>,
}

impl HeadlineRecord {
    pub fn new(
        id: impl Into<String>,
        company: impl Into<String>,
        title: impl Into<String>,
        sentiment: Option<f64>,
    ) -> Result<Self> {
        let record = HeadlineRecord {
            id: id.into(),
            company: company.into(),
            title: title.into(),
            sentiment,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::validation("record id must be non-empty"));
        }
        if self.title.trim().is_empty() {
            return Err(Error::validation(format!(
                "record {:?} has an empty title",
                self.id
            )));
        }
        if let Some(s) = self.sentiment {
            if !(-1.0..=1.0).contains(&s) {
                return Err(Error::validation(format!(
                    "record {:?} has sentiment {s} outside [-1, 1]",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// An ordered collection of records with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<HeadlineRecord>,
    provenance: String,
}

impl Dataset {
    pub fn new(provenance: impl Into<String>, records: Vec<HeadlineRecord>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for record in &records {
            record.validate()?;
            if !seen.insert(record.id.as_str()) {
                return Err(Error::validation(format!("duplicate id {:?}", record.id)));
            }
        }
        Ok(Dataset {
            records,
            provenance: provenance.into(),
        })
    }

    pub fn empty(provenance: impl Into<String>) -> Self {
        Dataset {
            records: Vec::new(),
            provenance: provenance.into(),
        }
    }

    pub fn records(&self) -> &[HeadlineRecord] {
        &self.records
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, HeadlineRecord> {
        self.records.iter()
    }

    /// Records at the given positions, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Ids of records without a sentiment score.
    pub fn unscored_ids(&self) -> Vec<&str> {
        self.records
            .iter()
            .filter(|r| r.sentiment.is_none())
            .map(|r| r.id.as_str())
            .collect()
    }

    /// Serializes to the headline JSON schema (compact, keys in schema order).
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.records).expect("records serialize")
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a HeadlineRecord;
    type IntoIter = std::slice::Iter<'a, HeadlineRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeadlineFormat {
    #[default]
    Json,
}

/// Reads a JSON array of headline objects.
pub fn load_headlines<R: Read>(source: R, format: HeadlineFormat) -> Result<Dataset> {
    match format {
        HeadlineFormat::Json => {
            let elements: Vec<Value> = serde_json::from_reader(source)?;
            let mut records = Vec::with_capacity(elements.len());
            for (index, element) in elements.into_iter().enumerate() {
                let record: HeadlineRecord =
                    serde_json::from_value(element).map_err(|e| Error::Parse {
                        index,
                        message: e.to_string(),
                    })?;
                records.push(record);
            }
            Dataset::new("headlines", records)
        }
    }
}

/// Lowercased runs of Unicode letters, digits and `_`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenSequence {
    tokens: Vec<String>,
}

impl TokenSequence {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSequence {
    /// Builds a sequence from pre-split tokens. Tokens are lowercased; empty
    /// ones are dropped.
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenSequence {
            tokens: iter
                .into_iter()
                .map(|t| t.into().to_lowercase())
                .filter(|t| !t.is_empty() && !t.chars().any(char::is_whitespace))
                .collect(),
        }
    }
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub fn tokenize(text: &str) -> TokenSequence {
    let lowered = text.to_lowercase();
    TokenSequence {
        tokens: lowered
            .split(|c: char| !is_token_char(c))
            .filter(|t| !t.is_empty())
            .map(str::to_owned)
            .collect(),
    }
}

// Hyphen-joined compounds ("bp-linked") count as a single word when masking.
fn is_word_char(c: char) -> bool {
    is_token_char(c) || c == '-'
}

fn chars_eq_ignore_case(a: char, b: char) -> bool {
    a == b || a.to_lowercase().eq(b.to_lowercase())
}

/// Replaces whole-word, case-insensitive occurrences of the record's company
/// with `placeholder`.
pub fn mask_company(record: &HeadlineRecord, placeholder: &str) -> HeadlineRecord {
    let mut masked = record.clone();
    masked.title = mask_in_text(&record.title, &record.company, placeholder);
    masked
}

fn mask_in_text(text: &str, company: &str, placeholder: &str) -> String {
    let needle: Vec<char> = company.trim().chars().collect();
    if needle.is_empty() {
        return text.to_owned();
    }
    let hay: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < hay.len() {
        let end = i + needle.len();
        let matches = end <= hay.len()
            && hay[i..end]
                .iter()
                .zip(&needle)
                .all(|(&a, &b)| chars_eq_ignore_case(a, b))
            && (i == 0 || !is_word_char(hay[i - 1]))
            && (end == hay.len() || !is_word_char(hay[end]));
        if matches {
            out.push_str(placeholder);
            i = end;
        } else {
            out.push(hay[i]);
            i += 1;
        }
    }
    out
}

/// A product review with a 1–5 star rating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingReview {
    pub text: String,
    pub stars: i64,
}

/// Linear map of stars onto [-1, 1]: 1 → -1, 3 → 0, 5 → 1.
pub fn map_star_rating(stars: i64) -> Result<f64> {
    if !(1..=5).contains(&stars) {
        return Err(Error::validation(format!(
            "star rating {stars} is outside 1..=5"
        )));
    }
    Ok((stars - 3) as f64 / 2.0)
}

/// Reads JSON-lines reviews, stopping after `limit` entries when given.
/// Blank lines are skipped.
pub fn load_ratings<R: Read>(source: R, limit: Option<usize>) -> Result<Vec<RatingReview>> {
    let mut reviews = Vec::new();
    for (index, line) in BufReader::new(source).lines().enumerate() {
        if limit.is_some_and(|l| reviews.len() >= l) {
            break;
        }
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let review: RatingReview = serde_json::from_str(&line).map_err(|e| Error::Parse {
            index,
            message: e.to_string(),
        })?;
        map_star_rating(review.stars)?;
        reviews.push(review);
    }
    Ok(reviews)
}

/// Converts reviews into unscoped records (empty company) with sentiment from
/// [`map_star_rating`]. Ids are 1-based positions. Reviews with blank text are
/// skipped.
pub fn ratings_to_dataset(reviews: &[RatingReview], provenance: &str) -> Result<Dataset> {
    let mut records = Vec::with_capacity(reviews.len());
    for (i, review) in reviews.iter().enumerate() {
        if review.text.trim().is_empty() {
            continue;
        }
        records.push(HeadlineRecord {
            id: (i + 1).to_string(),
            company: String::new(),
            title: review.text.clone(),
            sentiment: Some(map_star_rating(review.stars)?),
        });
    }
    Dataset::new(provenance, records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhraseLabel {
    Positive,
    Neutral,
    Negative,
}

impl std::str::FromStr for PhraseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" => Ok(PhraseLabel::Positive),
            "neutral" => Ok(PhraseLabel::Neutral),
            "negative" => Ok(PhraseLabel::Negative),
            other => Err(Error::validation(format!(
                "unknown phrasebank label {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhrasebankEntry {
    pub text: String,
    pub label: PhraseLabel,
}

/// Scores assigned to the positive and negative phrasebank classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhrasebankScale {
    pub positive: f64,
    pub negative: f64,
    /// Skip the check that the values come from {1, 0.5} and {-1, -0.5}.
    pub unchecked: bool,
}

impl Default for PhrasebankScale {
    fn default() -> Self {
        PhrasebankScale {
            positive: 1.0,
            negative: -1.0,
            unchecked: false,
        }
    }
}

impl PhrasebankScale {
    pub fn new(positive: f64, negative: f64) -> Self {
        PhrasebankScale {
            positive,
            negative,
            unchecked: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.unchecked {
            if !(-1.0..=1.0).contains(&self.positive) || !(-1.0..=1.0).contains(&self.negative) {
                return Err(Error::validation("phrasebank scores must lie in [-1, 1]"));
            }
            return Ok(());
        }
        if self.positive != 1.0 && self.positive != 0.5 {
            return Err(Error::validation(format!(
                "positive score {} is not one of 1.0, 0.5",
                self.positive
            )));
        }
        if self.negative != -1.0 && self.negative != -0.5 {
            return Err(Error::validation(format!(
                "negative score {} is not one of -1.0, -0.5",
                self.negative
            )));
        }
        Ok(())
    }
}

pub fn map_phrasebank_label(label: PhraseLabel, scale: &PhrasebankScale) -> Result<f64> {
    scale.validate()?;
    Ok(match label {
        PhraseLabel::Neutral => 0.0,
        PhraseLabel::Positive => scale.positive,
        PhraseLabel::Negative => scale.negative,
    })
}

/// Reads `sentence<delimiter>label` lines. The label is taken after the last
/// delimiter so sentences may contain it.
pub fn load_phrasebank<R: Read>(source: R, delimiter: char) -> Result<Vec<PhrasebankEntry>> {
    let mut entries = Vec::new();
    for (index, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let (text, label) = line.rsplit_once(delimiter).ok_or_else(|| Error::Parse {
            index,
            message: format!("missing {delimiter:?} label delimiter"),
        })?;
        let label = label.parse().map_err(|e: Error| Error::Parse {
            index,
            message: e.to_string(),
        })?;
        entries.push(PhrasebankEntry {
            text: text.trim().to_owned(),
            label,
        });
    }
    Ok(entries)
}

pub fn phrasebank_to_dataset(
    entries: &[PhrasebankEntry],
    scale: &PhrasebankScale,
    provenance: &str,
) -> Result<Dataset> {
    scale.validate()?;
    let mut records = Vec::with_capacity(entries.len());
    for (i, entry) in entries.iter().enumerate() {
        if entry.text.trim().is_empty() {
            continue;
        }
        records.push(HeadlineRecord {
            id: (i + 1).to_string(),
            company: String::new(),
            title: entry.text.clone(),
            sentiment: Some(map_phrasebank_label(entry.label, scale)?),
        });
    }
    Dataset::new(provenance, records)
}

/// Appends `augment` to `base`. Augment ids become `<provenance>/<id>`.
pub fn merge_datasets(base: &Dataset, augment: &Dataset) -> Dataset {
    let mut records = base.records.clone();
    records.extend(augment.records.iter().map(|r| HeadlineRecord {
        id: format!("{}/{}", augment.provenance, r.id),
        ..r.clone()
    }));
    Dataset {
        records,
        provenance: base.provenance.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, company: &str, title: &str) -> HeadlineRecord {
        HeadlineRecord::new(id, company, title, Some(0.0)).unwrap()
    }

    fn toks(seq: &TokenSequence) -> Vec<&str> {
        seq.iter().collect()
    }

    #[test]
    fn load_single_record() {
        let ds = load_headlines(
            r#"[{"id":"1","company":"X","title":"X gains","sentiment":0.5}]"#.as_bytes(),
            HeadlineFormat::Json,
        )
        .unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.records()[0].sentiment, Some(0.5));
        assert_eq!(ds.records()[0].title, "X gains");
    }

    #[test]
    fn load_empty_array() {
        let ds = load_headlines("[]".as_bytes(), HeadlineFormat::Json).unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn load_rejects_out_of_range_sentiment() {
        let err = load_headlines(
            r#"[{"id":"1","company":"X","title":"X gains","sentiment":1.7}]"#.as_bytes(),
            HeadlineFormat::Json,
        )
        .unwrap_err();
        match err {
            Error::Validation(msg) => assert!(msg.contains("\"1\""), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn load_reports_element_index() {
        let err = load_headlines(
            r#"[{"id":"1","company":"X","title":"a"},{"id":"2","title":"b"}]"#.as_bytes(),
            HeadlineFormat::Json,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { index: 1, .. }), "{err:?}");
    }

    #[test]
    fn load_rejects_duplicates_and_garbage() {
        let dup = r#"[{"id":"1","company":"X","title":"a"},{"id":"1","company":"X","title":"b"}]"#;
        assert!(matches!(
            load_headlines(dup.as_bytes(), HeadlineFormat::Json),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            load_headlines("[{".as_bytes(), HeadlineFormat::Json),
            Err(Error::Json(_))
        ));
    }

    #[test]
    fn unscored_records_load() {
        let ds = load_headlines(
            r#"[{"id":"a","company":"X","title":"t"}]"#.as_bytes(),
            HeadlineFormat::Json,
        )
        .unwrap();
        assert_eq!(ds.unscored_ids(), vec!["a"]);
    }

    #[test]
    fn mask_examples() {
        let r = rec("1", "Glencore", "Glencore shares rise");
        assert_eq!(mask_company(&r, ORG_PLACEHOLDER).title, "_ORG_ shares rise");

        let r = rec("2", "BP", "Tesco misses targets");
        assert_eq!(
            mask_company(&r, ORG_PLACEHOLDER).title,
            "Tesco misses targets"
        );

        let r = rec("3", "BP", "BP and bp-linked funds fall");
        assert_eq!(
            mask_company(&r, ORG_PLACEHOLDER).title,
            "_ORG_ and bp-linked funds fall"
        );
    }

    #[test]
    fn mask_is_case_insensitive_and_handles_punctuation() {
        let r = rec("1", "Rio Tinto", "rio tinto, BHP slip; RIO TINTO's outlook");
        assert_eq!(
            mask_company(&r, ORG_PLACEHOLDER).title,
            "_ORG_, BHP slip; _ORG_'s outlook"
        );
        let r = rec("2", "BP", "BPX rallies");
        assert_eq!(mask_company(&r, ORG_PLACEHOLDER).title, "BPX rallies");
    }

    #[test]
    fn mask_with_empty_company_is_identity() {
        let r = rec("1", "", "Shares rise");
        assert_eq!(mask_company(&r, ORG_PLACEHOLDER), r);
    }

    #[test]
    fn placeholder_survives_tokenization() {
        assert_eq!(
            toks(&tokenize("_ORG_ shares rise")),
            ["_org_", "shares", "rise"]
        );
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(toks(&tokenize("Stock rises 5%")), ["stock", "rises", "5"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize("?!-- ...").is_empty());
        assert_eq!(
            toks(&tokenize("U.S.-based firm")),
            ["u", "s", "based", "firm"]
        );
        assert_eq!(
            toks(&tokenize("Überraschung für Ölpreis")),
            ["überraschung", "für", "ölpreis"]
        );
    }

    #[test]
    fn star_rating_examples() {
        assert_eq!(map_star_rating(3).unwrap(), 0.0);
        assert_eq!(map_star_rating(5).unwrap(), 1.0);
        assert_eq!(map_star_rating(1).unwrap(), -1.0);
        assert_eq!(map_star_rating(2).unwrap(), -0.5);
        assert!(map_star_rating(0).is_err());
        assert!(map_star_rating(6).is_err());
    }

    #[test]
    fn phrasebank_examples() {
        let full = PhrasebankScale::default();
        assert_eq!(
            map_phrasebank_label(PhraseLabel::Neutral, &full).unwrap(),
            0.0
        );
        let half = PhrasebankScale::new(0.5, -1.0);
        assert_eq!(
            map_phrasebank_label(PhraseLabel::Positive, &half).unwrap(),
            0.5
        );
        assert_eq!(
            map_phrasebank_label(PhraseLabel::Negative, &half).unwrap(),
            -1.0
        );

        let off_grid = PhrasebankScale::new(0.7, -1.0);
        assert!(map_phrasebank_label(PhraseLabel::Positive, &off_grid).is_err());
        let unchecked = PhrasebankScale {
            unchecked: true,
            ..off_grid
        };
        assert_eq!(
            map_phrasebank_label(PhraseLabel::Positive, &unchecked).unwrap(),
            0.7
        );
    }

    #[test]
    fn phrasebank_file_parsing() {
        let text = "Profit rose to EUR 5 mn@positive\nemail a@b.com for details@neutral\n\nSales fell@negative\n";
        let entries = load_phrasebank(text.as_bytes(), '@').unwrap();
        assert_eq!(entries.len(), 3);
        assert_eq!(entries[1].text, "email a@b.com for details");
        assert_eq!(entries[2].label, PhraseLabel::Negative);

        let ds = phrasebank_to_dataset(&entries, &PhrasebankScale::new(0.5, -0.5), "phrasebank")
            .unwrap();
        let scores: Vec<_> = ds.iter().map(|r| r.sentiment.unwrap()).collect();
        assert_eq!(scores, [0.5, 0.0, -0.5]);

        assert!(matches!(
            load_phrasebank("no label here".as_bytes(), '@'),
            Err(Error::Parse { index: 0, .. })
        ));
        assert!(load_phrasebank("x@mixed".as_bytes(), '@').is_err());
    }

    #[test]
    fn ratings_file_parsing() {
        let text = "{\"text\":\"great\",\"stars\":5}\n{\"text\":\"meh\",\"stars\":3}\n{\"text\":\"bad\",\"stars\":1}\n";
        let all = load_ratings(text.as_bytes(), None).unwrap();
        assert_eq!(all.len(), 3);
        let limited = load_ratings(text.as_bytes(), Some(2)).unwrap();
        assert_eq!(limited.len(), 2);
        let ds = ratings_to_dataset(&all, "ratings-augment").unwrap();
        let scores: Vec<_> = ds.iter().map(|r| r.sentiment.unwrap()).collect();
        assert_eq!(scores, [1.0, 0.0, -1.0]);
        assert!(load_ratings("{\"text\":\"x\",\"stars\":9}".as_bytes(), None).is_err());
    }

    #[test]
    fn merge_examples() {
        let base = Dataset::new(
            "semeval-train",
            vec![rec("1", "A", "a"), rec("7", "B", "b")],
        )
        .unwrap();
        let augment = Dataset::new(
            "ratings-augment",
            vec![rec("7", "", "x"), rec("8", "", "y"), rec("9", "", "z")],
        )
        .unwrap();
        let merged = merge_datasets(&base, &augment);
        assert_eq!(merged.len(), 5);
        assert_eq!(&merged.records()[..2], base.records());
        let ids: Vec<_> = merged.iter().map(|r| r.id.as_str()).collect();
        assert!(ids.contains(&"7") && ids.contains(&"ratings-augment/7"));

        let same = merge_datasets(&base, &Dataset::empty("ratings-augment"));
        assert_eq!(same.records(), base.records());
    }

    #[test]
    fn canonical_json_round_trip() {
        let canonical = r#"[{"id":"1","company":"X","title":"X gains","sentiment":0.5},{"id":"2","company":"Y","title":"Y falls"}]"#;
        let ds = load_headlines(canonical.as_bytes(), HeadlineFormat::Json).unwrap();
        assert_eq!(ds.to_json(), canonical);
    }
}
