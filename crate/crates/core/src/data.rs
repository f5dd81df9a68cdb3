//! Canonical data model: datasets of human-annotated summaries and
//! per-summary prediction sets.
//!
//! A [`ScoreDataset`] holds one record per `(document, system)` pair, each
//! with the summary text and one or more annotator coherence scores. A
//! [`PredictionSet`] maps the same keys to a single real score emitted by a
//! coherence measure (or by an aggregation of the human scores).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Document identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DocId(pub String);

/// Summarization system identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SystemId(pub String);

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for DocId {
    fn from(s: &str) -> Self {
        DocId(s.to_owned())
    }
}

impl From<&str> for SystemId {
    fn from(s: &str) -> Self {
        SystemId(s.to_owned())
    }
}

/// One summary with its human annotator scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub doc_id: DocId,
    pub system_id: SystemId,
    pub summary_text: String,
    /// Per-annotator coherence scores; never empty.
    pub coherence: Vec<f64>,
}

/// The comparison set an evaluation metric draws its pairs from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComparisonLevel {
    /// Comparisons between per-system mean scores.
    System,
    /// Comparisons between all summaries jointly.
    Summary,
    /// Comparisons between summaries of different systems on the same document.
    Pairwise,
    /// Comparisons between summaries of the same system on different documents.
    Intra,
}

impl ComparisonLevel {
    pub const ALL: [ComparisonLevel; 4] = [
        ComparisonLevel::System,
        ComparisonLevel::Summary,
        ComparisonLevel::Pairwise,
        ComparisonLevel::Intra,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ComparisonLevel::System => "system",
            ComparisonLevel::Summary => "summary",
            ComparisonLevel::Pairwise => "pairwise",
            ComparisonLevel::Intra => "intra",
        }
    }
}

impl fmt::Display for ComparisonLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ComparisonLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "system" => Ok(ComparisonLevel::System),
            "summary" => Ok(ComparisonLevel::Summary),
            "pairwise" => Ok(ComparisonLevel::Pairwise),
            "intra" => Ok(ComparisonLevel::Intra),
            other => Err(Error::InvalidArgument(format!(
                "unknown comparison level '{other}' (expected system|summary|pairwise|intra)"
            ))),
        }
    }
}

/// Supported dataset file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    /// One JSON object per line: `doc_id`, `system_id`, `summary_text`, `coherence`.
    CanonicalJsonl,
    /// The released SummEval paired-annotation JSONL, expert annotations,
    /// coherence dimension (`id`, `model_id`, `decoded`, `expert_annotations`).
    SummevalExpert,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical-jsonl" => Ok(DatasetFormat::CanonicalJsonl),
            "summeval-expert" => Ok(DatasetFormat::SummevalExpert),
            other => Err(Error::InvalidArgument(format!(
                "unknown dataset format '{other}' (expected canonical-jsonl|summeval-expert)"
            ))),
        }
    }
}

/// How to collapse annotator scores into one human score per summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// Mean over all annotators.
    Mean,
    /// Mean over all annotators except the given index; requires aligned
    /// annotator vectors.
    Exclude(usize),
}

pub const DEFAULT_SCORE_RANGE: (f64, f64) = (1.0, 5.0);

/// A validated collection of summary records over a document set `D` and a
/// system set `S`. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreDataset {
    records: Vec<SummaryRecord>,
    systems: Vec<SystemId>,
    documents: Vec<DocId>,
    index: BTreeMap<(DocId, SystemId), usize>,
    score_range: (f64, f64),
}

impl ScoreDataset {
    /// Builds a dataset from records, validating invariants: non-empty, no
    /// duplicate `(document, system)` key, non-empty in-range annotator score
    /// vectors. Summary text is NFC-normalized here.
    pub fn from_records(records: Vec<SummaryRecord>, score_range: (f64, f64)) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !(score_range.0 <= score_range.1) {
            return Err(Error::InvalidArgument(format!(
                "invalid score range {:?}",
                score_range
            )));
        }
        let mut normalized = Vec::with_capacity(records.len());
        let mut systems = Vec::new();
        let mut documents = Vec::new();
        let mut index = BTreeMap::new();
        for mut rec in records {
            if rec.coherence.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "record ({}, {}) has no annotator scores",
                    rec.doc_id, rec.system_id
                )));
            }
            for &s in &rec.coherence {
                if !s.is_finite() || s < score_range.0 || s > score_range.1 {
                    return Err(Error::InvalidArgument(format!(
                        "record ({}, {}) has score {} outside declared range [{}, {}]",
                        rec.doc_id, rec.system_id, s, score_range.0, score_range.1
                    )));
                }
            }
            rec.summary_text = rec.summary_text.nfc().collect();
            let key = (rec.doc_id.clone(), rec.system_id.clone());
            if index.insert(key, normalized.len()).is_some() {
                return Err(Error::DuplicateKey {
                    doc: rec.doc_id.0.clone(),
                    system: rec.system_id.0.clone(),
                });
            }
            if !systems.contains(&rec.system_id) {
                systems.push(rec.system_id.clone());
            }
            if !documents.contains(&rec.doc_id) {
                documents.push(rec.doc_id.clone());
            }
            normalized.push(rec);
        }
        Ok(ScoreDataset {
            records: normalized,
            systems,
            documents,
            index,
            score_range,
        })
    }

    pub fn records(&self) -> &[SummaryRecord] {
        &self.records
    }

    /// Systems in order of first appearance.
    pub fn systems(&self) -> &[SystemId] {
        &self.systems
    }

    /// Documents in order of first appearance.
    pub fn documents(&self) -> &[DocId] {
        &self.documents
    }

    pub fn score_range(&self) -> (f64, f64) {
        self.score_range
    }

    pub fn get(&self, doc: &DocId, system: &SystemId) -> Option<&SummaryRecord> {
        self.index
            .get(&(doc.clone(), system.clone()))
            .map(|&i| &self.records[i])
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of annotators when every record has the same count, else `None`.
    pub fn aligned_annotators(&self) -> Option<usize> {
        let n = self.records[0].coherence.len();
        self.records
            .iter()
            .all(|r| r.coherence.len() == n)
            .then_some(n)
    }

    /// Serializes to canonical JSONL, one record per line, record order
    /// preserved.
    pub fn to_canonical_jsonl(&self) -> String {
        let mut out = String::new();
        for rec in &self.records {
            out.push_str(&serde_json::to_string(rec).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_canonical_jsonl()).map_err(|e| Error::io(path, e))
    }
}

/// One real score per `(document, system)` key for a named measure.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    measure_name: String,
    scores: BTreeMap<(DocId, SystemId), f64>,
}

impl PredictionSet {
    pub fn new(measure_name: impl Into<String>) -> Self {
        PredictionSet {
            measure_name: measure_name.into(),
            scores: BTreeMap::new(),
        }
    }

    pub fn from_entries(
        measure_name: impl Into<String>,
        entries: impl IntoIterator<Item = ((DocId, SystemId), f64)>,
    ) -> Result<Self> {
        let mut set = PredictionSet::new(measure_name);
        for (key, score) in entries {
            set.insert(key.0, key.1, score)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, doc: DocId, system: SystemId, score: f64) -> Result<()> {
        if !score.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite score for ({doc}, {system})"
            )));
        }
        if self.scores.insert((doc.clone(), system.clone()), score).is_some() {
            return Err(Error::DuplicateKey {
                doc: doc.0,
                system: system.0,
            });
        }
        Ok(())
    }

    pub fn measure_name(&self) -> &str {
        &self.measure_name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.measure_name = name.into();
        self
    }

    pub fn get(&self, doc: &DocId, system: &SystemId) -> Option<f64> {
        self.scores.get(&(doc.clone(), system.clone())).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Key-sorted iteration.
    pub fn iter(&self) -> impl Iterator<Item = (&(DocId, SystemId), f64)> {
        self.scores.iter().map(|(k, &v)| (k, v))
    }

    /// Distinct systems, sorted.
    pub fn systems(&self) -> Vec<SystemId> {
        let set: BTreeSet<_> = self.scores.keys().map(|(_, s)| s.clone()).collect();
        set.into_iter().collect()
    }

    /// Distinct documents, sorted.
    pub fn documents(&self) -> Vec<DocId> {
        let set: BTreeSet<_> = self.scores.keys().map(|(d, _)| d.clone()).collect();
        set.into_iter().collect()
    }

    pub fn same_keys(&self, other: &PredictionSet) -> bool {
        self.scores.len() == other.scores.len()
            && self.scores.keys().zip(other.scores.keys()).all(|(a, b)| a == b)
    }

    /// True when the key set is exactly `documents() x systems()`.
    pub fn is_complete_grid(&self) -> bool {
        let docs = self.documents();
        let systems = self.systems();
        self.scores.len() == docs.len() * systems.len()
    }

    /// Applies `f` to every score, keeping keys and name.
    pub fn map_scores(&self, mut f: impl FnMut(f64) -> f64) -> PredictionSet {
        PredictionSet {
            measure_name: self.measure_name.clone(),
            scores: self
                .scores
                .iter()
                .map(|(k, &v)| (k.clone(), f(v)))
                .collect(),
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for ((doc, system), score) in self.scores.iter() {
            let line = PredictionLine {
                doc_id: doc.clone(),
                system_id: system.clone(),
                score: *score,
            };
            out.push_str(&serde_json::to_string(&line).expect("line serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_jsonl()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Serialize, Deserialize)]
struct PredictionLine {
    doc_id: DocId,
    system_id: SystemId,
    score: f64,
}

/// Loads a dataset file in the named format, validating as it goes.
pub fn load_dataset(
    path: &Path,
    format: DatasetFormat,
    score_range: (f64, f64),
) -> Result<ScoreDataset> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&content, format, score_range, &path.display().to_string())
}

/// Parses dataset content; `source` names the input in error messages.
pub fn parse_dataset(
    content: &str,
    format: DatasetFormat,
    score_range: (f64, f64),
    source: &str,
) -> Result<ScoreDataset> {
    let mut records = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let record = match format {
            DatasetFormat::CanonicalJsonl => serde_json::from_str::<SummaryRecord>(trimmed)
                .map_err(|e| Error::malformed(source, lineno, e.to_string()))?,
            DatasetFormat::SummevalExpert => parse_summeval_line(trimmed, source, lineno)?,
        };
        records.push(record);
    }
    ScoreDataset::from_records(records, score_range)
}

fn parse_summeval_line(line: &str, source: &str, lineno: usize) -> Result<SummaryRecord> {
    let value: serde_json::Value = serde_json::from_str(line)
        .map_err(|e| Error::malformed(source, lineno, e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::malformed(source, lineno, "record is not a JSON object"))?;
    let field_str = |name: &str| -> Result<String> {
        obj.get(name)
            .and_then(|v| v.as_str())
            .map(str::to_owned)
            .ok_or_else(|| Error::malformed(source, lineno, format!("missing string field '{name}'")))
    };
    let doc_id = field_str("id")?;
    let system_id = field_str("model_id")?;
    let summary_text = field_str("decoded")?;
    let annotations = obj
        .get("expert_annotations")
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::malformed(source, lineno, "missing array field 'expert_annotations'"))?;
    let mut coherence = Vec::with_capacity(annotations.len());
    for ann in annotations {
        let score = ann
            .get("coherence")
            .and_then(|v| v.as_f64())
            .ok_or_else(|| {
                Error::malformed(source, lineno, "expert annotation lacks numeric 'coherence'")
            })?;
        coherence.push(score);
    }
    Ok(SummaryRecord {
        doc_id: DocId(doc_id),
        system_id: SystemId(system_id),
        summary_text,
        coherence,
    })
}

/// Loads a prediction file (JSONL of `doc_id`, `system_id`, `score`).
pub fn load_predictions(path: &Path, measure_name: &str) -> Result<PredictionSet> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_predictions(&content, measure_name, &path.display().to_string())
}

pub fn parse_predictions(content: &str, measure_name: &str, source: &str) -> Result<PredictionSet> {
    let mut set = PredictionSet::new(measure_name);
    for (lineno, line) in content.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let parsed: PredictionLine = serde_json::from_str(trimmed)
            .map_err(|e| Error::malformed(source, lineno + 1, e.to_string()))?;
        if !parsed.score.is_finite() {
            return Err(Error::malformed(source, lineno + 1, "non-finite score"));
        }
        set.insert(parsed.doc_id, parsed.system_id, parsed.score)?;
    }
    if set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(set)
}

/// Collapses per-annotator scores into one human score per summary.
pub fn human_scores(dataset: &ScoreDataset, aggregation: Aggregation) -> Result<PredictionSet> {
    let name = match aggregation {
        Aggregation::Mean => "human-mean".to_owned(),
        Aggregation::Exclude(i) => {
            let n = dataset
                .aligned_annotators()
                .ok_or(Error::UnalignedAnnotators)?;
            if i >= n {
                return Err(Error::AnnotatorOutOfRange {
                    index: i,
                    n_annotators: n,
                });
            }
            if n < 2 {
                return Err(Error::TooFew {
                    what: "annotators",
                    needed: 2,
                    got: n,
                });
            }
            format!("human-excl{i}")
        }
    };
    let mut set = PredictionSet::new(name);
    for rec in dataset.records() {
        let score = match aggregation {
            Aggregation::Mean => mean(&rec.coherence),
            Aggregation::Exclude(i) => {
                let kept: Vec<f64> = rec
                    .coherence
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, &s)| s)
                    .collect();
                mean(&kept)
            }
        };
        set.insert(rec.doc_id.clone(), rec.system_id.clone(), score)?;
    }
    Ok(set)
}

/// Scores for a single annotator index; requires aligned annotator vectors.
pub fn annotator_scores(dataset: &ScoreDataset, index: usize) -> Result<PredictionSet> {
    let n = dataset
        .aligned_annotators()
        .ok_or(Error::UnalignedAnnotators)?;
    if index >= n {
        return Err(Error::AnnotatorOutOfRange {
            index,
            n_annotators: n,
        });
    }
    let mut set = PredictionSet::new(format!("annotator{index}"));
    for rec in dataset.records() {
        set.insert(rec.doc_id.clone(), rec.system_id.clone(), rec.coherence[index])?;
    }
    Ok(set)
}

/// Unweighted per-system mean of `scores` over each system's documents.
pub fn system_means(
    scores: &PredictionSet,
    dataset: &ScoreDataset,
) -> Result<BTreeMap<SystemId, f64>> {
    // Values are gathered in sorted-document order so this matches the mean
    // computed inside `stats::evaluate` bit for bit.
    let mut groups: BTreeMap<SystemId, BTreeMap<DocId, f64>> = BTreeMap::new();
    for rec in dataset.records() {
        let score = scores
            .get(&rec.doc_id, &rec.system_id)
            .ok_or_else(|| Error::MissingScore {
                doc: rec.doc_id.0.clone(),
                system: rec.system_id.0.clone(),
            })?;
        groups
            .entry(rec.system_id.clone())
            .or_default()
            .insert(rec.doc_id.clone(), score);
    }
    Ok(groups
        .into_iter()
        .map(|(sys, by_doc)| {
            let values: Vec<f64> = by_doc.into_values().collect();
            (sys, mean(&values))
        })
        .collect())
}

/// Mean centered on the first element, so the mean of a constant vector is
/// that constant exactly.
pub(crate) fn mean(values: &[f64]) -> f64 {
    let base = values[0];
    base + values.iter().map(|v| v - base).sum::<f64>() / values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn record(doc: &str, sys: &str, text: &str, scores: &[f64]) -> SummaryRecord {
        SummaryRecord {
            doc_id: doc.into(),
            system_id: sys.into(),
            summary_text: text.to_owned(),
            coherence: scores.to_vec(),
        }
    }

    pub(crate) fn small_dataset() -> ScoreDataset {
        ScoreDataset::from_records(
            vec![
                record("d1", "A", "One. Two.", &[4.0, 5.0, 4.0]),
                record("d2", "A", "Three.", &[3.0, 3.0, 3.0]),
                record("d1", "B", "Four.", &[2.0, 2.0, 2.0]),
                record("d2", "B", "Five.", &[4.0, 4.0, 4.0]),
            ],
            DEFAULT_SCORE_RANGE,
        )
        .unwrap()
    }

    #[test]
    fn canonical_line_maps_directly() {
        let line = r#"{"doc_id":"d1","system_id":"M1","summary_text":"A. B.","coherence":[4,5,4]}"#;
        let ds = parse_dataset(line, DatasetFormat::CanonicalJsonl, (1.0, 5.0), "test").unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.records()[0].coherence, vec![4.0, 5.0, 4.0]);
        assert_eq!(ds.records()[0].summary_text, "A. B.");
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let content = r#"{"doc_id":"d1","system_id":"M1","summary_text":"x","coherence":[4]}
{"doc_id":"d1","system_id":"M1","summary_text":"y","coherence":[5]}"#;
        let err = parse_dataset(content, DatasetFormat::CanonicalJsonl, (1.0, 5.0), "test")
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateKey { .. }));
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let err =
            parse_dataset("\n\n", DatasetFormat::CanonicalJsonl, (1.0, 5.0), "test").unwrap_err();
        assert!(matches!(err, Error::EmptyDataset));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let content = "{\"doc_id\":\"d1\",\"system_id\":\"M1\",\"summary_text\":\"x\",\"coherence\":[4]}\nnot json";
        let err = parse_dataset(content, DatasetFormat::CanonicalJsonl, (1.0, 5.0), "test")
            .unwrap_err();
        match err {
            Error::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn out_of_range_score_is_rejected() {
        let content = r#"{"doc_id":"d1","system_id":"M1","summary_text":"x","coherence":[6]}"#;
        let err = parse_dataset(content, DatasetFormat::CanonicalJsonl, (1.0, 5.0), "test")
            .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn summeval_adapter_extracts_coherence() {
        let line = r#"{"id":"cnn-1","model_id":"M17","decoded":"The summary.","expert_annotations":[{"coherence":4,"fluency":5},{"coherence":5,"fluency":5},{"coherence":4,"fluency":4}],"turker_annotations":[]}"#;
        let ds = parse_dataset(line, DatasetFormat::SummevalExpert, (1.0, 5.0), "test").unwrap();
        assert_eq!(ds.records()[0].coherence, vec![4.0, 5.0, 4.0]);
        assert_eq!(ds.records()[0].system_id, SystemId("M17".into()));
        assert_eq!(ds.records()[0].summary_text, "The summary.");
    }

    #[test]
    fn nfc_normalization_applies_at_load() {
        // "e" + combining acute vs precomposed é
        let decomposed = "Cafe\u{0301}.";
        let ds = ScoreDataset::from_records(
            vec![record("d1", "A", decomposed, &[3.0])],
            DEFAULT_SCORE_RANGE,
        )
        .unwrap();
        assert_eq!(ds.records()[0].summary_text, "Caf\u{00e9}.");
    }

    #[test]
    fn round_trip_is_identity() {
        let ds = small_dataset();
        let jsonl = ds.to_canonical_jsonl();
        let again =
            parse_dataset(&jsonl, DatasetFormat::CanonicalJsonl, ds.score_range(), "test").unwrap();
        assert_eq!(ds, again);
        assert_eq!(jsonl, again.to_canonical_jsonl());
    }

    #[test]
    fn human_mean_examples() {
        let ds = small_dataset();
        let h = human_scores(&ds, Aggregation::Mean).unwrap();
        assert_abs_diff_eq!(
            h.get(&"d1".into(), &"A".into()).unwrap(),
            13.0 / 3.0,
            epsilon = 1e-12
        );
        let excl = human_scores(&ds, Aggregation::Exclude(1)).unwrap();
        assert_abs_diff_eq!(excl.get(&"d1".into(), &"A".into()).unwrap(), 4.0);
    }

    #[test]
    fn single_annotator_mean() {
        let ds = ScoreDataset::from_records(
            vec![record("d1", "A", "x", &[3.0])],
            DEFAULT_SCORE_RANGE,
        )
        .unwrap();
        let h = human_scores(&ds, Aggregation::Mean).unwrap();
        assert_abs_diff_eq!(h.get(&"d1".into(), &"A".into()).unwrap(), 3.0);
    }

    #[test]
    fn exclude_out_of_range_errors() {
        let ds = small_dataset();
        let err = human_scores(&ds, Aggregation::Exclude(3)).unwrap_err();
        assert!(matches!(err, Error::AnnotatorOutOfRange { .. }));
    }

    #[test]
    fn mean_is_annotator_order_invariant() {
        let a = ScoreDataset::from_records(
            vec![record("d1", "A", "x", &[4.0, 5.0, 1.0])],
            DEFAULT_SCORE_RANGE,
        )
        .unwrap();
        let b = ScoreDataset::from_records(
            vec![record("d1", "A", "x", &[1.0, 4.0, 5.0])],
            DEFAULT_SCORE_RANGE,
        )
        .unwrap();
        let ha = human_scores(&a, Aggregation::Mean).unwrap();
        let hb = human_scores(&b, Aggregation::Mean).unwrap();
        assert_abs_diff_eq!(
            ha.get(&"d1".into(), &"A".into()).unwrap(),
            hb.get(&"d1".into(), &"A".into()).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn system_means_examples() {
        let ds = small_dataset();
        let h = human_scores(&ds, Aggregation::Mean).unwrap();
        let means = system_means(&h, &ds).unwrap();
        // A: mean(13/3, 3) ; B: mean(2, 4)
        assert_abs_diff_eq!(means[&"A".into()], (13.0 / 3.0 + 3.0) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(means[&"B".into()], 3.0);
    }

    #[test]
    fn system_means_constant_predictions() {
        let ds = small_dataset();
        let h = human_scores(&ds, Aggregation::Mean).unwrap();
        let constant = h.map_scores(|_| 0.5);
        let means = system_means(&constant, &ds).unwrap();
        assert!(means.values().all(|&m| m == 0.5));
    }

    #[test]
    fn system_means_missing_entry_errors() {
        let ds = small_dataset();
        let mut partial = PredictionSet::new("partial");
        partial.insert("d1".into(), "A".into(), 1.0).unwrap();
        let err = system_means(&partial, &ds).unwrap_err();
        assert!(matches!(err, Error::MissingScore { .. }));
    }

    #[test]
    fn prediction_round_trip() {
        let ds = small_dataset();
        let h = human_scores(&ds, Aggregation::Mean).unwrap();
        let jsonl = h.to_jsonl();
        let again = parse_predictions(&jsonl, "human-mean", "test").unwrap();
        assert_eq!(h, again);
    }

    #[test]
    fn prediction_duplicate_rejected() {
        let content = r#"{"doc_id":"d1","system_id":"A","score":1.0}
{"doc_id":"d1","system_id":"A","score":2.0}"#;
        let err = parse_predictions(content, "m", "test").unwrap_err();
        assert!(matches!(err, Error::DuplicateKey { .. }));
    }

    #[test]
    fn complete_grid_detection() {
        let ds = small_dataset();
        let h = human_scores(&ds, Aggregation::Mean).unwrap();
        assert!(h.is_complete_grid());
        let mut partial = PredictionSet::new("p");
        partial.insert("d1".into(), "A".into(), 1.0).unwrap();
        partial.insert("d2".into(), "B".into(), 1.0).unwrap();
        assert!(!partial.is_complete_grid());
    }
}
