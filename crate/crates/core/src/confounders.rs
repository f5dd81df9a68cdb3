//! System-level confounder predictors, the upper-bound and human baselines,
//! noise randomization, and the confounder report.
//!
//! The confounders assign scores that carry no coherence signal yet rank
//! systems well: uppercase-letter counts, membership in a system subset,
//! the producing system's mean human score (the upper bound), or seeded
//! uniform noise. Randomized variants add small noise to break ties without
//! disturbing strict orderings.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use unicode_properties::{GeneralCategory, UnicodeGeneralCategory};

use crate::data::{
    self, human_scores, system_means, Aggregation, ComparisonLevel, PredictionSet, ScoreDataset,
    SystemId,
};
use crate::error::{Error, Result};
use crate::report::{Cell, Table};
use crate::seeds;
use crate::stats::{self, MetricValue, Statistic, UndefinedPolicy};

/// A predictor that exploits system identity rather than coherence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfounderKind {
    /// Number of uppercase letters (Unicode category Lu) in the summary.
    Capitalization,
    /// 1 for summaries from the given systems, 0 otherwise.
    Indicator(BTreeSet<SystemId>),
    /// The mean human score of the producing system.
    UpperBound,
    /// Seeded i.i.d. uniform(0, 1) per summary.
    RandomUniform,
}

/// Default noise width; strictly below the smallest nonzero gap of
/// integer-valued confounder scores and of five-point human means.
pub const DEFAULT_EPSILON: f64 = 1e-6;

fn uppercase_count(text: &str) -> usize {
    text.chars()
        .filter(|c| c.general_category() == GeneralCategory::UppercaseLetter)
        .count()
}

/// Builds the confounder prediction set for a dataset.
pub fn confounder_scores(
    dataset: &ScoreDataset,
    kind: &ConfounderKind,
    seed: u64,
) -> Result<PredictionSet> {
    let mut set = PredictionSet::new(match kind {
        ConfounderKind::Capitalization => "capitalization",
        ConfounderKind::Indicator(_) => "architecture",
        ConfounderKind::UpperBound => "upper-bound",
        ConfounderKind::RandomUniform => "random",
    });
    match kind {
        ConfounderKind::Capitalization => {
            for rec in dataset.records() {
                if rec.summary_text.is_empty() {
                    return Err(Error::InvalidArgument(format!(
                        "record ({}, {}) has no summary text",
                        rec.doc_id, rec.system_id
                    )));
                }
                set.insert(
                    rec.doc_id.clone(),
                    rec.system_id.clone(),
                    uppercase_count(&rec.summary_text) as f64,
                )?;
            }
        }
        ConfounderKind::Indicator(subset) => {
            if subset.is_empty() {
                return Err(Error::InvalidArgument("indicator subset is empty".into()));
            }
            for sys in subset {
                if !dataset.systems().contains(sys) {
                    return Err(Error::InvalidArgument(format!(
                        "indicator subset names unknown system {sys}"
                    )));
                }
            }
            for rec in dataset.records() {
                let v = if subset.contains(&rec.system_id) { 1.0 } else { 0.0 };
                set.insert(rec.doc_id.clone(), rec.system_id.clone(), v)?;
            }
        }
        ConfounderKind::UpperBound => {
            let human = human_scores(dataset, Aggregation::Mean)?;
            let means = system_means(&human, dataset)?;
            for rec in dataset.records() {
                set.insert(rec.doc_id.clone(), rec.system_id.clone(), means[&rec.system_id])?;
            }
        }
        ConfounderKind::RandomUniform => {
            for rec in dataset.records() {
                let mut rng = per_key_rng(seed, "random-uniform", &rec.doc_id.0, &rec.system_id.0);
                set.insert(rec.doc_id.clone(), rec.system_id.clone(), rng.gen::<f64>())?;
            }
        }
    }
    Ok(set)
}

/// Per-key RNG stream; independent of iteration order.
fn per_key_rng(seed: u64, label: &str, doc: &str, system: &str) -> rand_chacha::ChaCha8Rng {
    seeds::rng_for(seed, &format!("{label}\u{1f}{doc}\u{1f}{system}"), 0)
}

/// Adds i.i.d. uniform(0, epsilon) noise to every score. With epsilon below
/// the smallest nonzero score gap this breaks all ties while preserving
/// strict orderings.
pub fn randomize(pred: &PredictionSet, epsilon: f64, seed: u64) -> Result<PredictionSet> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be a positive real, got {epsilon}"
        )));
    }
    let mut out = PredictionSet::new(format!("{}(r)", pred.measure_name()));
    for ((doc, system), score) in pred.iter() {
        let mut rng = per_key_rng(seed, "noise", &doc.0, &system.0);
        out.insert(doc.clone(), system.clone(), score + rng.gen::<f64>() * epsilon)?;
    }
    Ok(out)
}

/// The five evaluation metrics in report-row order.
pub const METRIC_ROWS: [(&str, ComparisonLevel, Statistic); 5] = [
    ("tau_sys", ComparisonLevel::System, Statistic::Tau),
    ("tau_sum", ComparisonLevel::Summary, Statistic::Tau),
    ("tau_pair", ComparisonLevel::Pairwise, Statistic::Tau),
    ("acc_pair", ComparisonLevel::Pairwise, Statistic::Accuracy),
    ("tau_intra", ComparisonLevel::Intra, Statistic::Tau),
];

fn metric_row(
    human: &PredictionSet,
    pred: &PredictionSet,
    policy: UndefinedPolicy,
) -> Result<Vec<MetricValue>> {
    METRIC_ROWS
        .iter()
        .map(|&(_, level, statistic)| {
            stats::evaluate(human, pred, level, statistic, policy).map(|r| r.value)
        })
        .collect()
}

/// One column of the confounder report.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfounderColumn {
    pub name: String,
    /// Values in [`METRIC_ROWS`] order.
    pub values: Vec<MetricValue>,
}

/// The confounder report: deterministic and noise-randomized columns for
/// capitalization, the architecture indicator, and the upper bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfounderReport {
    pub columns: Vec<ConfounderColumn>,
    pub n_runs: usize,
}

/// Mean of the per-run metric values over `n_runs` randomized variants.
fn randomized_column(
    human: &PredictionSet,
    pred: &PredictionSet,
    label: &str,
    n_runs: usize,
    seed: u64,
    epsilon: f64,
    policy: UndefinedPolicy,
) -> Result<Vec<MetricValue>> {
    let per_run: Vec<Vec<MetricValue>> = (0..n_runs)
        .into_par_iter()
        .map(|run| {
            let run_seed = seeds::derive_seed(seed, label, run as u64);
            let noisy = randomize(pred, epsilon, run_seed)?;
            metric_row(human, &noisy, policy)
        })
        .collect::<Result<_>>()?;
    Ok((0..METRIC_ROWS.len())
        .map(|i| {
            let defined: Vec<f64> = per_run.iter().filter_map(|row| row[i].value()).collect();
            if defined.is_empty() {
                MetricValue::Undefined
            } else {
                MetricValue::Defined(data::mean(&defined))
            }
        })
        .collect())
}

/// Computes the confounder report. `architecture` names the systems that
/// receive the indicator score of 1.
pub fn confounder_report(
    dataset: &ScoreDataset,
    architecture: &BTreeSet<SystemId>,
    n_runs: usize,
    seed: u64,
    epsilon: f64,
) -> Result<ConfounderReport> {
    if dataset.systems().len() < 2 {
        return Err(Error::TooFew {
            what: "systems",
            needed: 2,
            got: dataset.systems().len(),
        });
    }
    let policy = UndefinedPolicy::Propagate;
    let human = human_scores(dataset, Aggregation::Mean)?;
    let predictors = [
        ("Cap", ConfounderKind::Capitalization),
        ("Arch", ConfounderKind::Indicator(architecture.clone())),
        ("UB", ConfounderKind::UpperBound),
    ];
    let mut columns = Vec::new();
    for (name, kind) in predictors {
        let pred = confounder_scores(dataset, &kind, seed)?;
        columns.push(ConfounderColumn {
            name: name.to_owned(),
            values: metric_row(&human, &pred, policy)?,
        });
        let label = format!("{name}-noise");
        columns.push(ConfounderColumn {
            name: format!("{name} (r)"),
            values: randomized_column(&human, &pred, &label, n_runs, seed, epsilon, policy)?,
        });
    }
    Ok(ConfounderReport { columns, n_runs })
}

impl ConfounderReport {
    pub fn to_table(&self) -> Table {
        let mut header = vec!["metric".to_owned()];
        header.extend(self.columns.iter().map(|c| c.name.clone()));
        let mut table = Table::new(header);
        for (i, &(name, _, _)) in METRIC_ROWS.iter().enumerate() {
            let mut row: Vec<Cell> = vec![name.into()];
            for col in &self.columns {
                row.push(match col.values[i] {
                    MetricValue::Defined(v) => Cell::num2(v),
                    MetricValue::Undefined => Cell::Undefined,
                });
            }
            table.row(row);
        }
        table
    }
}

/// The human-baseline selection: the annotator with the worst summary-level
/// correlation against the mean of the remaining annotators.
#[derive(Debug, Clone)]
pub struct HumanBaseline {
    pub pred: PredictionSet,
    pub target: PredictionSet,
    pub selected_annotator: usize,
    /// Correlation of each annotator against the rest, by index.
    pub correlations: Vec<MetricValue>,
}

/// Selects the annotator minimizing summary-level tau-b against the mean of
/// the remaining annotators. An undefined correlation (constant scores)
/// sorts below every defined one; ties break toward the lowest index.
pub fn human_baseline(dataset: &ScoreDataset) -> Result<HumanBaseline> {
    let n = dataset
        .aligned_annotators()
        .ok_or(Error::UnalignedAnnotators)?;
    if n < 2 {
        return Err(Error::TooFew {
            what: "annotators",
            needed: 2,
            got: n,
        });
    }
    let mut correlations = Vec::with_capacity(n);
    for a in 0..n {
        let pred = data::annotator_scores(dataset, a)?;
        let target = human_scores(dataset, Aggregation::Exclude(a))?;
        let x: Vec<f64> = pred.iter().map(|(_, v)| v).collect();
        let y: Vec<f64> = target.iter().map(|(_, v)| v).collect();
        correlations.push(stats::kendall_tau_b(&x, &y)?);
    }
    let selected = (0..n)
        .min_by(|&a, &b| {
            let key = |v: MetricValue| v.value().unwrap_or(f64::NEG_INFINITY);
            key(correlations[a])
                .partial_cmp(&key(correlations[b]))
                .expect("finite keys")
        })
        .expect("at least two annotators");
    Ok(HumanBaseline {
        pred: data::annotator_scores(dataset, selected)?.with_name("human-baseline"),
        target: human_scores(dataset, Aggregation::Exclude(selected))?,
        selected_annotator: selected,
        correlations,
    })
}
