//! Rank statistics: Kendall tau-b, pairwise accuracy, the four
//! comparison-level evaluation metrics, and bootstrap confidence intervals.
//!
//! Tau-b is `(C - D) / sqrt((n0 - n1)(n0 - n2))` where `n0 = n(n-1)/2` and
//! `n1`/`n2` count tied pairs within each vector. It is undefined when either
//! vector is fully tied. Pairwise accuracy is the tau computation restricted
//! to pairs with distinct human scores, shifted from `[-1, 1]` to `[0, 1]`;
//! tied predictions on those pairs count as incorrect.

use rayon::prelude::*;

use crate::data::{ComparisonLevel, PredictionSet};
use crate::error::{Error, Result};
use crate::seeds;
use rand::Rng;

/// A metric value that may be undefined (fully tied input).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricValue {
    Defined(f64),
    Undefined,
}

impl MetricValue {
    pub fn value(self) -> Option<f64> {
        match self {
            MetricValue::Defined(v) => Some(v),
            MetricValue::Undefined => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, MetricValue::Defined(_))
    }

    /// Unwraps a defined value; panics on undefined.
    pub fn unwrap(self) -> f64 {
        self.value().expect("metric value is undefined")
    }
}

/// Which statistic to aggregate over the comparison set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Tau,
    Accuracy,
}

/// How per-group undefined values fold into the aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UndefinedPolicy {
    /// Any undefined group makes the aggregate undefined.
    #[default]
    Propagate,
    /// Undefined groups are dropped; undefined only if every group is.
    SkipUndefinedGroups,
}

/// Tie handling for pairwise accuracy. Both fields have a single admissible
/// value; the type exists to pin the contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TiePolicy {
    /// Tied predictions on a human-distinct pair count as incorrect.
    pub accuracy_tie: AccuracyTie,
    /// Pairs with tied human scores are excluded from the denominator.
    pub human_tie: HumanTie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AccuracyTie {
    #[default]
    Incorrect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HumanTie {
    #[default]
    ExcludePair,
}

/// An evaluation metric value with its comparison level and unit count.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricResult {
    pub level: ComparisonLevel,
    pub value: MetricValue,
    pub ci: Option<(f64, f64)>,
    /// Systems (system/intra), documents (pairwise) or summaries (summary)
    /// that contributed.
    pub n_units: usize,
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::TooFew {
            what: "observations",
            needed: 2,
            got: x.len(),
        });
    }
    if !x.iter().chain(y.iter()).all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite observation".into()));
    }
    Ok(())
}

/// Kendall tau-b of two equal-length vectors, or undefined when either
/// vector is fully tied.
///
/// Sort-based `O(n log n)`: sort by `(x, y)`, count tied pairs in runs, then
/// count discordant pairs as merge-sort inversions over `y`.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<MetricValue> {
    check_lengths(x, y)?;
    let n = x.len();

    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.partial_cmp(b).expect("finite values have total order"));

    let pair_count = |run: i64| run * (run - 1) / 2;

    // Tied pairs within x, and within both, from runs of the (x, y) sort.
    let mut tied_x: i64 = 0;
    let mut tied_xy: i64 = 0;
    let mut run_x: i64 = 1;
    let mut run_xy: i64 = 1;
    for i in 1..n {
        if pairs[i].0 == pairs[i - 1].0 {
            run_x += 1;
            if pairs[i].1 == pairs[i - 1].1 {
                run_xy += 1;
            } else {
                tied_xy += pair_count(run_xy);
                run_xy = 1;
            }
        } else {
            tied_x += pair_count(run_x);
            tied_xy += pair_count(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    tied_x += pair_count(run_x);
    tied_xy += pair_count(run_xy);

    // Discordant pairs: inversions in y once sorted by (x, y). Within an
    // x-run the ys are ascending, so only strictly-x-ordered pairs count.
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let discordant = count_inversions(&mut ys) as i64;

    // ys is now fully sorted; count tied pairs within y from its runs.
    let mut tied_y: i64 = 0;
    let mut run_y: i64 = 1;
    for i in 1..n {
        if ys[i] == ys[i - 1] {
            run_y += 1;
        } else {
            tied_y += pair_count(run_y);
            run_y = 1;
        }
    }
    tied_y += pair_count(run_y);

    let n0 = pair_count(n as i64);
    if tied_x == n0 || tied_y == n0 {
        return Ok(MetricValue::Undefined);
    }
    let c_minus_d = n0 - tied_x - tied_y + tied_xy - 2 * discordant;
    let denom = (((n0 - tied_x) as f64) * ((n0 - tied_y) as f64)).sqrt();
    let tau = (c_minus_d as f64) / denom;
    Ok(MetricValue::Defined(tau.clamp(-1.0, 1.0)))
}

/// Counts inversions (strict descents across positions) while sorting `v`.
fn count_inversions(v: &mut [f64]) -> u64 {
    let n = v.len();
    let mut buf = v.to_vec();
    let mut inversions = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = usize::min(start + width, n);
            let end = usize::min(start + 2 * width, n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid || j < end {
                if i < mid && (j >= end || v[i] <= v[j]) {
                    buf[k] = v[i];
                    i += 1;
                } else {
                    inversions += (mid - i) as u64;
                    buf[k] = v[j];
                    j += 1;
                }
                k += 1;
            }
            v[start..end].copy_from_slice(&buf[start..end]);
            start = end;
        }
        width *= 2;
    }
    inversions
}

/// Fraction of human-distinct index pairs the predictions order the same
/// way. Internally the signed fraction `(correct - incorrect) / total` is
/// computed and shifted to `[0, 1]`, so with no ties anywhere the result
/// equals `(tau_b + 1) / 2` bit-for-bit. Undefined when every human pair is
/// tied.
pub fn pairwise_accuracy(human: &[f64], pred: &[f64], _policy: TiePolicy) -> Result<MetricValue> {
    check_lengths(human, pred)?;
    let n = human.len();
    let mut total: i64 = 0;
    let mut net: i64 = 0; // correct minus incorrect
    for i in 0..n {
        for j in (i + 1)..n {
            if human[i] == human[j] {
                continue;
            }
            total += 1;
            let concordant = pred[i] != pred[j] && ((pred[i] < pred[j]) == (human[i] < human[j]));
            net += if concordant { 1 } else { -1 };
        }
    }
    if total == 0 {
        return Ok(MetricValue::Undefined);
    }
    let frac = net as f64 / total as f64;
    Ok(MetricValue::Defined((frac + 1.0) / 2.0))
}

/// Score grid, systems x documents, shared by evaluate and the bootstrap.
struct Grid {
    /// `values[s][d]` for sorted systems s and sorted documents d.
    values: Vec<Vec<f64>>,
}

impl Grid {
    fn n_systems(&self) -> usize {
        self.values.len()
    }

    fn n_documents(&self) -> usize {
        self.values[0].len()
    }

    fn system_means(&self) -> Vec<f64> {
        self.values.iter().map(|row| crate::data::mean(row)).collect()
    }

    fn document_column(&self, d: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[d]).collect()
    }
}

fn build_grids(human: &PredictionSet, pred: &PredictionSet) -> Result<(Grid, Grid)> {
    if !human.same_keys(pred) {
        return Err(Error::Coverage(format!(
            "prediction set '{}' does not cover the same (document, system) keys as '{}'",
            pred.measure_name(),
            human.measure_name()
        )));
    }
    if !human.is_complete_grid() {
        return Err(Error::Coverage(
            "score keys do not form a complete documents x systems grid".into(),
        ));
    }
    let docs = human.documents();
    let systems = human.systems();
    let collect = |set: &PredictionSet| Grid {
        values: systems
            .iter()
            .map(|s| {
                docs.iter()
                    .map(|d| set.get(d, s).expect("complete grid"))
                    .collect()
            })
            .collect(),
    };
    Ok((collect(human), collect(pred)))
}

fn aggregate_groups(groups: &[MetricValue], policy: UndefinedPolicy) -> MetricValue {
    match policy {
        UndefinedPolicy::Propagate => {
            if groups.iter().any(|g| !g.is_defined()) {
                return MetricValue::Undefined;
            }
            let sum: f64 = groups.iter().map(|g| g.unwrap()).sum();
            MetricValue::Defined(sum / groups.len() as f64)
        }
        UndefinedPolicy::SkipUndefinedGroups => {
            let defined: Vec<f64> = groups.iter().filter_map(|g| g.value()).collect();
            if defined.is_empty() {
                MetricValue::Undefined
            } else {
                MetricValue::Defined(defined.iter().sum::<f64>() / defined.len() as f64)
            }
        }
    }
}

fn statistic_of(x: &[f64], y: &[f64], statistic: Statistic) -> Result<MetricValue> {
    match statistic {
        Statistic::Tau => kendall_tau_b(x, y),
        Statistic::Accuracy => pairwise_accuracy(x, y, TiePolicy::default()),
    }
}

fn evaluate_grids(
    human: &Grid,
    pred: &Grid,
    level: ComparisonLevel,
    statistic: Statistic,
    policy: UndefinedPolicy,
) -> Result<MetricValue> {
    match level {
        ComparisonLevel::System => {
            kendall_tau_b(&human.system_means(), &pred.system_means())
        }
        ComparisonLevel::Summary => {
            let flat = |g: &Grid| -> Vec<f64> {
                g.values.iter().flat_map(|row| row.iter().copied()).collect()
            };
            kendall_tau_b(&flat(human), &flat(pred))
        }
        ComparisonLevel::Pairwise => {
            let groups: Vec<MetricValue> = (0..human.n_documents())
                .map(|d| statistic_of(&human.document_column(d), &pred.document_column(d), statistic))
                .collect::<Result<_>>()?;
            Ok(aggregate_groups(&groups, policy))
        }
        ComparisonLevel::Intra => {
            let groups: Vec<MetricValue> = human
                .values
                .iter()
                .zip(&pred.values)
                .map(|(h, p)| kendall_tau_b(h, p))
                .collect::<Result<_>>()?;
            Ok(aggregate_groups(&groups, policy))
        }
    }
}

fn check_level_sizes(grid: &Grid, level: ComparisonLevel, statistic: Statistic) -> Result<usize> {
    if statistic == Statistic::Accuracy && level != ComparisonLevel::Pairwise {
        return Err(Error::InvalidArgument(
            "accuracy is only defined at the pairwise level".into(),
        ));
    }
    let (n_sys, n_doc) = (grid.n_systems(), grid.n_documents());
    match level {
        ComparisonLevel::System | ComparisonLevel::Pairwise => {
            if n_sys < 2 {
                return Err(Error::TooFew {
                    what: "systems",
                    needed: 2,
                    got: n_sys,
                });
            }
        }
        ComparisonLevel::Intra => {
            if n_doc < 2 {
                return Err(Error::TooFew {
                    what: "documents",
                    needed: 2,
                    got: n_doc,
                });
            }
        }
        ComparisonLevel::Summary => {
            if n_sys * n_doc < 2 {
                return Err(Error::TooFew {
                    what: "summaries",
                    needed: 2,
                    got: n_sys * n_doc,
                });
            }
        }
    }
    Ok(match level {
        ComparisonLevel::System | ComparisonLevel::Intra => n_sys,
        ComparisonLevel::Summary => n_sys * n_doc,
        ComparisonLevel::Pairwise => n_doc,
    })
}

/// Scores `pred` against `human` at a comparison level.
///
/// system: tau-b over per-system means. summary: tau-b over all summaries
/// jointly. pairwise: unweighted mean over documents of the per-document
/// statistic across systems. intra: unweighted mean over systems of the
/// per-system tau-b across documents.
pub fn evaluate(
    human: &PredictionSet,
    pred: &PredictionSet,
    level: ComparisonLevel,
    statistic: Statistic,
    policy: UndefinedPolicy,
) -> Result<MetricResult> {
    let (hg, pg) = build_grids(human, pred)?;
    let n_units = check_level_sizes(&hg, level, statistic)?;
    let value = evaluate_grids(&hg, &pg, level, statistic, policy)?;
    Ok(MetricResult {
        level,
        value,
        ci: None,
        n_units,
    })
}

/// What the bootstrap redraws with replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResampleStrategy {
    /// Redraw systems; all documents kept.
    Systems,
    /// Redraw documents; all systems kept.
    Documents,
    /// Redraw documents independently within each system (intra only).
    DocumentsWithinSystems,
}

impl ResampleStrategy {
    /// The default unit per comparison level: systems at the system level,
    /// documents at summary/pairwise, documents within each system at intra.
    pub fn default_for(level: ComparisonLevel) -> ResampleStrategy {
        match level {
            ComparisonLevel::System => ResampleStrategy::Systems,
            ComparisonLevel::Summary | ComparisonLevel::Pairwise => ResampleStrategy::Documents,
            ComparisonLevel::Intra => ResampleStrategy::DocumentsWithinSystems,
        }
    }
}

/// A percentile bootstrap interval; undefined resample statistics are
/// discarded and reported in `n_discarded`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapCi {
    pub lo: f64,
    pub hi: f64,
    pub n_discarded: usize,
}

fn resample_grid(grid: &Grid, strategy: ResampleStrategy, picks: &ResamplePicks) -> Grid {
    let values = match (strategy, picks) {
        (ResampleStrategy::Systems, ResamplePicks::Systems(sys)) => {
            sys.iter().map(|&s| grid.values[s].clone()).collect()
        }
        (ResampleStrategy::Documents, ResamplePicks::Documents(docs)) => grid
            .values
            .iter()
            .map(|row| docs.iter().map(|&d| row[d]).collect())
            .collect(),
        (ResampleStrategy::DocumentsWithinSystems, ResamplePicks::PerSystem(per)) => grid
            .values
            .iter()
            .zip(per)
            .map(|(row, docs)| docs.iter().map(|&d| row[d]).collect())
            .collect(),
        _ => unreachable!("picks match strategy"),
    };
    Grid { values }
}

enum ResamplePicks {
    Systems(Vec<usize>),
    Documents(Vec<usize>),
    PerSystem(Vec<Vec<usize>>),
}

fn draw_picks(
    strategy: ResampleStrategy,
    n_systems: usize,
    n_documents: usize,
    rng: &mut impl Rng,
) -> ResamplePicks {
    match strategy {
        ResampleStrategy::Systems => {
            ResamplePicks::Systems((0..n_systems).map(|_| rng.gen_range(0..n_systems)).collect())
        }
        ResampleStrategy::Documents => ResamplePicks::Documents(
            (0..n_documents).map(|_| rng.gen_range(0..n_documents)).collect(),
        ),
        ResampleStrategy::DocumentsWithinSystems => ResamplePicks::PerSystem(
            (0..n_systems)
                .map(|_| (0..n_documents).map(|_| rng.gen_range(0..n_documents)).collect())
                .collect(),
        ),
    }
}

/// 95% percentile bootstrap interval for `evaluate` under seeded resampling.
/// Resample `r` draws from the stream `(seed, "bootstrap", r)`, so results
/// are identical regardless of scheduling.
#[allow(clippy::too_many_arguments)]
pub fn bootstrap_ci(
    human: &PredictionSet,
    pred: &PredictionSet,
    level: ComparisonLevel,
    statistic: Statistic,
    policy: UndefinedPolicy,
    n_resamples: usize,
    seed: u64,
    strategy: ResampleStrategy,
) -> Result<BootstrapCi> {
    if n_resamples == 0 {
        return Err(Error::InvalidArgument("n_resamples must be positive".into()));
    }
    if strategy == ResampleStrategy::DocumentsWithinSystems && level != ComparisonLevel::Intra {
        return Err(Error::InvalidArgument(
            "per-system document resampling only applies to the intra level".into(),
        ));
    }
    let (hg, pg) = build_grids(human, pred)?;
    check_level_sizes(&hg, level, statistic)?;

    let stats: Vec<MetricValue> = (0..n_resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeds::rng_for(seed, "bootstrap", r as u64);
            let picks = draw_picks(strategy, hg.n_systems(), hg.n_documents(), &mut rng);
            let h = resample_grid(&hg, strategy, &picks);
            let p = resample_grid(&pg, strategy, &picks);
            evaluate_grids(&h, &p, level, statistic, policy)
        })
        .collect::<Result<_>>()?;

    let mut defined: Vec<f64> = stats.iter().filter_map(|v| v.value()).collect();
    let n_discarded = stats.len() - defined.len();
    if defined.is_empty() {
        return Err(Error::AllResamplesUndefined);
    }
    defined.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok(BootstrapCi {
        lo: percentile(&defined, 0.025),
        hi: percentile(&defined, 0.975),
        n_discarded,
    })
}

/// Linear-interpolation percentile of a sorted slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}
