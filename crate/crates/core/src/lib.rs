//! Meta-evaluation toolkit for summary coherence measures.
//!
//! The crate scores coherence-measure predictions against human coherence
//! annotations at four comparison levels (system, summary, pairwise,
//! intra-system), detects system-level confounders, and ships the diagnostic
//! harnesses used alongside them: bias matrices, sentence-shuffle tests,
//! entity-graph scoring and entity-overlap statistics, component ablation,
//! and a seeded synthetic dataset generator.

pub mod ablation;
pub mod bias;
pub mod confounders;
pub mod data;
pub mod error;
pub mod measures;
pub mod report;
pub mod seeds;
pub mod shuffle;
pub mod stats;
pub mod synth;

pub use data::{
    ComparisonLevel, DocId, PredictionSet, ScoreDataset, SummaryRecord, SystemId,
};
pub use error::{Error, Result};
pub use stats::{MetricResult, MetricValue, Statistic, UndefinedPolicy};
