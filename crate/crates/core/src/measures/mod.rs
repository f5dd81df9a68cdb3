//! Built-in reference-free coherence measures operable at desk scale: the
//! entity graph over entity grids, grid ingestion and heuristic detection,
//! entity-overlap corpus statistics, and the random baseline.

mod detect;
mod grid;

pub use detect::{detect_entities, detect_entities_in_text, split_sentences, tokenize, STOPWORDS};
pub use grid::{parse_entity_grid, EntityGrid, Role};

use crate::confounders::{confounder_scores, ConfounderKind};
use crate::data::{PredictionSet, ScoreDataset};
use crate::error::{Error, Result};

/// Edge weighting for the sentence projection of an entity grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// 1 for any sentence pair sharing an entity.
    Unweighted,
    /// Number of shared entities.
    SharedCount,
    /// Sum over shared entities of the product of the two role weights.
    RoleProduct,
}

/// Entity-graph configuration. Role weights must be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntityGraphConfig {
    pub weighting: Weighting,
    pub distance_penalty: bool,
    pub subject_weight: f64,
    pub object_weight: f64,
    pub other_weight: f64,
}

impl Default for EntityGraphConfig {
    /// The accumulated role-product projection with distance penalty and
    /// weights S=3, O=2, X=1.
    fn default() -> Self {
        EntityGraphConfig {
            weighting: Weighting::RoleProduct,
            distance_penalty: true,
            subject_weight: 3.0,
            object_weight: 2.0,
            other_weight: 1.0,
        }
    }
}

impl EntityGraphConfig {
    fn role_weight(&self, role: Role) -> f64 {
        match role {
            Role::Subject => self.subject_weight,
            Role::Object => self.object_weight,
            Role::Other => self.other_weight,
            Role::Absent => 0.0,
        }
    }
}

/// Average sentence outdegree in the directed forward projection of the
/// grid: sentences `i < j` sharing at least one entity are connected with
/// the configured weight, divided by `j - i` when the distance penalty is
/// on. Single-sentence and overlap-free grids score 0.
pub fn entity_graph_score(grid: &EntityGrid, config: &EntityGraphConfig) -> f64 {
    debug_assert!(
        config.subject_weight > 0.0 && config.object_weight > 0.0 && config.other_weight > 0.0,
        "role weights must be positive"
    );
    let n = grid.n_sentences();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut weight = 0.0;
            let mut shared = false;
            for e in 0..grid.n_entities() {
                let (ri, rj) = (grid.role(e, i), grid.role(e, j));
                if !(ri.is_present() && rj.is_present()) {
                    continue;
                }
                shared = true;
                match config.weighting {
                    Weighting::Unweighted => {}
                    Weighting::SharedCount => weight += 1.0,
                    Weighting::RoleProduct => {
                        weight += config.role_weight(ri) * config.role_weight(rj)
                    }
                }
            }
            if !shared {
                continue;
            }
            if config.weighting == Weighting::Unweighted {
                weight = 1.0;
            }
            if config.distance_penalty {
                weight /= (j - i) as f64;
            }
            total += weight;
        }
    }
    total / n as f64
}

/// Corpus entity-overlap statistics over the unweighted projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapStats {
    /// Fraction of documents whose projection has no edges at all.
    pub prop_docs_no_overlap: f64,
    /// Mean over documents of the fraction of sentences with no incident
    /// edge in either direction.
    pub avg_ratio_unlinked_sentences: f64,
}

pub fn entity_overlap_stats(grids: &[EntityGrid]) -> Result<OverlapStats> {
    if grids.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut docs_without_overlap = 0usize;
    let mut unlinked_ratio_sum = 0.0;
    for grid in grids {
        let n = grid.n_sentences();
        let mut linked = vec![false; n];
        let mut any_edge = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let shares = (0..grid.n_entities())
                    .any(|e| grid.role(e, i).is_present() && grid.role(e, j).is_present());
                if shares {
                    linked[i] = true;
                    linked[j] = true;
                    any_edge = true;
                }
            }
        }
        if !any_edge {
            docs_without_overlap += 1;
        }
        let unlinked = linked.iter().filter(|&&l| !l).count();
        unlinked_ratio_sum += unlinked as f64 / n as f64;
    }
    let n_docs = grids.len() as f64;
    Ok(OverlapStats {
        prop_docs_no_overlap: docs_without_overlap as f64 / n_docs,
        avg_ratio_unlinked_sentences: unlinked_ratio_sum / n_docs,
    })
}

/// The random baseline: seeded uniform(0, 1) per summary.
pub fn random_cm(dataset: &ScoreDataset, seed: u64) -> Result<PredictionSet> {
    Ok(confounder_scores(dataset, &ConfounderKind::RandomUniform, seed)?.with_name("RND"))
}
