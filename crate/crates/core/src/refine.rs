//! Posterior reassignment of documents using their usable attributes.
//!
//! Each cluster is modelled as a Bernoulli naive Bayes class over the usable
//! attribute set: a prior `|C_j| / N` and, per attribute, a Laplace-smoothed
//! presence probability `(F_rj + α) / (|C_j| + 2α)`. A document's score for
//! cluster `j` adds `log P(r|C_j)` for every usable attribute it carries and
//! `log(1 - P(r|C_j))` for every one it lacks.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus_io::{Attribute, Document};
use crate::error::{Error, Result};
use crate::gini::AttributeStats;
use crate::kmeans::{repair_empty_clusters, ClusterState};
use crate::par;
use crate::vsm::Corpus;

/// Scores closer than this (in log space) count as tied.
const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub alpha: f64,
    pub max_passes: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            alpha: 1.0,
            max_passes: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorModel {
    pub priors: Vec<f64>,
    pub usable: Vec<Attribute>,
    /// `likelihoods[a][j] = P(usable[a] | C_j)`.
    pub likelihoods: Vec<Vec<f64>>,
    pub alpha: f64,
}

impl PosteriorModel {
    pub fn k(&self) -> usize {
        self.priors.len()
    }

    /// Unnormalized log posterior per cluster.
    pub fn log_scores(&self, doc: &Document) -> Vec<f64> {
        let mut scores: Vec<f64> = self.priors.iter().map(|p| p.ln()).collect();
        for (attribute, per_cluster) in self.usable.iter().zip(&self.likelihoods) {
            let present = doc.has_attribute(attribute);
            for (score, &p) in scores.iter_mut().zip(per_cluster) {
                *score += if present { p.ln() } else { (1.0 - p).ln() };
            }
        }
        scores
    }

    /// Posterior over clusters, summing to 1.
    pub fn posterior(&self, doc: &Document) -> Vec<f64> {
        let scores = self.log_scores(doc);
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = exp.iter().sum();
        exp.into_iter().map(|e| e / total).collect()
    }

    /// Most probable cluster, ties to the lowest index.
    pub fn map_cluster(&self, doc: &Document) -> usize {
        best_cluster(&self.log_scores(doc), None)
    }
}

/// Argmax with near-ties resolved to `current` when it is among the best,
/// otherwise to the lowest index.
fn best_cluster(scores: &[f64], current: Option<usize>) -> usize {
    let mut best = 0;
    for (j, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] + TIE_EPSILON {
            best = j;
        }
    }
    match current {
        Some(c) if scores[c] >= scores[best] - TIE_EPSILON => c,
        _ => best,
    }
}

pub fn fit_posterior_model(
    state: &ClusterState,
    corpus: &Corpus,
    usable: &BTreeSet<Attribute>,
    alpha: f64,
) -> Result<PosteriorModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    if usable.is_empty() {
        return Err(Error::NoUsableAttributes);
    }
    let sizes = state.cluster_sizes();
    let n = corpus.len() as f64;
    let priors = sizes.iter().map(|&s| s as f64 / n).collect();

    let usable: Vec<Attribute> = usable.iter().cloned().collect();
    let mut counts = vec![vec![0usize; state.k]; usable.len()];
    for (doc, &cluster) in corpus.documents.iter().zip(&state.assignment) {
        for (a, attribute) in usable.iter().enumerate() {
            if doc.has_attribute(attribute) {
                counts[a][cluster] += 1;
            }
        }
    }
    let likelihoods = counts
        .iter()
        .map(|per_cluster| {
            per_cluster
                .iter()
                .zip(&sizes)
                .map(|(&f, &size)| (f as f64 + alpha) / (size as f64 + 2.0 * alpha))
                .collect()
        })
        .collect();

    Ok(PosteriorModel {
        priors,
        usable,
        likelihoods,
        alpha,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefineStatus {
    /// At least one document moved.
    Refined,
    /// Refinement ran but the first pass moved nothing.
    RefinedNoop,
    /// No usable attributes; the input partition is returned unchanged.
    Unrefined,
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub state: ClusterState,
    pub status: RefineStatus,
    pub passes: usize,
    pub moves: usize,
}

/// Reassigns documents to their most probable cluster, refitting the model
/// after each pass, until a pass moves nothing or `max_passes` is reached.
pub fn refine_assignments(
    state: &ClusterState,
    corpus: &Corpus,
    stats: &AttributeStats,
    config: &RefineConfig,
) -> Result<RefineOutcome> {
    if config.max_passes == 0 {
        return Err(Error::Config("refine passes must be at least 1".into()));
    }
    if stats.no_auxiliary || stats.usable.is_empty() {
        return Ok(RefineOutcome {
            state: state.clone(),
            status: RefineStatus::Unrefined,
            passes: 0,
            moves: 0,
        });
    }

    let mut current = state.clone();
    let mut moves = 0;
    let mut passes = 0;
    while passes < config.max_passes {
        let model = fit_posterior_model(&current, corpus, &stats.usable, config.alpha)?;
        let assignment = par::map_indexed(&corpus.documents, |i, doc| {
            best_cluster(&model.log_scores(doc), Some(current.assignment[i]))
        });
        let moved = assignment
            .iter()
            .zip(&current.assignment)
            .filter(|(a, b)| a != b)
            .count();
        passes += 1;
        if moved == 0 {
            break;
        }
        moves += moved;
        let mut next = ClusterState::from_assignment(current.k, assignment, corpus);
        next.iteration = current.iteration;
        repair_empty_clusters(&mut next, corpus);
        current = next;
    }
    // Centroids for retrieval over the final partition.
    let mut final_state = ClusterState::from_assignment(current.k, current.assignment, corpus);
    final_state.iteration = current.iteration;

    Ok(RefineOutcome {
        state: final_state,
        status: if moves == 0 {
            RefineStatus::RefinedNoop
        } else {
            RefineStatus::Refined
        },
        passes,
        moves,
    })
}
