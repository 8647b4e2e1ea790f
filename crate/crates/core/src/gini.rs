//! Attribute usefulness scoring over a clustering.
//!
//! For attribute `r` and cluster `j`, `F_rj` counts the cluster's documents
//! carrying `r`, `f_rj = F_rj / |C_j|` is the within-cluster fraction and
//! `Pr_j = f_rj / Σ_m f_rm` normalizes across clusters. The Gini score
//! `Σ_j Pr_j²` lies in `[1/k, 1]`: `1/k` for an attribute spread evenly over
//! the clusters, `1` for one confined to a single cluster.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus_io::Attribute;
use crate::error::{Error, Result};
use crate::kmeans::ClusterState;
use crate::vsm::Corpus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeStats {
    pub k: usize,
    pub cluster_sizes: Vec<usize>,
    pub presence_counts: BTreeMap<Attribute, Vec<usize>>,
    pub presence_fractions: BTreeMap<Attribute, Vec<f64>>,
    pub gini: BTreeMap<Attribute, f64>,
    pub usable: BTreeSet<Attribute>,
    pub threshold: f64,
    /// No attribute met the threshold, so every attribute was kept.
    pub fallback: bool,
    /// No document in the corpus carries any attribute.
    pub no_auxiliary: bool,
}

/// Threshold used when none is configured: halfway between the uniform floor
/// `1/k` and twice it, capped at 1.
pub fn default_threshold(k: usize) -> f64 {
    (1.5 / k as f64).min(1.0)
}

/// Counts and normalized presence fractions for every occurring attribute.
/// Gini scores and the usable set are left empty.
pub fn presence_fractions(state: &ClusterState, corpus: &Corpus) -> AttributeStats {
    let k = state.k;
    let cluster_sizes = state.cluster_sizes();
    let mut presence_counts: BTreeMap<Attribute, Vec<usize>> = BTreeMap::new();
    for (doc, &cluster) in corpus.documents.iter().zip(&state.assignment) {
        // attributes is a set, so each document counts once per attribute.
        for attribute in &doc.attributes {
            presence_counts
                .entry(attribute.clone())
                .or_insert_with(|| vec![0; k])[cluster] += 1;
        }
    }

    let presence_fractions = presence_counts
        .iter()
        .map(|(attribute, counts)| {
            let within: Vec<f64> = counts
                .iter()
                .zip(&cluster_sizes)
                .map(|(&f, &size)| if size == 0 { 0.0 } else { f as f64 / size as f64 })
                .collect();
            let total: f64 = within.iter().sum();
            let normalized = within.iter().map(|&f| f / total).collect();
            (attribute.clone(), normalized)
        })
        .collect();

    AttributeStats {
        k,
        cluster_sizes,
        no_auxiliary: presence_counts.is_empty(),
        presence_counts,
        presence_fractions,
        gini: BTreeMap::new(),
        usable: BTreeSet::new(),
        threshold: 0.0,
        fallback: false,
    }
}

/// `Σ_j Pr_j²` per attribute.
pub fn gini_index(stats: &AttributeStats) -> BTreeMap<Attribute, f64> {
    stats
        .presence_fractions
        .iter()
        .map(|(a, pr)| (a.clone(), pr.iter().map(|p| p * p).sum()))
        .collect()
}

/// Attributes whose Gini score reaches `threshold`. When none qualifies but
/// attributes exist, all of them are returned and `fallback` is set.
pub fn select_usable(stats: &mut AttributeStats, threshold: f64) -> Result<BTreeSet<Attribute>> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Config(format!(
            "gini threshold {threshold} outside [0, 1]"
        )));
    }
    if stats.gini.len() != stats.presence_fractions.len() {
        stats.gini = gini_index(stats);
    }
    let mut usable: BTreeSet<Attribute> = stats
        .gini
        .iter()
        .filter(|(_, &g)| g >= threshold)
        .map(|(a, _)| a.clone())
        .collect();
    stats.fallback = usable.is_empty() && !stats.gini.is_empty();
    if stats.fallback {
        usable = stats.gini.keys().cloned().collect();
    }
    stats.threshold = threshold;
    stats.usable = usable.clone();
    Ok(usable)
}

/// Presence fractions, Gini scores and the usable set in one call.
pub fn score_attributes(
    state: &ClusterState,
    corpus: &Corpus,
    threshold: f64,
) -> Result<AttributeStats> {
    let mut stats = presence_fractions(state, corpus);
    stats.gini = gini_index(&stats);
    select_usable(&mut stats, threshold)?;
    Ok(stats)
}
