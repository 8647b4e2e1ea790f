//! Cluster naming from member attributes.
//!
//! Two rules are available: the attribute carried by the most members
//! ([`LabelMethod::MostRepeating`]) and the attribute with the highest
//! presence fraction `Pr_j` for the cluster ([`LabelMethod::HighestPresence`]).
//! Ties always resolve to the lexicographically smaller `key:value` string.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus_io::{Attribute, Document};
use crate::gini::AttributeStats;
use crate::kmeans::ClusterState;

pub const UNLABELED: &str = "unlabeled";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelMethod {
    /// `count` on the command line.
    MostRepeating,
    /// `presence` on the command line.
    HighestPresence,
}

impl fmt::Display for LabelMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelMethod::MostRepeating => "count",
            LabelMethod::HighestPresence => "presence",
        })
    }
}

impl FromStr for LabelMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "count" => Ok(LabelMethod::MostRepeating),
            "presence" => Ok(LabelMethod::HighestPresence),
            other => Err(format!("unknown label method {other:?} (expected count or presence)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLabel {
    pub cluster: usize,
    pub method: LabelMethod,
    /// Best first; empty for an unlabeled cluster.
    pub alternates: Vec<(Attribute, f64)>,
}

impl ClusterLabel {
    pub fn primary(&self) -> Option<&Attribute> {
        self.alternates.first().map(|(a, _)| a)
    }

    pub fn is_unlabeled(&self) -> bool {
        self.alternates.is_empty()
    }

    /// Label strings of the top `m` alternates, or the unlabeled sentinel.
    pub fn top_labels(&self, m: usize) -> Vec<String> {
        if self.is_unlabeled() {
            return vec![UNLABELED.to_string()];
        }
        self.alternates.iter().take(m).map(|(a, _)| a.label()).collect()
    }
}

fn rank(cluster: usize, method: LabelMethod, scores: Vec<(Attribute, f64)>, m: usize) -> ClusterLabel {
    let mut keyed: Vec<(String, Attribute, f64)> =
        scores.into_iter().map(|(a, s)| (a.label(), a, s)).collect();
    keyed.sort_by(|x, y| y.2.total_cmp(&x.2).then_with(|| x.0.cmp(&y.0)));
    ClusterLabel {
        cluster,
        method,
        alternates: keyed.into_iter().take(m).map(|(_, a, s)| (a, s)).collect(),
    }
}

/// Scores each attribute by the number of members carrying it.
pub fn label_most_repeating(cluster: usize, members: &[&Document], m: usize) -> ClusterLabel {
    let mut counts: BTreeMap<&Attribute, usize> = BTreeMap::new();
    for doc in members {
        for a in &doc.attributes {
            *counts.entry(a).or_default() += 1;
        }
    }
    let scores = counts.into_iter().map(|(a, c)| (a.clone(), c as f64)).collect();
    rank(cluster, LabelMethod::MostRepeating, scores, m.max(1))
}

/// Scores each attribute present in the cluster by its presence fraction
/// `Pr_j` for that cluster.
pub fn label_highest_presence(
    cluster: usize,
    members: &[&Document],
    stats: &AttributeStats,
    m: usize,
) -> ClusterLabel {
    let present: BTreeSet<&Attribute> = members.iter().flat_map(|d| d.attributes.iter()).collect();
    let scores = present
        .into_iter()
        .map(|a| {
            let pr = stats
                .presence_fractions
                .get(a)
                .and_then(|p| p.get(cluster))
                .copied()
                .unwrap_or(0.0);
            (a.clone(), pr)
        })
        .collect();
    rank(cluster, LabelMethod::HighestPresence, scores, m.max(1))
}

/// One label per cluster using `method`. `stats` must describe `state`.
pub fn label_clusters(
    state: &ClusterState,
    documents: &[Document],
    stats: &AttributeStats,
    method: LabelMethod,
    m: usize,
) -> Vec<ClusterLabel> {
    state
        .member_lists()
        .iter()
        .enumerate()
        .map(|(j, members)| {
            let docs: Vec<&Document> = members.iter().map(|&i| &documents[i]).collect();
            match method {
                LabelMethod::MostRepeating => label_most_repeating(j, &docs, m),
                LabelMethod::HighestPresence => label_highest_presence(j, &docs, stats, m),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassAssignment {
    pub doc_id: String,
    pub classes: Vec<String>,
}

/// Gives each document the top-`m` labels of its cluster.
pub fn assign_classes(
    state: &ClusterState,
    documents: &[Document],
    labels: &[ClusterLabel],
    m: usize,
) -> Vec<ClassAssignment> {
    documents
        .iter()
        .zip(&state.assignment)
        .map(|(doc, &c)| ClassAssignment {
            doc_id: doc.doc_id.clone(),
            classes: labels[c].top_labels(m.max(1)),
        })
        .collect()
}
