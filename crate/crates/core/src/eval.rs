//! Purity, NMI and cohesion for the stage-1 and final partitions.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{sig9, ClusterIndex};
use crate::pipeline::{csv_writer, finish_csv};
use crate::vsm::{cosine_similarity, mean_vector, TermVector};

/// Fraction of documents that belong to their cluster's majority class.
pub fn purity(clusters: &[usize], classes: &[usize]) -> f64 {
    assert_eq!(clusters.len(), classes.len());
    if clusters.is_empty() {
        return 0.0;
    }
    let mut table: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (&c, &g) in clusters.iter().zip(classes) {
        *table.entry(c).or_default().entry(g).or_default() += 1;
    }
    let hits: usize = table.values().map(|row| row.values().max().copied().unwrap_or(0)).sum();
    hits as f64 / clusters.len() as f64
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information over the arithmetic mean of the two entropies
/// (natural log). Two single-block partitions score 1.
pub fn nmi(clusters: &[usize], classes: &[usize]) -> f64 {
    assert_eq!(clusters.len(), classes.len());
    if clusters.is_empty() {
        return 0.0;
    }
    let n = clusters.len() as f64;
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut by_cluster: BTreeMap<usize, usize> = BTreeMap::new();
    let mut by_class: BTreeMap<usize, usize> = BTreeMap::new();
    for (&c, &g) in clusters.iter().zip(classes) {
        *joint.entry((c, g)).or_default() += 1;
        *by_cluster.entry(c).or_default() += 1;
        *by_class.entry(g).or_default() += 1;
    }
    let h_cluster = entropy(by_cluster.values().copied(), n);
    let h_class = entropy(by_class.values().copied(), n);
    let denom = 0.5 * (h_cluster + h_class);
    if denom == 0.0 {
        return 1.0;
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(c, g), &count)| {
            let p = count as f64 / n;
            let pc = by_cluster[&c] as f64 / n;
            let pg = by_class[&g] as f64 / n;
            p * (p / (pc * pg)).ln()
        })
        .sum();
    (mi / denom).clamp(0.0, 1.0)
}

/// Mean member-to-centroid cosine for each cluster.
pub fn cohesion(vectors: &[&TermVector], assignment: &[usize], k: usize) -> Vec<f64> {
    (0..k)
        .map(|j| {
            let members: Vec<&TermVector> = assignment
                .iter()
                .zip(vectors)
                .filter(|(&c, _)| c == j)
                .map(|(_, v)| *v)
                .collect();
            match mean_vector(&members) {
                Ok(centroid) => {
                    members.iter().map(|v| cosine_similarity(v, &centroid)).sum::<f64>()
                        / members.len() as f64
                }
                Err(_) => 0.0,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageMetrics {
    pub purity: f64,
    pub nmi: f64,
    pub cohesion: Vec<f64>,
    /// Document-weighted mean of `cohesion`.
    pub mean_cohesion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub stage1: StageMetrics,
    pub final_stage: StageMetrics,
}

impl EvaluationReport {
    pub fn purity_delta(&self) -> f64 {
        self.final_stage.purity - self.stage1.purity
    }

    pub fn nmi_delta(&self) -> f64 {
        self.final_stage.nmi - self.stage1.nmi
    }

    /// `metric,stage1,final,delta` rows.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv_writer();
        w.write_record(["metric", "stage1", "final", "delta"])?;
        let mut row = |name: String, a: f64, b: f64| {
            w.write_record([
                name,
                sig9(a).to_string(),
                sig9(b).to_string(),
                sig9(b - a).to_string(),
            ])
        };
        row("purity".into(), self.stage1.purity, self.final_stage.purity)?;
        row("nmi".into(), self.stage1.nmi, self.final_stage.nmi)?;
        row(
            "mean_cohesion".into(),
            self.stage1.mean_cohesion,
            self.final_stage.mean_cohesion,
        )?;
        for (j, (a, b)) in self.stage1.cohesion.iter().zip(&self.final_stage.cohesion).enumerate() {
            row(format!("cohesion_{j}"), *a, *b)?;
        }
        finish_csv(w)
    }
}

fn stage_metrics(vectors: &[&TermVector], assignment: &[usize], gold: &[usize], k: usize) -> StageMetrics {
    let cohesion = cohesion(vectors, assignment, k);
    let mut sizes = vec![0usize; k];
    for &c in assignment {
        sizes[c] += 1;
    }
    let mean_cohesion = cohesion
        .iter()
        .zip(&sizes)
        .map(|(c, &s)| c * s as f64)
        .sum::<f64>()
        / assignment.len().max(1) as f64;
    StageMetrics {
        purity: purity(assignment, gold),
        nmi: nmi(assignment, gold),
        cohesion,
        mean_cohesion,
    }
}

/// Reads a `doc_id,class` CSV with a header row.
pub fn read_truth(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_truth(&text)
}

pub fn parse_truth(text: &str) -> Result<BTreeMap<String, String>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "doc_id" || &headers[1] != "class" {
        return Err(Error::Truth(format!(
            "expected header `doc_id,class`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut truth = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let (Some(id), Some(class)) = (record.get(0), record.get(1)) else {
            return Err(Error::Truth("row with fewer than two fields".into()));
        };
        truth.insert(id.to_string(), class.to_string());
    }
    Ok(truth)
}

pub fn evaluate(index: &ClusterIndex, truth: &BTreeMap<String, String>) -> Result<EvaluationReport> {
    let missing: Vec<String> = index
        .documents
        .iter()
        .filter(|d| !truth.contains_key(&d.doc_id))
        .map(|d| d.doc_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingTruth(missing));
    }
    let mut class_ids: BTreeMap<&str, usize> = BTreeMap::new();
    let gold: Vec<usize> = index
        .documents
        .iter()
        .map(|d| {
            let class = truth[&d.doc_id].as_str();
            let next = class_ids.len();
            *class_ids.entry(class).or_insert(next)
        })
        .collect();
    let vectors: Vec<&TermVector> = index.documents.iter().map(|d| &d.terms).collect();
    let k = index.k();
    Ok(EvaluationReport {
        stage1: stage_metrics(&vectors, &index.stage1_assignment(), &gold, k),
        final_stage: stage_metrics(&vectors, &index.final_assignment(), &gold, k),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_agreement() {
        let a = [0, 0, 1, 1, 2];
        let g = [5, 5, 3, 3, 9];
        assert_eq!(purity(&a, &g), 1.0);
        assert!((nmi(&a, &g) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_cluster_against_two_classes() {
        let a = [0, 0, 0, 0];
        let g = [0, 0, 1, 1];
        assert_eq!(purity(&a, &g), 0.5);
        assert_eq!(nmi(&a, &g), 0.0);
    }

    #[test]
    fn both_single_block() {
        assert_eq!(nmi(&[0, 0], &[1, 1]), 1.0);
    }

    #[test]
    fn nmi_against_hand_value() {
        // clusters {0,1},{2,3}; classes {0},{1,2,3}
        let a = [0, 0, 1, 1];
        let g = [0, 1, 1, 1];
        let mi = 0.25 * (0.25f64 / (0.5 * 0.25)).ln()
            + 0.25 * (0.25f64 / (0.5 * 0.75)).ln()
            + 0.5 * (0.5f64 / (0.5 * 0.75)).ln();
        let h_a = 2.0f64.ln();
        let h_g = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        assert!((nmi(&a, &g) - mi / (0.5 * (h_a + h_g))).abs() < 1e-12);
        assert_eq!(purity(&a, &g), 0.75);
    }

    #[test]
    fn truth_parsing() {
        let t = parse_truth("doc_id,class\na.txt,x\nb.txt,y\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t["b.txt"], "y");
        assert!(parse_truth("id,label\na,b\n").is_err());
    }

    #[test]
    fn cohesion_of_identical_members_is_one() {
        let v = TermVector::from_terms(&["a", "b"]);
        let c = cohesion(&[&v, &v], &[0, 0], 1);
        assert!((c[0] - 1.0).abs() < 1e-12);
    }
}
