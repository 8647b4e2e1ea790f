//! The persisted cluster index.
//!
//! The index is a single JSON document. Object keys are written in sorted
//! order, arrays keep their natural order (documents by `doc_id`, clusters by
//! id) and every real number is rounded to 9 significant digits before it is
//! stored, so saving, loading and saving again reproduces the same bytes.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus_io::{Attribute, Document, ParseConfig};
use crate::error::{Error, Result};
use crate::labeling::{ClusterLabel, LabelMethod};
use crate::refine::RefineStatus;
use crate::vsm::{Centroid, TermVector};

pub const FORMAT_VERSION: i64 = 1;

/// Rounds to 9 significant digits.
pub fn sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

fn sig9_vector(v: &TermVector) -> TermVector {
    v.map_weights(sig9)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSnapshot {
    pub k: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub min_moves: usize,
    pub gini_threshold: f64,
    pub alpha: f64,
    pub refine_passes: usize,
    pub label_method: LabelMethod,
    pub labels_per_cluster: usize,
    pub markers: Vec<char>,
    pub extensions: Vec<String>,
    pub stopwords: Vec<String>,
}

impl ConfigSnapshot {
    pub fn parse_config(&self) -> ParseConfig {
        ParseConfig {
            markers: self.markers.clone(),
            stopwords: self.stopwords.iter().cloned().collect(),
            extensions: self.extensions.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub attributes: Vec<Attribute>,
    pub terms: TermVector,
    pub stage1_cluster: usize,
    pub final_cluster: usize,
    pub classes: Vec<String>,
}

impl DocumentRecord {
    /// The document as seen by the attribute stages (terms are not kept in
    /// order, so only attributes are restored).
    pub fn attributes_only(&self) -> Document {
        Document {
            doc_id: self.doc_id.clone(),
            attributes: self.attributes.iter().cloned().collect(),
            terms: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelEntry {
    pub label: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterLabels {
    pub count: Vec<LabelEntry>,
    pub presence: Vec<LabelEntry>,
}

impl ClusterLabels {
    pub fn for_method(&self, method: LabelMethod) -> &[LabelEntry] {
        match method {
            LabelMethod::MostRepeating => &self.count,
            LabelMethod::HighestPresence => &self.presence,
        }
    }
}

pub(crate) fn label_entries(label: &ClusterLabel) -> Vec<LabelEntry> {
    label
        .alternates
        .iter()
        .map(|(a, s)| LabelEntry {
            label: a.label(),
            score: sig9(*s),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterRecord {
    pub id: usize,
    pub size: usize,
    pub stage1_size: usize,
    pub centroid: TermVector,
    pub labels: ClusterLabels,
}

impl ClusterRecord {
    pub fn centroid(&self) -> Centroid {
        Centroid {
            vector: self.centroid.clone(),
            member_count: self.size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GiniRow {
    pub key: String,
    pub value: String,
    pub counts: Vec<usize>,
    pub presence: Vec<f64>,
    pub gini: f64,
    pub usable: bool,
}

impl GiniRow {
    pub fn label(&self) -> String {
        format!("{}:{}", self.key, self.value)
    }
}

/// Attribute scores over the stage-1 clusters, which select the usable set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GiniTable {
    pub threshold: f64,
    pub fallback: bool,
    pub no_auxiliary: bool,
    pub rows: Vec<GiniRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementRecord {
    pub status: RefineStatus,
    pub passes: usize,
    pub moves: usize,
    pub stage1_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterIndex {
    pub format_version: i64,
    pub config: ConfigSnapshot,
    pub documents: Vec<DocumentRecord>,
    pub clusters: Vec<ClusterRecord>,
    pub attribute_stats: GiniTable,
    pub refinement: RefinementRecord,
    pub warnings: Vec<String>,
}

impl ClusterIndex {
    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn stage1_assignment(&self) -> Vec<usize> {
        self.documents.iter().map(|d| d.stage1_cluster).collect()
    }

    pub fn final_assignment(&self) -> Vec<usize> {
        self.documents.iter().map(|d| d.final_cluster).collect()
    }

    pub fn usable_attributes(&self) -> BTreeSet<String> {
        self.attribute_stats
            .rows
            .iter()
            .filter(|r| r.usable)
            .map(GiniRow::label)
            .collect()
    }

    /// Canonical text form: sorted keys, two-space indent, trailing newline.
    pub fn to_canonical_string(&self) -> Result<String> {
        // serde_json::Value keeps object keys in a BTreeMap.
        let value = serde_json::to_value(self)?;
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        Ok(text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let version = value
            .get("format_version")
            .ok_or_else(|| Error::Index("missing field `format_version`".into()))?
            .as_i64()
            .ok_or_else(|| Error::Index("field `format_version` is not an integer".into()))?;
        if version != FORMAT_VERSION {
            return Err(Error::IndexVersion {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let index: ClusterIndex = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            Error::Index(format!("at `{path}`: {}", e.into_inner()))
        })?;
        index.validate()?;
        Ok(index)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_canonical_string()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Structural checks that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        let k = self.clusters.len();
        if k == 0 || k != self.config.k {
            return Err(Error::Index(format!(
                "field `clusters` has {k} entries but config.k is {}",
                self.config.k
            )));
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if c.id != i {
                return Err(Error::Index(format!("field `clusters[{i}].id` is {}", c.id)));
            }
        }
        let mut stage1 = vec![0usize; k];
        let mut fin = vec![0usize; k];
        for (i, d) in self.documents.iter().enumerate() {
            if d.stage1_cluster >= k || d.final_cluster >= k {
                return Err(Error::Index(format!(
                    "field `documents[{i}]` references a cluster outside 0..{k}"
                )));
            }
            stage1[d.stage1_cluster] += 1;
            fin[d.final_cluster] += 1;
        }
        for (j, c) in self.clusters.iter().enumerate() {
            if stage1[j] == 0 || fin[j] == 0 {
                return Err(Error::Index(format!("cluster {j} is empty")));
            }
            if c.size != fin[j] || c.stage1_size != stage1[j] {
                return Err(Error::Index(format!(
                    "field `clusters[{j}].size` disagrees with document assignments"
                )));
            }
        }
        if self
            .documents
            .windows(2)
            .any(|w| w[0].doc_id >= w[1].doc_id)
        {
            return Err(Error::Index(
                "field `documents` is not sorted by unique doc_id".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn rounded_centroid(c: &Centroid) -> TermVector {
    sig9_vector(&c.vector)
}
