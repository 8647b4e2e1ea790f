//! End-to-end orchestration and the table outputs behind the CLI.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus_io::{load_corpus, parse_document, Document, ParseConfig};
use crate::error::{Error, Result};
use crate::gini::{default_threshold, score_attributes};
use crate::index::{
    label_entries, rounded_centroid, sig9, ClusterIndex, ClusterLabels, ClusterRecord,
    ConfigSnapshot, DocumentRecord, GiniRow, GiniTable, RefinementRecord, FORMAT_VERSION,
};
use crate::kmeans::{nearest_centroid, run_kmeans, KMeansConfig};
use crate::labeling::{assign_classes, label_clusters, LabelMethod};
use crate::par;
use crate::refine::{refine_assignments, RefineConfig, RefineStatus};
use crate::vsm::{cosine_similarity, Corpus, TermVector};

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOptions {
    pub k: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub min_moves: usize,
    /// `None` selects [`default_threshold`] for `k`.
    pub gini_threshold: Option<f64>,
    pub alpha: f64,
    pub refine_passes: usize,
    pub label_method: LabelMethod,
    pub labels_per_cluster: usize,
    pub parse: ParseConfig,
}

impl ClusterOptions {
    pub fn new(k: usize, seed: u64) -> Self {
        ClusterOptions {
            k,
            seed,
            max_iterations: 50,
            min_moves: 0,
            gini_threshold: None,
            alpha: 1.0,
            refine_passes: 10,
            label_method: LabelMethod::MostRepeating,
            labels_per_cluster: 1,
            parse: ParseConfig::default(),
        }
    }

    fn kmeans(&self) -> KMeansConfig {
        KMeansConfig {
            k: self.k,
            max_iterations: self.max_iterations,
            seed: self.seed,
            tolerance: self.min_moves,
        }
    }

    fn threshold(&self) -> f64 {
        self.gini_threshold.unwrap_or_else(|| default_threshold(self.k))
    }

    fn validate(&self) -> Result<()> {
        if self.labels_per_cluster == 0 {
            return Err(Error::Config("labels per cluster must be at least 1".into()));
        }
        if self.refine_passes == 0 {
            return Err(Error::Config("refine passes must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Loads `dir` and runs the full pipeline.
pub fn cluster_corpus_dir(dir: &Path, options: &ClusterOptions) -> Result<ClusterIndex> {
    let loaded = load_corpus(dir, &options.parse)?;
    let mut warnings: Vec<String> = loaded.errors.iter().map(|e| e.to_string()).collect();
    warnings.extend(loaded.warnings.iter().map(|w| w.to_string()));
    cluster_documents(loaded.documents, warnings, options)
}

/// Runs k-means, attribute scoring, refinement and labeling over parsed
/// documents (which must be sorted by unique `doc_id`).
pub fn cluster_documents(
    mut documents: Vec<Document>,
    mut warnings: Vec<String>,
    options: &ClusterOptions,
) -> Result<ClusterIndex> {
    options.validate()?;
    documents.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    if documents.windows(2).any(|w| w[0].doc_id == w[1].doc_id) {
        return Err(Error::Config("duplicate doc_id in corpus".into()));
    }
    let corpus = Corpus::new(documents);
    let stage1 = run_kmeans(&corpus, &options.kmeans())?;
    let threshold = options.threshold();
    let stats = score_attributes(&stage1, &corpus, threshold)?;

    if stats.no_auxiliary {
        warnings.push("no auxiliary information: refinement skipped, result unrefined".into());
    } else if stats.fallback {
        warnings.push(format!(
            "no attribute reached gini threshold {threshold}; all attributes kept"
        ));
    }

    let refine_config = RefineConfig {
        alpha: options.alpha,
        max_passes: options.refine_passes,
    };
    let outcome = refine_assignments(&stage1, &corpus, &stats, &refine_config)?;
    let final_state = outcome.state;

    let final_stats = score_attributes(&final_state, &corpus, threshold)?;
    let m = options.labels_per_cluster;
    let by_count = label_clusters(&final_state, &corpus.documents, &final_stats, LabelMethod::MostRepeating, m);
    let by_presence =
        label_clusters(&final_state, &corpus.documents, &final_stats, LabelMethod::HighestPresence, m);
    let chosen = match options.label_method {
        LabelMethod::MostRepeating => &by_count,
        LabelMethod::HighestPresence => &by_presence,
    };
    let classes = assign_classes(&final_state, &corpus.documents, chosen, m);

    let stage1_sizes = stage1.cluster_sizes();
    let clusters = (0..final_state.k)
        .map(|j| ClusterRecord {
            id: j,
            size: final_state.centroids[j].member_count,
            stage1_size: stage1_sizes[j],
            centroid: rounded_centroid(&final_state.centroids[j]),
            labels: ClusterLabels {
                count: label_entries(&by_count[j]),
                presence: label_entries(&by_presence[j]),
            },
        })
        .collect();

    let documents = corpus
        .documents
        .iter()
        .zip(&corpus.vectors)
        .zip(classes)
        .enumerate()
        .map(|(i, ((doc, vector), class))| DocumentRecord {
            doc_id: doc.doc_id.clone(),
            attributes: doc.attributes.iter().cloned().collect(),
            terms: vector.clone(),
            stage1_cluster: stage1.assignment[i],
            final_cluster: final_state.assignment[i],
            classes: class.classes,
        })
        .collect();

    let rows = stats
        .presence_fractions
        .iter()
        .map(|(a, pr)| GiniRow {
            key: a.key.clone(),
            value: a.value.clone(),
            counts: stats.presence_counts[a].clone(),
            presence: pr.iter().copied().map(sig9).collect(),
            gini: sig9(stats.gini[a]),
            usable: stats.usable.contains(a),
        })
        .collect();

    let index = ClusterIndex {
        format_version: FORMAT_VERSION,
        config: ConfigSnapshot {
            k: options.k,
            seed: options.seed,
            max_iterations: options.max_iterations,
            min_moves: options.min_moves,
            gini_threshold: sig9(threshold),
            alpha: sig9(options.alpha),
            refine_passes: options.refine_passes,
            label_method: options.label_method,
            labels_per_cluster: m,
            markers: options.parse.markers.clone(),
            extensions: options.parse.extensions.clone(),
            stopwords: options.parse.stopwords.iter().cloned().collect(),
        },
        documents,
        clusters,
        attribute_stats: GiniTable {
            threshold: sig9(threshold),
            fallback: stats.fallback,
            no_auxiliary: stats.no_auxiliary,
            rows,
        },
        refinement: RefinementRecord {
            status: outcome.status,
            passes: outcome.passes,
            moves: outcome.moves,
            stage1_iterations: stage1.iteration,
        },
        warnings,
    };
    index.validate()?;
    Ok(index)
}

/// One-line run summary printed by `cluster`.
pub fn summary(index: &ClusterIndex) -> String {
    let status = match index.refinement.status {
        RefineStatus::Refined => "refined",
        RefineStatus::RefinedNoop => "refined-noop",
        RefineStatus::Unrefined => "unrefined",
    };
    format!(
        "{} docs, k={}, refinement moved {} docs ({status}), {} usable attributes",
        index.documents.len(),
        index.k(),
        index.refinement.moves,
        index.usable_attributes().len()
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryScope {
    /// Search only the cluster whose centroid is most similar to the query.
    Routed,
    /// Rank every document.
    Global,
    /// Search one given cluster.
    Cluster(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryHit {
    pub rank: usize,
    pub doc_id: String,
    pub similarity: f64,
    pub cluster: usize,
    pub classes: Vec<String>,
}

/// Vectorizes `text` the way the index's documents were: any attribute header
/// is stripped and the body goes through the stored stopword list.
pub fn query_vector(index: &ClusterIndex, text: &str) -> Result<TermVector> {
    let (doc, _) = parse_document(text, "query", &index.config.parse_config());
    let v = TermVector::from_terms(&doc.terms);
    if v.is_empty() {
        return Err(Error::EmptyQuery);
    }
    Ok(v)
}

pub fn query(index: &ClusterIndex, text: &str, top: usize, scope: QueryScope) -> Result<Vec<QueryHit>> {
    let q = query_vector(index, text)?;
    let target = match scope {
        QueryScope::Global => None,
        QueryScope::Cluster(c) if c >= index.k() => {
            return Err(Error::Config(format!("cluster {c} outside 0..{}", index.k())))
        }
        QueryScope::Cluster(c) => Some(c),
        QueryScope::Routed => {
            let centroids: Vec<_> = index.clusters.iter().map(ClusterRecord::centroid).collect();
            Some(nearest_centroid(&q, &centroids).0)
        }
    };
    let candidates: Vec<&DocumentRecord> = index
        .documents
        .iter()
        .filter(|d| target.is_none_or(|c| d.final_cluster == c))
        .collect();
    let sims = par::map(&candidates, |d| cosine_similarity(&q, &d.terms));
    let mut ranked: Vec<(f64, &DocumentRecord)> = sims.into_iter().zip(candidates).collect();
    // Documents are already in doc_id order; a stable sort keeps it for ties.
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(ranked
        .into_iter()
        .take(top)
        .enumerate()
        .map(|(i, (s, d))| QueryHit {
            rank: i + 1,
            doc_id: d.doc_id.clone(),
            similarity: s,
            cluster: d.final_cluster,
            classes: d.classes.clone(),
        })
        .collect())
}

pub(crate) fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

pub(crate) fn finish_csv(writer: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Config(format!("csv flush failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn hits_csv(hits: &[QueryHit]) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["rank", "doc_id", "similarity", "classes"])?;
    for h in hits {
        w.write_record([
            h.rank.to_string(),
            h.doc_id.clone(),
            sig9(h.similarity).to_string(),
            h.classes.join(";"),
        ])?;
    }
    finish_csv(w)
}

/// `doc_id,cluster,classes` for every document.
pub fn classify_csv(index: &ClusterIndex) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["doc_id", "cluster", "classes"])?;
    for d in &index.documents {
        w.write_record([d.doc_id.clone(), d.final_cluster.to_string(), d.classes.join(";")])?;
    }
    finish_csv(w)
}

/// `attribute,pr_0..pr_{k-1},gini,usable` over the stage-1 clusters.
pub fn gini_csv(index: &ClusterIndex) -> Result<String> {
    let mut w = csv_writer();
    let mut header = vec!["attribute".to_string()];
    header.extend((0..index.k()).map(|j| format!("pr_{j}")));
    header.extend(["gini".to_string(), "usable".to_string()]);
    w.write_record(&header)?;
    for row in &index.attribute_stats.rows {
        let mut record = vec![row.label()];
        record.extend(row.presence.iter().map(f64::to_string));
        record.push(row.gini.to_string());
        record.push(row.usable.to_string());
        w.write_record(&record)?;
    }
    finish_csv(w)
}

/// `cluster,method,rank,label,score` for both labeling methods.
pub fn labels_csv(index: &ClusterIndex) -> Result<String> {
    let mut w = csv_writer();
    w.write_record(["cluster", "method", "rank", "label", "score"])?;
    for c in &index.clusters {
        for method in [LabelMethod::MostRepeating, LabelMethod::HighestPresence] {
            let entries = c.labels.for_method(method);
            if entries.is_empty() {
                w.write_record([
                    c.id.to_string(),
                    method.to_string(),
                    "1".to_string(),
                    crate::labeling::UNLABELED.to_string(),
                    String::new(),
                ])?;
            }
            for (r, e) in entries.iter().enumerate() {
                w.write_record([
                    c.id.to_string(),
                    method.to_string(),
                    (r + 1).to_string(),
                    e.label.clone(),
                    e.score.to_string(),
                ])?;
            }
        }
    }
    finish_csv(w)
}
