//! Two-stage document clustering with auxiliary attributes.
//!
//! Documents are first grouped by k-means over raw term-frequency vectors
//! using cosine similarity. Auxiliary `key: value` attributes carried in each
//! document's header are then scored by how concentrated they are across the
//! content clusters (a Gini index over presence fractions), the discriminative
//! ones are kept, and every document is reassigned to the cluster with the
//! highest Bernoulli naive Bayes posterior over those attributes. Finally each
//! cluster is named after its dominant attribute.
//!
//! The pipeline stages live in their own modules:
//!
//! - [`corpus_io`]: header-attribute parsing, tokenizing, stopwords
//! - [`vsm`]: sparse term vectors, cosine similarity, centroids
//! - [`kmeans`]: content-only clustering
//! - [`gini`]: attribute presence fractions, Gini scores, usable set
//! - [`refine`]: posterior reassignment
//! - [`labeling`]: cluster naming and per-document classes
//! - [`index`], [`pipeline`], [`eval`]: persisted index, orchestration, metrics
//! - [`synth`]: planted synthetic corpora for demos and tests
//!
//! With the default `parallel` feature the per-document inner loops run on
//! rayon; without it the same code runs sequentially.

pub mod corpus_io;
pub mod error;
pub mod eval;
pub mod gini;
pub mod index;
pub mod kmeans;
pub mod labeling;
mod par;
pub mod pipeline;
pub mod refine;
pub mod synth;
pub mod vsm;

pub use corpus_io::{Attribute, Document, ParseConfig};
pub use error::{Error, Result};
pub use gini::AttributeStats;
pub use index::ClusterIndex;
pub use kmeans::{ClusterState, KMeansConfig};
pub use labeling::{ClusterLabel, LabelMethod};
pub use refine::{PosteriorModel, RefineConfig};
pub use vsm::{Centroid, Corpus, TermVector};
pub use par::is_parallel;
