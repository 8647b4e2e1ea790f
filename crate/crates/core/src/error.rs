use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty corpus: no readable documents in {0}")]
    EmptyCorpus(PathBuf),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty cluster centroid undefined")]
    EmptyCentroid,

    #[error("refinement skipped: no usable attributes")]
    NoUsableAttributes,

    #[error("query has no indexable terms")]
    EmptyQuery,

    #[error("malformed index: {0}")]
    Index(String),

    #[error("unsupported index format_version {found} (expected {expected})")]
    IndexVersion { found: i64, expected: i64 },

    #[error("truth file is missing doc ids: {}", .0.join(", "))]
    MissingTruth(Vec<String>),

    #[error("truth file: {0}")]
    Truth(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
