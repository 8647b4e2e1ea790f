//! Corpus parsing: attribute headers, tokenizing and stopword filtering.
//!
//! A document file may open with a block of attribute lines, each starting
//! with a marker character (`$` or `#` by default) followed by `Key: Value`.
//! The block ends at the first line that does not start with a marker;
//! everything after it is body text.
//!
//! ```text
//! $Title: In the Year 2889
//! $Author: Jules Verne and Michel Verne
//! In the year 2889 ...
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::par;

/// Minimal English stopword list used when no stopword file is given.
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
    "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
    "yourselves",
];

pub const DEFAULT_MARKERS: &[char] = &['$', '#'];

/// One auxiliary `key: value` pair.
///
/// Keys are trimmed and lowercased; values are trimmed and keep their case.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Attribute {
    pub key: String,
    pub value: String,
}

impl Attribute {
    /// Normalizes `key` and `value`. Returns `None` when the key is empty or
    /// contains a `:`.
    pub fn new(key: &str, value: &str) -> Option<Self> {
        let key = key.trim().to_lowercase();
        if key.is_empty() || key.contains(':') {
            return None;
        }
        Some(Attribute {
            key,
            value: value.trim().to_string(),
        })
    }

    /// The `key:value` label string used for classes and tie-breaking.
    pub fn label(&self) -> String {
        format!("{}:{}", self.key, self.value)
    }

    /// Header line for this attribute, e.g. `$title: In the Year 2889`.
    pub fn to_header_line(&self, marker: char) -> String {
        format!("{marker}{}: {}", self.key, self.value)
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.key, self.value)
    }
}

/// A file split into its attribute header and body, before tokenizing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub doc_id: String,
    pub header_lines: Vec<String>,
    pub body: String,
}

impl RawDocument {
    pub fn split(raw_text: &str, doc_id: &str, markers: &[char]) -> Self {
        let mut header_lines = Vec::new();
        let mut rest = raw_text;
        loop {
            let (line, next) = match rest.find('\n') {
                Some(pos) => (&rest[..pos], &rest[pos + 1..]),
                None => (rest, ""),
            };
            let line = line.strip_suffix('\r').unwrap_or(line);
            match line.chars().next() {
                Some(c) if markers.contains(&c) => {
                    header_lines.push(line.to_string());
                    rest = next;
                    if next.is_empty() {
                        break;
                    }
                }
                _ => break,
            }
        }
        RawDocument {
            doc_id: doc_id.to_string(),
            header_lines,
            body: rest.to_string(),
        }
    }
}

/// A parsed document: attributes plus filtered body tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub attributes: BTreeSet<Attribute>,
    pub terms: Vec<String>,
}

impl Document {
    pub fn has_attribute(&self, attribute: &Attribute) -> bool {
        self.attributes.contains(attribute)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseWarning {
    pub doc_id: String,
    pub message: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.doc_id, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseConfig {
    pub markers: Vec<char>,
    pub stopwords: BTreeSet<String>,
    /// File extensions (without the dot) picked up by [`load_corpus`].
    pub extensions: Vec<String>,
}

impl Default for ParseConfig {
    fn default() -> Self {
        ParseConfig {
            markers: DEFAULT_MARKERS.to_vec(),
            stopwords: default_stopwords(),
            extensions: vec!["txt".to_string()],
        }
    }
}

impl ParseConfig {
    pub fn with_stopwords(mut self, stopwords: BTreeSet<String>) -> Self {
        self.stopwords = stopwords;
        self
    }
}

pub fn default_stopwords() -> BTreeSet<String> {
    DEFAULT_STOPWORDS.iter().map(|w| w.to_string()).collect()
}

/// Lowercases `text` and splits it on every run of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Tokenizes `text` and drops stopwords.
pub fn filtered_terms(text: &str, stopwords: &BTreeSet<String>) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| !stopwords.contains(t))
        .collect()
}

fn parse_attribute_line(line: &str) -> Option<Attribute> {
    // The first char is a marker; markers are single chars listed in config.
    let mut chars = line.chars();
    chars.next();
    let content = chars.as_str();
    let (key, value) = content.split_once(':')?;
    Attribute::new(key, value)
}

/// Parses one document. Never fails; problems are reported as warnings.
pub fn parse_document(
    raw_text: &str,
    doc_id: &str,
    config: &ParseConfig,
) -> (Document, Vec<ParseWarning>) {
    let raw = RawDocument::split(raw_text, doc_id, &config.markers);
    let mut warnings = Vec::new();
    let mut attributes = BTreeSet::new();
    let mut body = String::new();

    for line in &raw.header_lines {
        match parse_attribute_line(line) {
            Some(attribute) => {
                attributes.insert(attribute);
            }
            None => {
                warnings.push(ParseWarning {
                    doc_id: doc_id.to_string(),
                    message: format!("malformed attribute line treated as body: {line:?}"),
                });
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    body.push_str(&raw.body);

    let terms = filtered_terms(&body, &config.stopwords);
    if terms.is_empty() {
        warnings.push(ParseWarning {
            doc_id: doc_id.to_string(),
            message: "no indexable terms after filtering".to_string(),
        });
    }

    (
        Document {
            doc_id: doc_id.to_string(),
            attributes,
            terms,
        },
        warnings,
    )
}

/// A file that could not be read while loading a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadError {
    pub path: PathBuf,
    pub message: String,
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadedCorpus {
    /// Sorted by `doc_id`.
    pub documents: Vec<Document>,
    pub warnings: Vec<ParseWarning>,
    pub errors: Vec<LoadError>,
}

fn relative_id(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// Loads every file under `dir` whose extension is listed in the config.
///
/// Documents come back in lexicographic `doc_id` order, where `doc_id` is the
/// `/`-separated path relative to `dir`. Unreadable files are skipped and
/// reported in [`LoadedCorpus::errors`].
pub fn load_corpus(dir: &Path, config: &ParseConfig) -> Result<LoadedCorpus> {
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "corpus directory not found"),
        ));
    }
    let mut candidates: Vec<(String, PathBuf)> = Vec::new();
    let mut errors = Vec::new();
    for entry in WalkDir::new(dir).follow_links(true) {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                errors.push(LoadError {
                    path: e.path().map(Path::to_path_buf).unwrap_or_else(|| dir.into()),
                    message: e.to_string(),
                });
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let matches = entry
            .path()
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|ext| config.extensions.iter().any(|x| x == ext));
        if matches {
            candidates.push((relative_id(dir, entry.path()), entry.path().to_path_buf()));
        }
    }
    candidates.sort();

    let parsed = par::map(&candidates, |(doc_id, path)| match fs::read_to_string(path) {
        Ok(text) => Ok(parse_document(&text, doc_id, config)),
        Err(e) => Err(LoadError {
            path: path.clone(),
            message: e.to_string(),
        }),
    });

    let mut loaded = LoadedCorpus {
        errors,
        ..Default::default()
    };
    for result in parsed {
        match result {
            Ok((doc, warnings)) => {
                loaded.documents.push(doc);
                loaded.warnings.extend(warnings);
            }
            Err(e) => loaded.errors.push(e),
        }
    }
    if loaded.documents.is_empty() {
        return Err(Error::EmptyCorpus(dir.to_path_buf()));
    }
    Ok(loaded)
}

/// Reads a newline-separated stopword file. Lines starting with `#` are
/// comments; words are lowercased and deduplicated.
pub fn load_stopwords(path: &Path) -> Result<BTreeSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&text))
}

pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// The explicit stopword file when given, the built-in list otherwise.
pub fn resolve_stopwords(path: Option<&Path>) -> Result<BTreeSet<String>> {
    match path {
        Some(p) => load_stopwords(p),
        None => Ok(default_stopwords()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn config_with(stopwords: &[&str]) -> ParseConfig {
        ParseConfig::default().with_stopwords(stopwords.iter().map(|s| s.to_string()).collect())
    }

    fn attr(k: &str, v: &str) -> Attribute {
        Attribute::new(k, v).unwrap()
    }

    #[test]
    fn parses_book_header() {
        let text = "$Title: In the Year 2889\n$Author: Jules Verne and Michel Verne\n$Language: English\nIn the year 2889 the city spread out.";
        let (doc, warnings) = parse_document(text, "verne.txt", &ParseConfig::default());
        assert!(warnings.is_empty());
        let expected: BTreeSet<_> = [
            attr("title", "In the Year 2889"),
            attr("author", "Jules Verne and Michel Verne"),
            attr("language", "English"),
        ]
        .into_iter()
        .collect();
        assert_eq!(doc.attributes, expected);
        assert_eq!(doc.terms, vec!["year", "2889", "city", "spread"]);
    }

    #[test]
    fn empty_file_has_one_warning() {
        let (doc, warnings) = parse_document("", "e.txt", &ParseConfig::default());
        assert!(doc.attributes.is_empty());
        assert!(doc.terms.is_empty());
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn all_stopwords_leaves_no_terms() {
        let (doc, warnings) = parse_document("the The THE", "s.txt", &config_with(&["the"]));
        assert!(doc.terms.is_empty());
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn malformed_header_line_goes_to_body() {
        let text = "#no colon here\n$Genre: SciFi\nrocket";
        let (doc, warnings) = parse_document(text, "m.txt", &config_with(&[]));
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].message.contains("malformed"));
        assert_eq!(doc.attributes.len(), 1);
        assert!(doc.has_attribute(&attr("genre", "SciFi")));
        assert_eq!(doc.terms, vec!["no", "colon", "here", "rocket"]);
    }

    #[test]
    fn header_stops_at_first_plain_line() {
        let text = "$a: 1\nbody line\n$b: 2\n";
        let (doc, _) = parse_document(text, "h.txt", &config_with(&[]));
        assert_eq!(doc.attributes.len(), 1);
        assert_eq!(doc.terms, vec!["body", "line", "b", "2"]);
    }

    #[test]
    fn keys_fold_case_values_keep_it() {
        let text = "$  AUTHOR :  Jules Verne \r\n$author: Jules Verne\nx";
        let (doc, _) = parse_document(text, "c.txt", &config_with(&[]));
        assert_eq!(doc.attributes.len(), 1);
        assert!(doc.has_attribute(&attr("author", "Jules Verne")));
    }

    #[test]
    fn value_may_contain_colon() {
        let (doc, _) = parse_document("$time: 12:30\n", "t.txt", &config_with(&[]));
        assert!(doc.has_attribute(&attr("time", "12:30")));
    }

    #[test]
    fn custom_markers() {
        let cfg = ParseConfig {
            markers: vec!['@'],
            ..config_with(&[])
        };
        let (doc, _) = parse_document("@k: v\n$x: y\n", "m.txt", &cfg);
        assert_eq!(doc.attributes.len(), 1);
        assert_eq!(doc.terms, vec!["x", "y"]);
    }

    #[test]
    fn stopword_file_format() {
        assert_eq!(
            parse_stopwords("the\nand\n# comment\nof"),
            ["the", "and", "of"].iter().map(|s| s.to_string()).collect()
        );
        assert!(parse_stopwords("").is_empty());
        assert_eq!(
            parse_stopwords("The\nTHE"),
            ["the"].iter().map(|s| s.to_string()).collect()
        );
    }

    #[test]
    fn missing_stopword_file_is_an_error() {
        let err = load_stopwords(Path::new("/definitely/not/here.txt")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert_eq!(resolve_stopwords(None).unwrap(), default_stopwords());
    }

    #[test]
    fn corpus_order_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.txt"), "beta").unwrap();
        fs::write(dir.path().join("a.txt"), "alpha").unwrap();
        fs::write(dir.path().join("skip.md"), "ignored").unwrap();
        fs::create_dir(dir.path().join("sub")).unwrap();
        fs::write(dir.path().join("sub/c.txt"), "gamma").unwrap();
        fs::write(dir.path().join("bad.txt"), [0xff, 0xfe, 0x00, 0xc3]).unwrap();

        let loaded = load_corpus(dir.path(), &ParseConfig::default()).unwrap();
        let ids: Vec<_> = loaded.documents.iter().map(|d| d.doc_id.as_str()).collect();
        assert_eq!(ids, vec!["a.txt", "b.txt", "sub/c.txt"]);
        assert_eq!(loaded.errors.len(), 1);
        assert!(loaded.errors[0].path.ends_with("bad.txt"));
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("notes.md"), "x").unwrap();
        let err = load_corpus(dir.path(), &ParseConfig::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyCorpus(_)));
        assert!(err.to_string().contains("empty corpus"));
    }

    fn attribute_strategy() -> impl Strategy<Value = Attribute> {
        ("[A-Za-z][A-Za-z0-9 _-]{0,8}", "[A-Za-z0-9 :.,-]{0,12}")
            .prop_filter_map("valid attribute", |(k, v)| Attribute::new(&k, &v))
    }

    proptest! {
        #[test]
        fn attribute_round_trip(
            attrs in proptest::collection::btree_set(attribute_strategy(), 0..6),
            marker in proptest::sample::select(vec!['$', '#']),
        ) {
            let header: String = attrs
                .iter()
                .map(|a| a.to_header_line(marker) + "\n")
                .collect();
            let (doc, _) = parse_document(&(header + "body"), "p", &ParseConfig::default());
            prop_assert_eq!(doc.attributes, attrs);
        }

        #[test]
        fn tokenize_is_idempotent(text in "\\PC{0,80}") {
            let once = tokenize(&text);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn parse_is_total_and_filters_stopwords(text in "\\PC{0,200}") {
            let cfg = ParseConfig::default();
            let (doc, _) = parse_document(&text, "fuzz", &cfg);
            for t in &doc.terms {
                prop_assert!(!t.is_empty());
                prop_assert!(!cfg.stopwords.contains(t));
            }
        }
    }
}
