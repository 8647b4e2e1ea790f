//! Planted synthetic corpora.
//!
//! Documents are split round-robin into `classes` gold classes. Every document
//! carries one class-aligned attribute (`category: classN`) and `noise_attrs`
//! attributes whose two values are drawn independently of the class. Body
//! text mixes words from a per-class topic vocabulary with a shared
//! vocabulary. A fraction `overlap` of the documents take their topic words
//! from some other class, so content alone cannot recover the gold classes
//! while the class attribute still can.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus_io::{parse_document, Document, ParseConfig};
use crate::error::{Error, Result};

pub const CLASS_KEY: &str = "category";
pub const TRUTH_FILE: &str = "truth.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub docs: usize,
    pub classes: usize,
    pub noise_attrs: usize,
    pub seed: u64,
    /// Fraction of documents whose content comes from another class.
    pub overlap: f64,
    pub doc_length: usize,
    pub topic_vocabulary: usize,
    pub shared_vocabulary: usize,
    /// Probability that a body word is drawn from the topic vocabulary.
    pub topic_share: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            docs: 60,
            classes: 3,
            noise_attrs: 5,
            seed: 0,
            overlap: 0.2,
            doc_length: 600,
            topic_vocabulary: 3,
            shared_vocabulary: 3000,
            topic_share: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDocument {
    pub doc_id: String,
    pub text: String,
    pub class: String,
    /// Class whose topic vocabulary the body was drawn from.
    pub content_class: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub config: SynthConfig,
    pub documents: Vec<SynthDocument>,
}

pub fn class_name(c: usize) -> String {
    format!("class{c}")
}

/// The class-aligned attribute label for class `c`, e.g. `category:class2`.
pub fn class_label(c: usize) -> String {
    format!("{CLASS_KEY}:{}", class_name(c))
}

fn topic_word(class: usize, i: usize) -> String {
    // Pseudo-words; digits keep them out of any stopword list.
    format!("topic{class}w{i}")
}

fn shared_word(i: usize) -> String {
    format!("common{i}")
}

pub fn generate(config: &SynthConfig) -> Result<SyntheticCorpus> {
    if config.classes == 0 || config.docs < config.classes {
        return Err(Error::Config(format!(
            "need at least one document per class ({} docs, {} classes)",
            config.docs, config.classes
        )));
    }
    if !(0.0..=1.0).contains(&config.overlap) || !(0.0..=1.0).contains(&config.topic_share) {
        return Err(Error::Config("overlap and topic share must lie in [0, 1]".into()));
    }
    if config.doc_length == 0 || config.topic_vocabulary == 0 || config.shared_vocabulary == 0 {
        return Err(Error::Config("document length and vocabularies must be positive".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let classes: Vec<usize> = (0..config.docs).map(|i| i % config.classes).collect();

    let mut content = classes.clone();
    if config.classes > 1 {
        let mut order: Vec<usize> = (0..config.docs).collect();
        order.shuffle(&mut rng);
        let decoys = (config.overlap * config.docs as f64).round() as usize;
        for &i in order.iter().take(decoys) {
            let shift = 1 + rng.gen_range(0..config.classes - 1);
            content[i] = (classes[i] + shift) % config.classes;
        }
    }

    let width = config.docs.to_string().len().max(4);
    let documents = (0..config.docs)
        .map(|i| {
            let mut text = format!("${CLASS_KEY}: {}\n", class_name(classes[i]));
            for a in 0..config.noise_attrs {
                let v = rng.gen_range(0..2);
                text.push_str(&format!("$noise{a}: v{v}\n"));
            }
            let words: Vec<String> = (0..config.doc_length)
                .map(|_| {
                    if rng.gen_bool(config.topic_share) {
                        topic_word(content[i], rng.gen_range(0..config.topic_vocabulary))
                    } else {
                        shared_word(rng.gen_range(0..config.shared_vocabulary))
                    }
                })
                .collect();
            for line in words.chunks(12) {
                text.push_str(&line.join(" "));
                text.push('\n');
            }
            SynthDocument {
                doc_id: format!("doc{i:0width$}.txt"),
                text,
                class: class_name(classes[i]),
                content_class: class_name(content[i]),
            }
        })
        .collect();

    Ok(SyntheticCorpus {
        config: config.clone(),
        documents,
    })
}

impl SyntheticCorpus {
    /// Parses the generated files in memory, in `doc_id` order.
    pub fn parse(&self, config: &ParseConfig) -> Vec<Document> {
        self.documents
            .iter()
            .map(|d| parse_document(&d.text, &d.doc_id, config).0)
            .collect()
    }

    pub fn truth(&self) -> BTreeMap<String, String> {
        self.documents
            .iter()
            .map(|d| (d.doc_id.clone(), d.class.clone()))
            .collect()
    }

    pub fn truth_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["doc_id", "class"])?;
        for d in &self.documents {
            w.write_record([&d.doc_id, &d.class])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes one `.txt` file per document plus `truth.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for d in &self.documents {
            let path = dir.join(&d.doc_id);
            fs::write(&path, &d.text).map_err(|e| Error::io(&path, e))?;
        }
        let truth = dir.join(TRUTH_FILE);
        fs::write(&truth, self.truth_csv()?).map_err(|e| Error::io(&truth, e))?;
        Ok(())
    }
}
