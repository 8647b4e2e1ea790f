use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use auxclust::corpus_io::{resolve_stopwords, ParseConfig};
use auxclust::eval::{evaluate, read_truth};
use auxclust::pipeline::{
    classify_csv, cluster_corpus_dir, gini_csv, hits_csv, labels_csv, query, summary, ClusterOptions, QueryScope,
};
use auxclust::synth::{generate, SynthConfig};
use auxclust::{ClusterIndex, LabelMethod};

#[derive(Parser)]
#[command(name = "auxclust", version, about = "Document clustering with auxiliary attributes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a corpus directory and write an index.
    Cluster(ClusterArgs),
    /// Rank indexed documents against a text query.
    Query {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        text: String,
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Search every document instead of the best-matching cluster.
        #[arg(long)]
        global: bool,
    },
    /// Compare both stages against a `doc_id,class` truth file.
    Evaluate {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Print the attribute score table or the cluster labels.
    Report {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, value_enum, default_value_t = Table::Gini)]
        table: Table,
    },
    /// Print each document's cluster and classes.
    Classify {
        #[arg(long)]
        index: PathBuf,
    },
    /// Write a synthetic corpus with planted classes and a truth file.
    GenCorpus {
        #[arg(long)]
        docs: usize,
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        noise_attrs: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Fraction of documents whose content comes from another class.
        #[arg(long)]
        overlap: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    Gini,
    Labels,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Count,
    Presence,
}

impl From<MethodArg> for LabelMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Count => LabelMethod::MostRepeating,
            MethodArg::Presence => LabelMethod::HighestPresence,
        }
    }
}

#[derive(clap::Args)]
struct ClusterArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long = "max-iter", default_value_t = 50)]
    max_iter: usize,
    /// Stop k-means once a round moves at most this many documents.
    #[arg(long, default_value_t = 0)]
    min_moves: usize,
    /// Defaults to 1.5/k.
    #[arg(long)]
    gini_threshold: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 10)]
    refine_passes: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Count)]
    label_method: MethodArg,
    #[arg(long, default_value_t = 1)]
    labels_per_cluster: usize,
    /// One word per line; replaces the built-in English list.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Characters that open an attribute header line.
    #[arg(long, default_value = "$#")]
    markers: String,
    /// File extensions to load, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "txt")]
    ext: Vec<String>,
    #[arg(long, default_value = "index.json")]
    out: PathBuf,
}

fn run_cluster(args: ClusterArgs) -> Result<()> {
    if args.k == 0 {
        bail!("--k must be at least 1");
    }
    let markers: Vec<char> = args.markers.chars().collect();
    if markers.is_empty() {
        bail!("--markers must name at least one character");
    }
    let stopwords = resolve_stopwords(args.stopwords.as_deref())?;
    let mut options = ClusterOptions::new(args.k, args.seed);
    options.max_iterations = args.max_iter;
    options.min_moves = args.min_moves;
    options.gini_threshold = args.gini_threshold;
    options.alpha = args.alpha;
    options.refine_passes = args.refine_passes;
    options.label_method = args.label_method.into();
    options.labels_per_cluster = args.labels_per_cluster;
    options.parse = ParseConfig {
        markers,
        stopwords,
        extensions: args.ext.iter().map(|e| e.trim_start_matches('.').to_string()).collect(),
    };
    let index = cluster_corpus_dir(&args.corpus, &options)?;
    for w in &index.warnings {
        eprintln!("warning: {w}");
    }
    index
        .save(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("{}", summary(&index));
    Ok(())
}

fn load(path: &Path) -> Result<ClusterIndex> {
    ClusterIndex::load(path).with_context(|| format!("loading index {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Cluster(args) => run_cluster(args)?,
        Command::Query {
            index,
            text,
            top,
            global,
        } => {
            let index = load(&index)?;
            let scope = if global { QueryScope::Global } else { QueryScope::Routed };
            print!("{}", hits_csv(&query(&index, &text, top, scope)?)?);
        }
        Command::Evaluate { index, truth } => {
            let index = load(&index)?;
            let truth = read_truth(&truth)?;
            print!("{}", evaluate(&index, &truth)?.to_csv()?);
        }
        Command::Report { index, table } => {
            let index = load(&index)?;
            let out = match table {
                Table::Gini => gini_csv(&index)?,
                Table::Labels => labels_csv(&index)?,
            };
            print!("{out}");
        }
        Command::Classify { index } => print!("{}", classify_csv(&load(&index)?)?),
        Command::GenCorpus {
            docs,
            classes,
            noise_attrs,
            seed,
            out,
            overlap,
        } => {
            let mut config = SynthConfig {
                docs,
                classes,
                noise_attrs,
                seed,
                ..Default::default()
            };
            if let Some(o) = overlap {
                config.overlap = o;
            }
            generate(&config)?.write_to(&out)?;
            println!("wrote {docs} documents and truth.csv to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
