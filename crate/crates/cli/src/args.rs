use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "mixtag",
    version,
    about = "Word-level language identification for code-mixed text"
)]
pub struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build per-language wordlists and a gazetteer from a labeled corpus.
    BuildLexicons {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        labels: LabelArgs,
    },
    /// Dump observation matrices as TSV.
    Features {
        #[arg(long)]
        corpus: PathBuf,
        /// Input has a gold label column; it is appended to each row.
        #[arg(long)]
        labeled: bool,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Character n-grams of order 1..=N.
        #[arg(long)]
        ngrams: Option<usize>,
        #[command(flatten)]
        resources: ResourceArgs,
    },
    /// Train a model on a labeled corpus.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Template file, or "default" for the shipped set.
        #[arg(long)]
        templates: Option<String>,
        #[arg(long)]
        l2: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        min_count: Option<usize>,
        /// Character n-grams of order 1..=N.
        #[arg(long)]
        ngrams: Option<usize>,
        /// Accepted for compatibility; training is deterministic.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        resources: ResourceArgs,
    },
    /// Tag a corpus with a trained model.
    Tag {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Input carries gold labels, which are ignored.
        #[arg(long)]
        labeled_input: bool,
        #[command(flatten)]
        resources: ResourceArgs,
    },
    /// Score predicted labels against gold labels.
    Eval {
        gold: PathBuf,
        pred: PathBuf,
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        labels: LabelArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct LabelArgs {
    /// Comma-separated label set, replacing the default twelve labels.
    #[arg(long, value_delimiter = ',')]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Args)]
pub struct ResourceArgs {
    /// Directory holding `<lang>.txt` wordlists, `gazetteer.txt` and
    /// optionally `emoticons.txt`.
    #[arg(long)]
    pub lexicon_dir: Option<PathBuf>,
    /// Extra lexicon as LANG=[lines|freq|pairs:]PATH; repeatable.
    #[arg(long = "lexicon")]
    pub lexicons: Vec<String>,
    #[arg(long)]
    pub emoticons: Option<PathBuf>,
    #[arg(long)]
    pub gazetteer: Option<PathBuf>,
    /// Minimum count for frequency-list entries.
    #[arg(long)]
    pub min_frequency: Option<u64>,
    /// Treat only ASCII characters as letters for capitalization.
    #[arg(long)]
    pub ascii_only: bool,
    #[command(flatten)]
    pub labels: LabelArgs,
}
