use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "ctx2vec", version, about = "Distil contextual teacher vectors into static word embeddings, retrofit them and evaluate them")]
pub struct Cli {
    /// Flat key=value file supplying values for flags not given on the command line
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// JSON-lines file every run appends its manifest to
    #[arg(long, global = true, value_name = "FILE", default_value = "ctx2vec-runs.jsonl")]
    pub run_log: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Filter a pretokenized corpus by sentence length and build its vocabulary
    Prep(PrepArgs),
    /// Write synthetic teacher vectors (CTXV) for every corpus line
    GenTeacher(GenTeacherArgs),
    /// Train static embeddings against the teacher vectors
    Train(TrainArgs),
    /// Retrofit embeddings over a synonym lexicon
    Retrofit(RetrofitArgs),
    /// Score embeddings on similarity, analogy and categorization datasets
    Eval(EvalArgs),
    /// Print the nearest neighbours of query words
    Nn(NnArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Prep(_) => "prep",
            Command::GenTeacher(_) => "gen-teacher",
            Command::Train(_) => "train",
            Command::Retrofit(_) => "retrofit",
            Command::Eval(_) => "eval",
            Command::Nn(_) => "nn",
        }
    }
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PrepArgs {
    /// Input corpus, one whitespace-tokenized sentence per line
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Filtered corpus to write (tokens joined by single spaces)
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    /// Vocabulary file to write (word<TAB>count, ordered by id)
    #[arg(long, value_name = "FILE")]
    pub vocab: PathBuf,
    /// Drop words seen fewer times than this
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    /// Keep only the most frequent words
    #[arg(long)]
    pub max_vocab: Option<usize>,
    /// Shortest sentence kept, in tokens
    #[arg(long, default_value_t = 10)]
    pub min_len: usize,
    /// Longest sentence kept, in tokens
    #[arg(long, default_value_t = 40)]
    pub max_len: usize,
    /// Keep every non-empty sentence regardless of length
    #[arg(long)]
    pub no_length_filter: bool,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GenTeacherArgs {
    /// Corpus to produce vectors for, one sentence per line
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// CTXV teacher file to write
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    /// Teacher vector dimensionality
    #[arg(long, default_value_t = 768)]
    pub dim: usize,
    /// Weight of the neighbouring words' base vectors in each token vector
    #[arg(long, default_value_t = 0.3)]
    pub mix: f64,
    /// Seed for the per-word base vectors
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Optional word<TAB>group file; words of one group share a base vector
    #[arg(long, value_name = "FILE")]
    pub groups: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttentionArg {
    Tied,
    Explicit,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiArg {
    None,
    Tanh,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainArgs {
    /// Prepared corpus, aligned line by line with the teacher file
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    /// Vocabulary file written by `prep`
    #[arg(long, value_name = "FILE")]
    pub vocab: PathBuf,
    /// CTXV teacher file
    #[arg(long, value_name = "FILE")]
    pub teacher: PathBuf,
    /// Embeddings to write (word2vec text); metadata goes to <FILE>.meta.json
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    /// Static embedding dimensionality
    #[arg(long, default_value_t = 300)]
    pub dim: usize,
    /// Skip-gram context window on each side
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    /// Teacher context window for explicit attention (defaults to --window)
    #[arg(long)]
    pub attention_window: Option<usize>,
    /// Negative samples per example
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    /// Weight of the semantic loss
    #[arg(long, default_value_t = 1.0)]
    pub eta1: f64,
    /// Weight of the contextualized loss
    #[arg(long, default_value_t = 1.0)]
    pub eta2: f64,
    /// Weight of the negative-sample loss
    #[arg(long, default_value_t = 1.0)]
    pub eta3: f64,
    /// Initial learning rate, decayed linearly
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    /// Learning-rate floor as a fraction of --lr
    #[arg(long, default_value_t = 1e-4)]
    pub min_lr_ratio: f64,
    /// Passes over the corpus
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    /// Seed for initialisation and sampling
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Source of V_context: the projected center vector, or a separate attention layer
    #[arg(long, value_enum, default_value_t = AttentionArg::Tied)]
    pub attention: AttentionArg,
    /// Weight of the center term in explicit attention
    #[arg(long, default_value_t = 0.5)]
    pub lambda1: f64,
    /// Weight of the pooled-context term in explicit attention
    #[arg(long, default_value_t = 0.5)]
    pub lambda2: f64,
    /// Nonlinearity applied to the pooled context vectors
    #[arg(long, value_enum, default_value_t = PhiArg::None)]
    pub phi: PhiArg,
    /// Use raw instead of L2-normalized vectors in the semantic loss
    #[arg(long)]
    pub no_normalize_semantic: bool,
    /// Exponent of the unigram noise distribution
    #[arg(long, default_value_t = 0.75)]
    pub noise_exponent: f64,
    /// Frequent-word subsampling threshold (off unless given)
    #[arg(long)]
    pub subsample: Option<f64>,
    /// Worker threads; 1 is bit-reproducible
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Also write a binary checkpoint of the full model here
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Continue training from this checkpoint instead of a fresh initialisation
    #[arg(long, value_name = "FILE")]
    pub resume: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    /// q_i = α q′_i + β Σ γ_ij q_j / m
    #[value(alias = "paper-update")]
    Paper,
    /// Coordinate-wise minimiser of the retrofitting objective
    #[value(alias = "exact-minimizer")]
    Exact,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleArg {
    GaussSeidel,
    Jacobi,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RetrofitArgs {
    /// Embeddings to refine (word2vec text)
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Lexicon: one line per head word followed by its synonyms
    #[arg(long, value_name = "FILE")]
    pub lexicon: PathBuf,
    /// Refined embeddings to write; metadata goes to <FILE>.meta.json
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    /// Weight keeping each vector near its original
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Weight pulling each vector towards its synonyms
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// Degrees of freedom of the Student-t edge kernel
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Scale of the Student-t edge kernel
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Number of sweeps over the graph
    #[arg(long, default_value_t = 10)]
    pub iters: usize,
    /// Update rule
    #[arg(long, value_enum, default_value_t = ModeArg::Paper)]
    pub mode: ModeArg,
    /// In-place ascending sweep, or parallelisable sweep over the previous values
    #[arg(long, value_enum, default_value_t = ScheduleArg::GaussSeidel)]
    pub schedule: ScheduleArg,
    /// Recompute edge weights from the current vectors before every sweep
    #[arg(long)]
    pub dynamic_weights: bool,
    /// Stop once the largest change of a sweep falls below this value
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Worker threads for the Jacobi schedule
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalogyArg {
    #[value(name = "3cosadd")]
    CosAdd,
    #[value(name = "3cosmul")]
    CosMul,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EvalArgs {
    /// Embeddings to evaluate (word2vec text)
    #[arg(long, value_name = "FILE")]
    pub embeddings: PathBuf,
    /// Word-similarity dataset (word_a<TAB>word_b<TAB>score); repeatable
    #[arg(long, value_name = "FILE")]
    pub similarity: Vec<PathBuf>,
    /// Analogy dataset in questions-words format; repeatable
    #[arg(long, value_name = "FILE")]
    pub analogy: Vec<PathBuf>,
    /// Categorization dataset (word<TAB>category); repeatable
    #[arg(long, value_name = "FILE")]
    pub categorization: Vec<PathBuf>,
    /// Results file to write, one JSON record per line
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    /// Analogy scoring rule
    #[arg(long, value_enum, default_value_t = AnalogyArg::CosAdd)]
    pub analogy_method: AnalogyArg,
    /// Seed for k-means++ in categorization
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// k-means restarts in categorization
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Match dataset words case-sensitively instead of lowercasing them
    #[arg(long)]
    pub no_lowercase: bool,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct NnArgs {
    /// Embeddings to search (word2vec text)
    #[arg(long, value_name = "FILE")]
    pub embeddings: PathBuf,
    /// Query word; repeatable
    #[arg(long, required = true)]
    pub word: Vec<String>,
    /// Neighbours listed per query
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}
