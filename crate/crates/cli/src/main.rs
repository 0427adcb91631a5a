//! `csg`: preprocess corpora, train SG/CBOW/CSG embeddings and evaluate them.
//!
//! Logs go to stderr; results go to files, each accompanied by a
//! `<output>.manifest` of `key=value` lines.

mod bench;
mod error;
mod eval;
mod manifest;
mod preprocess;
mod settings;
mod tools;
mod train;
mod vectors;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::settings::TrainArgs;

#[derive(Parser)]
#[command(name = "csg", version, about = "Contextual skip-gram word embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lowercase, split into sentences, filter short ones and sample.
    Preprocess(PreprocessArgs),
    /// Train embeddings on a preprocessed corpus.
    Train(TrainArgs),
    /// Spearman correlation against a word-similarity benchmark.
    EvalSim(EvalArgs),
    /// 3CosAdd accuracy on an analogy benchmark.
    EvalAnalogy(EvalArgs),
    /// Tabulate one or more probe CSV files by word and epoch.
    ProbeReport(ProbeReportArgs),
    /// Transcode between the text and binary vector formats.
    Convert(ConvertArgs),
    /// Training throughput of every architecture at one fixed config.
    Bench(BenchArgs),
}

#[derive(Args)]
pub struct PreprocessArgs {
    /// Raw text file, or `-` for stdin.
    #[arg(long, short)]
    pub input: PathBuf,
    /// One sentence per line, space-separated tokens.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Drop sentences with fewer tokens than this.
    #[arg(long, default_value_t = 10)]
    pub min_tokens: usize,
    /// Keep each sentence with this probability.
    #[arg(long, default_value_t = 0.01)]
    pub sample_rate: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Pseudo-sentence length for `--unstructured` input.
    #[arg(long, default_value_t = 1000)]
    pub chunk_len: usize,
    /// Treat the input as one token stream (text8) and cut it into
    /// `--chunk-len` pieces instead of splitting sentences.
    #[arg(long)]
    pub unstructured: bool,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Vector file in word2vec text or binary format.
    #[arg(long)]
    pub vectors: PathBuf,
    /// `text` or `binary`; guessed from the file when omitted.
    #[arg(long)]
    pub vector_format: Option<String>,
    /// Benchmark name (resolved under $CSG_DATA_DIR) or a file path.
    #[arg(long)]
    pub dataset: String,
    /// File layout when `--dataset` is a path: simlex, ws353, men, google or msr.
    #[arg(long)]
    pub dataset_format: Option<String>,
    /// key=value summary; defaults to `<vectors>.<dataset>.summary`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args)]
pub struct ProbeReportArgs {
    /// Probe CSV files written by `train --probe-center`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// key=value summary of every cell.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args)]
pub struct ConvertArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Input format; guessed from the file when omitted.
    #[arg(long)]
    pub from: Option<String>,
    /// Output format; `.txt` and `.vec` outputs default to text, anything else to binary.
    #[arg(long)]
    pub to: Option<String>,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Preprocessed corpus; a synthetic Zipf corpus is generated when omitted.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Size of the synthetic corpus.
    #[arg(long, default_value_t = 1_000_000)]
    pub tokens: usize,
    #[arg(long, default_value_t = 200)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 5)]
    pub negative: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// key=value results; defaults to stdout only.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Preprocess(args) => preprocess::run(args),
        Command::Train(args) => train::run(args),
        Command::EvalSim(args) => eval::similarity(args),
        Command::EvalAnalogy(args) => eval::analogy(args),
        Command::ProbeReport(args) => tools::probe_report(args),
        Command::Convert(args) => tools::convert(args),
        Command::Bench(args) => bench::run(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(error::exit_code(&err))
        }
    }
}
