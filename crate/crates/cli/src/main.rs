//! `convmine`: conversation process mining from the command line.

mod commands;
mod config;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "convmine",
    version,
    about = "Process mining for annotated information-seeking conversations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Map a transcript file onto QRFA labels and write it as normalized JSONL.
    Ingest(IngestArgs),
    /// Mine flows, successions and episodes from a normalized log.
    Discover(DiscoverArgs),
    /// Compute alignment-based fitness of a log against a model.
    Check(CheckArgs),
    /// Fitness and error-detection table over several logs and models.
    Evaluate(EvaluateArgs),
    /// Write random model walks as a normalized log.
    Generate(GenerateArgs),
    /// Run ingest, check and evaluate for every dataset in a TOML config.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Md,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerArg {
    Core,
    #[default]
    Fine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnmappedArg {
    #[default]
    Error,
    #[value(name = "drop_event")]
    DropEvent,
    #[value(name = "drop_trace")]
    DropTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultilabelArg {
    #[default]
    Expand,
    First,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum SupportArg {
    #[default]
    Trace,
    Occurrence,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    /// Cost of a log-only move.
    #[arg(long, default_value_t = 1)]
    pub log_cost: u32,
    /// Cost of a visible model-only move.
    #[arg(long, default_value_t = 1)]
    pub model_cost: u32,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// `builtin:NAME` or a mapping CSV with header `source_label,core,sub`.
    #[arg(long)]
    pub mapping: String,
    #[arg(long, value_enum, default_value_t)]
    pub unmapped: UnmappedArg,
    #[arg(long, value_enum, default_value_t)]
    pub layer: LayerArg,
    #[arg(long, value_enum, default_value_t)]
    pub multilabel: MultilabelArg,
    /// Drop repeated labels within an utterance.
    #[arg(long)]
    pub dedup: bool,
    /// Sidecar CSV `conversation_id,success`; overrides success values in the input.
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Where to write statistics; printed when omitted.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub report: ReportFormat,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    /// Normalized JSONL log.
    pub log: PathBuf,
    /// Directory for graph, model, succession and episode files.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Minimum edge frequency for the extracted model.
    #[arg(long, default_value_t = 1, conflicts_with = "min_edge_share")]
    pub min_edge_freq: u64,
    /// Minimum edge frequency as a fraction of the trace count.
    #[arg(long)]
    pub min_edge_share: Option<f64>,
    #[arg(long, default_value_t = convmine::discovery::DEFAULT_MAX_EPISODE_LEN)]
    pub max_episode_len: usize,
    #[arg(long, default_value_t = 1)]
    pub min_support: u64,
    #[arg(long, value_enum, default_value_t)]
    pub support: SupportArg,
    #[arg(long, value_enum, default_value_t)]
    pub report: ReportFormat,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Normalized JSONL log.
    pub log: PathBuf,
    /// `qrfa`, `cor`, or a model definition JSON.
    #[arg(long)]
    pub model: String,
    #[command(flatten)]
    pub cost: CostArgs,
    /// Include the optimal alignment of every trace variant.
    #[arg(long)]
    pub alignments: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub report: ReportFormat,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// `NAME=PATH` of a normalized JSONL log; repeatable.
    #[arg(long = "log", required = true, value_parser = io::named_path)]
    pub logs: Vec<(String, PathBuf)>,
    /// `qrfa`, `cor`, or a model definition JSON; repeatable.
    #[arg(long = "model", required = true)]
    pub models: Vec<String>,
    /// `NAME=PATH` of a sidecar gold CSV for the log NAME; repeatable.
    #[arg(long = "gold", value_parser = io::named_path)]
    pub gold: Vec<(String, PathBuf)>,
    #[arg(long, default_value_t = convmine::evaluation::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[command(flatten)]
    pub cost: CostArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub report: ReportFormat,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// `qrfa`, `cor`, or a model definition JSON.
    #[arg(long)]
    pub model: String,
    #[arg(short = 'n', long, default_value_t = 1000)]
    pub count: usize,
    /// Length after which walks head for END by a shortest path.
    #[arg(long, default_value_t = 20)]
    pub max_len: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub force: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest(a) => commands::ingest(&a),
        Command::Discover(a) => commands::discover(&a),
        Command::Check(a) => commands::check(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Generate(a) => commands::generate(&a),
        Command::Pipeline(a) => config::pipeline(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
