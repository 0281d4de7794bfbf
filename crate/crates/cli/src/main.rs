use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{CliError, FileConfig, Kind};

/// Train, evaluate and inspect attention-pooling CNN readers on
/// MCTest-format multiple-choice data.
#[derive(Debug, Parser)]
#[command(name = "habcnn", version)]
struct Cli {
    /// Flat key=value file; any flag may be set there, flags win.
    #[arg(long, env = "HABCNN_CONFIG", global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model and write checkpoint, history and dev report.
    Train(TrainArgs),
    /// Score a split with a checkpoint or a baseline.
    Eval(EvalArgs),
    /// Print attention traces for the four candidates of one question.
    Inspect(InspectArgs),
    /// Write a synthetic corpus and matching embeddings.
    GenSynthetic(GenArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// MCTest story file (.tsv)
    #[arg(long)]
    pub stories: Option<PathBuf>,
    /// MCTest answer file (.ans)
    #[arg(long)]
    pub answers: Option<PathBuf>,
    /// Statement file: item id, question, candidate, statement (tab separated)
    #[arg(long)]
    pub statements: Option<PathBuf>,
    /// Word embeddings, one `word v1 ... vd` per line
    #[arg(long)]
    pub glove: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub dev_stories: Option<PathBuf>,
    #[arg(long)]
    pub dev_answers: Option<PathBuf>,
    #[arg(long)]
    pub dev_statements: Option<PathBuf>,
    /// qp, qap or te
    #[arg(long)]
    pub arch: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub margin: Option<f64>,
    /// Sentences kept by attention pooling
    #[arg(long)]
    pub k1: Option<usize>,
    /// Snippets kept by attention pooling
    #[arg(long)]
    pub k2: Option<usize>,
    #[arg(long)]
    pub l2: Option<f64>,
    /// Weight of the question-type loss
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Feature maps per convolution
    #[arg(long)]
    pub hidden: Option<usize>,
    /// per-negative or grouped
    #[arg(long)]
    pub loss_style: Option<String>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// qp, qap, te, addition or addition-proj; defaults to the checkpoint's
    #[arg(long)]
    pub arch: Option<String>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Directory for eval_report.json
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Item id, e.g. mc160.dev.3
    #[arg(long)]
    pub item: Option<String>,
    /// Question index within the item (0-3)
    #[arg(long)]
    pub question: Option<usize>,
    /// Directory for attention.jsonl
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training items
    #[arg(long)]
    pub n: Option<usize>,
    /// Extra items written as a dev split
    #[arg(long)]
    pub dev: Option<usize>,
    /// Content words in the vocabulary
    #[arg(long)]
    pub vocab: Option<usize>,
    /// Embedding dimension
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Train(a) => commands::cmd_train(&cfg, a),
        Command::Eval(a) => commands::cmd_eval(&cfg, a),
        Command::Inspect(a) => commands::cmd_inspect(&cfg, a),
        Command::GenSynthetic(a) => commands::cmd_gen_synthetic(&cfg, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("{}", CliError::new(Kind::Config, None, first).to_line());
            return ExitCode::from(Kind::Config.exit_code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_line());
            ExitCode::from(e.kind.exit_code())
        }
    }
}
