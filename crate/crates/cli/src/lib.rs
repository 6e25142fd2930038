//! Subcommands of the `migrank` tool.
//!
//! Development phase: `mine` finds migration commits, `extract` writes one
//! feature file per commit, `train` fits a ranker. Serving phase: `rank`
//! recommends files of a project snapshot. `evaluate` and `importance`
//! inspect a trained model.

mod commands;

pub use commands::{cmd_evaluate, cmd_extract, cmd_importance, cmd_mine, cmd_rank, cmd_train};

use clap::{Args, Parser, Subcommand};
use std::fmt;
use std::path::PathBuf;

/// A failed command, classified by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unusable input (exit 2).
    Input(anyhow::Error),
    /// A result broke an invariant the pipeline relies on (exit 3).
    Internal(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(e) | CliError::Internal(e) => write!(f, "{e:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Input(e.into())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "migrank", version, about = "Recommends which Java files to migrate to Kotlin next")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect Java to Kotlin migrations in a commit history.
    Mine(MineArgs),
    /// Write one feature file per migration commit.
    Extract(ExtractArgs),
    /// Train a ranker on a directory of feature files.
    Train(TrainArgs),
    /// Rank the Java files of a project snapshot.
    Rank(RankArgs),
    /// Compare the ranker with the random and guideline baselines.
    Evaluate(EvaluateArgs),
    /// Print the normalized split gain of every feature.
    Importance(ImportanceArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "history")]
pub struct HistorySource {
    /// Name-status log file (`git log --name-status --format='commit %H'`).
    #[arg(long, group = "history")]
    pub log: Option<PathBuf>,
    /// Git repository to read the history from.
    #[arg(long, group = "history")]
    pub git: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[command(flatten)]
    pub source: HistorySource,
    /// Output directory for migrations.jsonl and histogram.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "provider")]
pub struct SnapshotSource {
    /// Directory with one subdirectory per commit sha holding the parent version.
    #[arg(long, group = "provider")]
    pub snapshots: Option<PathBuf>,
    /// Git repository to read parent versions from.
    #[arg(long, group = "provider")]
    pub git: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// migrations.jsonl written by `mine`.
    pub migrations: PathBuf,
    #[command(flatten)]
    pub source: SnapshotSource,
    /// Output directory; one `<sha>.json` per commit.
    #[arg(long)]
    pub out: PathBuf,
    /// Android class catalog replacing the bundled one.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory of feature files.
    pub features: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0.3)]
    pub eta: f64,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Project directory whose `.java` files are ranked.
    pub snapshot: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Also write the ranking as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory of held-out feature files.
    pub features: PathBuf,
    /// Required when the learned strategy is evaluated.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output directory for report.csv and report.json.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub kmax: usize,
    #[arg(long, value_delimiter = ',', default_value = "random,guideline,learned")]
    pub strategies: Vec<String>,
    /// Shuffles averaged by the random baseline.
    #[arg(long, default_value_t = 30)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Normalize AP@K by every relevant file instead of those in the top K.
    #[arg(long)]
    pub all_relevant: bool,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Also write the table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Mine(a) => cmd_mine(&a),
        Command::Extract(a) => cmd_extract(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Rank(a) => cmd_rank(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Importance(a) => cmd_importance(&a),
    }
}
