use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qpadm_core::{PenaltyKind, Task, Variant};

#[derive(Debug, Parser)]
#[command(name = "qpadm", version, about = "Parallel ADMM for penalized quantile regression and quantile-loss SVMs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset and its truth sidecar.
    Generate(GenerateArgs),
    /// Fit one model, or select λ by HBIC when no λ is given.
    Fit(FitArgs),
    /// Run a replicated benchmark described by a JSON file.
    Bench(BenchArgs),
    /// Check the back-substitution algebra and convergence properties on a toy system.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Regression,
    Classification,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Regression => Task::Regression,
            TaskArg::Classification => Task::Classification,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Libsvm,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: qpadm_core::Error| e.to_string())
}

fn parse_penalty(s: &str) -> Result<PenaltyKind, String> {
    s.parse().map_err(|e: qpadm_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// AR(1) correlation of the latent features.
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    #[arg(long, value_enum, default_value_t = TaskArg::Regression)]
    pub task: TaskArg,
    /// Quantile level used for the true coefficients in the sidecar.
    #[arg(long, default_value_t = 0.7)]
    pub tau: f64,
    /// Output path prefix; `.csv` or `.libsvm` and `.truth.json` are appended.
    #[arg(long, default_value = "synth")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset in CSV (response last) or libsvm format, optionally gzip-compressed.
    #[arg(long)]
    pub data: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Interpret a CSV file's last column as ±1 labels.
    #[arg(long, value_enum, default_value_t = TaskArg::Regression)]
    pub task: TaskArg,
    /// The CSV file has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Prepend an unpenalized intercept column.
    #[arg(long)]
    pub intercept: bool,
    #[arg(long, value_parser = parse_variant, default_value = "m-slack-gb")]
    pub variant: Variant,
    #[arg(long, default_value_t = 0.7)]
    pub tau: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.75)]
    pub nu: f64,
    /// Number of row blocks.
    #[arg(long = "M", default_value_t = 1)]
    pub blocks: usize,
    #[arg(long, value_parser = parse_penalty, default_value = "l1")]
    pub penalty: PenaltyKind,
    /// Regularization level; HBIC selection over a grid when omitted.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Concavity of SCAD/MCP.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Iterations run before the stopping rule is consulted.
    #[arg(long, default_value_t = 0)]
    pub min_iter: usize,
    #[arg(long, default_value_t = 0.01)]
    pub init: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shuffle rows (with `--seed`) before partitioning into blocks.
    #[arg(long)]
    pub shuffle: bool,
    /// Keep corrected slacks unprojected.
    #[arg(long)]
    pub no_clamp: bool,
    /// Maximum LLA outer steps for SCAD/MCP.
    #[arg(long, default_value_t = 3)]
    pub max_outer: usize,
    #[arg(long, default_value_t = 20)]
    pub grid_points: usize,
    /// Smallest grid value as a fraction of λ_max.
    #[arg(long, default_value_t = 0.01)]
    pub grid_ratio: f64,
    /// Result JSON path.
    #[arg(long, default_value = "fit.json")]
    pub out: PathBuf,
    /// Per-iteration trace CSV path.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Negative-control hook: apply the back-substitution correction with a flipped sign.
    #[arg(long, hide = true)]
    pub break_correction: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Experiment descriptor (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory receiving the CSV, timing and manifest files.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Overrides the descriptor's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the descriptor's replication count.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Include per-iteration traces in the manifest.
    #[arg(long)]
    pub traces: bool,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long = "M", default_value_t = 2)]
    pub blocks: usize,
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    #[arg(long, default_value_t = 5)]
    pub rows_per_block: usize,
    #[arg(long, default_value_t = 0.7)]
    pub tau: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.75)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[arg(long, default_value_t = 50)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the check results as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub break_correction: bool,
}
