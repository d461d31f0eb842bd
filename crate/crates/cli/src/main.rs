//! `qaoa-mps`: instance generation, simulation sweeps, training and reports.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qaoa_mps::mps::DEFAULT_CUTOFF;
use qaoa_mps::{NormMode, ProblemKind};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "qaoa-mps", version, about = "QAOA simulation on bond-capped matrix product states")]
pub struct Cli {
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    /// Floating-point precision of the tensors.
    #[arg(long, global = true, value_enum, default_value_t = Precision::F64)]
    pub precision: Precision,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    F64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate seeded problem instances with certificates.
    Generate(GenerateArgs),
    /// Print the Ising encoding of an instance.
    Encode(EncodeArgs),
    /// Simulate one instance and report samples and diagnostics.
    Run(RunArgs),
    /// Run every instance over the (D, p) grid.
    Sweep(SweepArgs),
    /// Train angle schedules.
    Train(TrainArgs),
    /// Dump the p = 1 cost landscape.
    Landscape(LandscapeArgs),
    /// Deterministic sample of a simulated QAOA state.
    Sample(SampleArgs),
    /// Ground-state certificate of an instance.
    Oracle(OracleArgs),
    /// Summarize a sweep CSV as (D, p) tables.
    Report(ReportArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub kind: ProblemKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Master seed; instance `i` uses a seed derived from `(seed, i)`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge probability of the MaxCut graphs.
    #[arg(long, default_value_t = 0.5)]
    pub edge_prob: f64,
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EncodeArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Bond caps, depths, cutoff and normalization.
#[derive(Args, Debug, Serialize)]
pub struct SimArgs {
    /// Bond-dimension caps; defaults to the untruncated bond.
    #[arg(long, value_delimiter = ',')]
    pub bond_dims: Vec<usize>,
    /// Circuit depths; defaults to the depth of the angle file.
    #[arg(long, value_delimiter = ',')]
    pub depths: Vec<usize>,
    /// Relative singular-value cutoff.
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub epsilon: f64,
    #[arg(long, default_value_t = NormMode::NonNormalized)]
    pub mode: NormMode,
}

#[derive(Args, Debug, Serialize)]
pub struct RunArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub angles: PathBuf,
    #[command(flatten)]
    pub sim: SimArgs,
    /// JSON output file; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    /// Instance file or directory of instance files.
    #[arg(long)]
    pub instance: PathBuf,
    /// Shared angle file, or a directory holding `<instance id>.json`.
    #[arg(long)]
    pub angles: PathBuf,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Also compute fidelities against the exact state.
    #[arg(long)]
    pub fidelity: bool,
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Grid search, ramp extrapolation and refinement per instance, then
    /// the mean schedule.
    Shared,
    /// Latin-hypercube plus Nelder-Mead restarts per instance and depth.
    Multistart,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refine {
    Ramp,
    Full,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Strategy::Shared)]
    pub strategy: Strategy,
    /// Bond caps to train at.
    #[arg(long, value_delimiter = ',', required = true)]
    pub bond_dims: Vec<usize>,
    /// Depths; the shared strategy trains up to the largest.
    #[arg(long, value_delimiter = ',', required = true)]
    pub depths: Vec<usize>,
    #[arg(long, default_value_t = NormMode::NonNormalized)]
    pub mode: NormMode,
    /// Optimizer budget `init,total`.
    #[arg(long, value_parser = parse_budget, default_value = "200,500")]
    pub budget: (usize, usize),
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid points per axis of the p = 1 search.
    #[arg(long, default_value_t = 40)]
    pub resolution: usize,
    #[arg(long, value_enum, default_value_t = Refine::Ramp)]
    pub refine: Refine,
    /// Evaluation cap of the local refinement.
    #[arg(long, default_value_t = 40)]
    pub refine_evals: usize,
    /// Also write success percentages per depth.
    #[arg(long)]
    pub success: bool,
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct LandscapeArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub bond_dims: Vec<usize>,
    /// Grid points per axis.
    #[arg(long, default_value_t = 50)]
    pub resolution: usize,
    #[arg(long, default_value_t = NormMode::NonNormalized)]
    pub mode: NormMode,
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub angles: PathBuf,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct OracleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Seed of the heuristic used above the enumeration limit.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the instance with its certificate embedded.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ReportArgs {
    /// Cell CSV written by `sweep`.
    pub input: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn parse_budget(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected `init,total`")?;
    let a = a.trim().parse().map_err(|e| format!("init: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("total: {e}"))?;
    Ok((a, b))
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()?;
    }
    commands::dispatch(&cli)
}
