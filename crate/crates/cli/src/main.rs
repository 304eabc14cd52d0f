mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trajdist_core::synth::Knob;
use trajdist_core::{Backend, NormKind, SwitchCostKind};

/// Exit status for each outcome.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VERIFY_FAILED: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const NOT_CONVERGED: u8 = 3;
}

#[derive(Debug, Parser)]
#[command(name = "trajdist", version, about = "Distances between sets of trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute one distance between a ground-truth and a hypothesis file.
    Dist(DistArgs),
    /// Sweep the switch weight and print the trade-off curve as CSV.
    Tradeoff(TradeoffArgs),
    /// Generate a synthetic ground-truth/hypothesis pair.
    Gen(GenArgs),
    /// Run the property battery.
    Verify(VerifyArgs),
    /// Normalized area under trade-off curves, for one pair or a knob sweep.
    Auc(AucArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Ospa,
    Motp,
    Dnat,
    Dcomp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Colsum,
    Entrywise,
}

impl From<NormArg> for NormKind {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Colsum => NormKind::ColumnSum,
            NormArg::Entrywise => NormKind::Entrywise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KArg {
    Count,
    Trans,
    Adjtrans,
    Ospa,
    Maxcount,
}

impl From<KArg> for SwitchCostKind {
    fn from(k: KArg) -> Self {
        match k {
            KArg::Count => SwitchCostKind::Count,
            KArg::Trans => SwitchCostKind::Trans,
            KArg::Adjtrans => SwitchCostKind::Adjtrans,
            KArg::Ospa => SwitchCostKind::Ospa,
            KArg::Maxcount => SwitchCostKind::Maxcount,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Admm,
    Simplex,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Admm => Backend::Admm,
            BackendArg::Simplex => Backend::Simplex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Axioms,
    Counterexamples,
    Norm,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KnobArg {
    AmpNoise,
    FragProb,
    DelProb,
    SwiDist,
}

impl From<KnobArg> for Knob {
    fn from(k: KnobArg) -> Self {
        match k {
            KnobArg::AmpNoise => Knob::AmpNoise,
            KnobArg::FragProb => Knob::FragProb,
            KnobArg::DelProb => Knob::DelProb,
            KnobArg::SwiDist => Knob::SwiDist,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveKind {
    /// The convex metric swept over the switch weight.
    Dcomp,
    /// CLEAR MOT associations swept over the matching threshold.
    Motp,
}

/// Ground-truth and hypothesis CSV files plus the miss penalty.
#[derive(Debug, Args)]
pub struct PairArgs {
    /// Ground-truth trajectories (`track_id,frame,x1[,x2,...]`).
    pub ground_truth: PathBuf,
    /// Hypothesis trajectories, same format.
    pub hypothesis: PathBuf,
    /// Miss penalty M; distances are capped at 2M.
    #[arg(long = "M", alias = "miss-penalty", value_name = "M")]
    pub miss_penalty: f64,
}

/// Settings of the convex solver.
#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "colsum")]
    pub norm: NormArg,
    /// Relative optimality tolerance.
    #[arg(long, default_value_t = 0.01)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value = "admm")]
    pub backend: BackendArg,
    /// Fix association weights to zero where the distance exceeds this value.
    #[arg(long)]
    pub sparsify: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long, value_enum)]
    pub metric: Metric,
    /// Matching threshold (motp).
    #[arg(long)]
    pub thr: Option<f64>,
    /// Switch weight (dnat, dcomp).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Switch cost (dnat).
    #[arg(long = "K", value_enum)]
    pub k: Option<KArg>,
    /// Switch budget for `--K maxcount`.
    #[arg(long, default_value_t = 1)]
    pub beta: u32,
    /// Largest number of permutation sequences the exhaustive search may cover (dnat).
    #[arg(long, default_value_t = trajdist_core::exact::DEFAULT_ENUMERATION_CAP)]
    pub cap: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Include the association (permutations or weights) in the report.
    #[arg(long)]
    pub association: bool,
    /// Include wall time in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct TradeoffArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Comma-separated ascending switch weights (or thresholds with `--kind motp`).
    #[arg(long, value_delimiter = ',', conflicts_with = "auto_grid")]
    pub alphas: Option<Vec<f64>>,
    /// Use the default log-spaced grid for the data (the default when no grid is given).
    #[arg(long)]
    pub auto_grid: bool,
    #[arg(long, value_enum, default_value = "dcomp")]
    pub kind: CurveKind,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Generator settings; each flag overrides the config file.
#[derive(Debug, Args)]
pub struct GenFlags {
    /// JSON file with generator settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_traj: Option<usize>,
    #[arg(long)]
    pub t_horizon: Option<usize>,
    #[arg(long)]
    pub state_dim: Option<usize>,
    #[arg(long, alias = "AMPnoise")]
    pub amp_noise: Option<f64>,
    #[arg(long, alias = "FRAGprob")]
    pub frag_prob: Option<f64>,
    #[arg(long, alias = "DELprob")]
    pub del_prob: Option<f64>,
    #[arg(long, alias = "SWIdist")]
    pub swi_dist: Option<f64>,
    #[arg(long)]
    pub frag_drop_prob: Option<f64>,
    #[arg(long)]
    pub swap_prob: Option<f64>,
    /// Random seed; drawn from the OS and echoed when absent.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub gen: GenFlags,
    /// Writes `<prefix>_gt.csv`, `<prefix>_hyp.csv` and `<prefix>_config.json`.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random doubly stochastic quadruples for the norm suite.
    #[arg(long, default_value_t = 10_000)]
    pub norm_samples: usize,
    /// Print the report as JSON instead of one line per check.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct AucArgs {
    /// Ground-truth file (pair mode).
    #[arg(requires = "hypothesis", conflicts_with_all = ["curve", "sweep"])]
    pub ground_truth: Option<PathBuf>,
    /// Hypothesis file (pair mode).
    pub hypothesis: Option<PathBuf>,
    /// Miss penalty M (pair and sweep modes).
    #[arg(long = "M", alias = "miss-penalty", value_name = "M")]
    pub miss_penalty: Option<f64>,
    /// Curve CSV written by `tradeoff` (curve mode); needs `--max-dist` and `--max-swi`.
    #[arg(long, conflicts_with = "sweep", requires_all = ["max_dist", "max_swi"])]
    pub curve: Option<PathBuf>,
    #[arg(long)]
    pub max_dist: Option<f64>,
    #[arg(long)]
    pub max_swi: Option<f64>,
    /// Knob to sweep over synthetic pairs (sweep mode).
    #[arg(long, value_enum, requires = "values")]
    pub sweep: Option<KnobArg>,
    /// Comma-separated knob values.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[command(flatten)]
    pub gen: GenFlags,
    #[command(flatten)]
    pub solver: SolverArgs,
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("TRAJDIST_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| anyhow::anyhow!("TRAJDIST_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| match cli.command {
        Command::Dist(a) => commands::dist(&a),
        Command::Tradeoff(a) => commands::tradeoff(&a),
        Command::Gen(a) => commands::gen(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Auc(a) => commands::auc(&a),
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::INPUT)
        }
    }
}
