use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use quadopo::config::ParamsFile;

#[derive(Debug, Parser)]
#[command(
    name = "quadopo",
    version,
    about = "Figure data for the quadruply concurrent OPO analysis"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Parameter file (TOML, or JSON by extension).
    #[arg(long, global = true, value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// Output directory.
    #[arg(
        long,
        global = true,
        env = "QUADOPO_OUT",
        default_value = "quadopo-out"
    )]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub chi: Option<f64>,
    #[arg(long, global = true)]
    pub chi1: Option<f64>,
    #[arg(long, global = true)]
    pub chi2: Option<f64>,
    /// Loss rate of every mode.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Pump amplitude of both pumps.
    #[arg(long, global = true, conflicts_with = "eps_ratio")]
    pub eps: Option<f64>,
    /// Pump amplitude as a multiple of the oscillation threshold.
    #[arg(long, global = true)]
    pub eps_ratio: Option<f64>,
    #[arg(long, global = true)]
    pub eps1: Option<f64>,
    #[arg(long, global = true)]
    pub eps2: Option<f64>,
    /// Injected signal amplitude on mode 3.
    #[arg(long, global = true, value_name = "EPS3")]
    pub inject: Option<f64>,
}

impl Common {
    pub fn overrides(&self) -> ParamsFile {
        ParamsFile {
            chi: self.chi,
            chi1: self.chi1,
            chi2: self.chi2,
            gamma: self.gamma,
            eps: self.eps,
            eps_ratio: self.eps_ratio,
            eps1: self.eps1,
            eps2: self.eps2,
            eps3: self.inject,
            ..ParamsFile::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimized VLF correlations in the undepleted-pump approximation.
    Undepleted(UndepletedArgs),
    /// Positive-P simulation, free or inside the cavity.
    Posp(PospArgs),
    /// Linearized output spectra at one pump level.
    Spectra(SpectraArgs),
    /// Minimum output correlations across pump levels.
    Scan(ScanArgs),
    /// Nullifier residuals and joint-operator variances without depletion.
    Cluster(ClusterArgs),
    /// Print the oscillation threshold.
    Threshold,
    /// Produce every figure with default settings.
    AllFigures(AllArgs),
}

#[derive(Debug, Clone, Args)]
pub struct UndepletedArgs {
    /// ξ2/ξ1; 1 writes fig02.csv, anything else fig03.csv.
    #[arg(long, default_value_t = 1.0)]
    pub xi2_ratio: f64,
    /// Largest ξ1 t.
    #[arg(long, default_value_t = 2.5)]
    pub xi_t_max: f64,
    #[arg(long, default_value_t = 251)]
    pub points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PospArgs {
    /// Include pumping, losses and injection (writes fig11.csv); otherwise
    /// free evolution (writes fig04.csv and fig10.csv).
    #[arg(long)]
    pub cavity: bool,
    #[arg(long)]
    pub trajectories: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Number of output intervals.
    #[arg(long)]
    pub outputs: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Initial pump amplitude for free evolution.
    #[arg(long, default_value_t = 1000.0)]
    pub alpha0: f64,
    /// Trajectory counts used for the published figures.
    #[arg(long)]
    pub paper_scale: bool,
    /// Save a checkpoint here after every output interval.
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<std::path::PathBuf>,
    /// Continue from the checkpoint file if it exists.
    #[arg(long, requires = "checkpoint")]
    pub resume: bool,
    /// Stop after writing this many output rows; resume later from the checkpoint.
    #[arg(long, value_name = "ROWS", requires = "checkpoint")]
    pub halt_after: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectraArgs {
    /// Largest analysis frequency in units of γ.
    #[arg(long, default_value_t = 5.0)]
    pub omega_max: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 0.5)]
    pub from: f64,
    #[arg(long, default_value_t = 1.6)]
    pub to: f64,
    #[arg(long, default_value_t = 0.005)]
    pub step: f64,
    /// Injected signal used above threshold when `--inject` is not given.
    #[arg(long, default_value_t = 0.5)]
    pub scan_injection: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[arg(long, default_value_t = 8.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 161)]
    pub points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct AllArgs {
    #[arg(long)]
    pub paper_scale: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}
