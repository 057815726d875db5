//! Command-line front end. Every subcommand writes self-describing JSON,
//! CSV or PGM artifacts into the output directory.

mod commands;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

pub use commands::*;
pub use output::{Artifacts, RunHeader};

#[derive(Debug, Parser)]
#[command(
    name = "oamqi",
    version,
    about = "OAM up-conversion interface simulator"
)]
pub struct Cli {
    /// Experiment config (JSON). Defaults to the shipped reference values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config's seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "OAMQI_OUT_DIR", default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Overlap factor h(l, ξ).
    HIntegral(HIntegralArgs),
    /// Circulating pump power for unity conversion.
    Pmax(GeometryArgs),
    /// Conversion efficiency at the operating pump power.
    Efficiency(EfficiencyArgs),
    /// η(l)/η(0) against l.
    EfficiencyCurve(CurveArgs),
    /// Intensity pattern and optional ICCD acquisition.
    Render(RenderArgs),
    /// HWP phase scan of coincidences and fringe fit.
    Interference(InterferenceArgs),
    /// Fibre-position coupling scan, optionally with g².
    SmfScan(SmfArgs),
    /// Heralded-pair Monte Carlo and g² estimate.
    G2Sim(G2Args),
    /// Internal efficiency from the herald rate and loss chain.
    LossChain(LossArgs),
    /// Crystal-face photon rates from APD count rates.
    CalibrateApd(ApdArgs),
    /// Run the preset for one figure panel.
    Reproduce(ReproduceArgs),
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::HIntegral(_) => "h-integral".into(),
            Command::Pmax(_) => "pmax".into(),
            Command::Efficiency(_) => "efficiency".into(),
            Command::EfficiencyCurve(_) => "efficiency-curve".into(),
            Command::Render(_) => "render".into(),
            Command::Interference(_) => "interference".into(),
            Command::SmfScan(_) => "smf-scan".into(),
            Command::G2Sim(_) => "g2-sim".into(),
            Command::LossChain(_) => "loss-chain".into(),
            Command::CalibrateApd(_) => "calibrate-apd".into(),
            Command::Reproduce(a) => format!("reproduce {}", a.figure.id()),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct GeometryArgs {
    /// Focusing parameter ξ (default: config).
    #[arg(long)]
    pub xi: Option<f64>,
    /// Signal/pump Rayleigh-range ratio α (default: config).
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HIntegralArgs {
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub l: i32,
    #[command(flatten)]
    #[serde(flatten)]
    pub geometry: GeometryArgs,
    /// Relative tolerance of the cubature.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EfficiencyArgs {
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub l: i32,
    /// Circulating pump power in W (default: config).
    #[arg(long)]
    pub pump_power: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub geometry: GeometryArgs,
    /// Measured power efficiency P_SFG/P_signal to convert and check.
    #[arg(long, requires = "reported_quantum_efficiency")]
    pub measured_power_efficiency: Option<f64>,
    /// Reported quantum efficiency the conversion is compared with.
    #[arg(long, requires = "measured_power_efficiency")]
    pub reported_quantum_efficiency: Option<f64>,
    /// Relative discrepancy above which the comparison is flagged.
    #[arg(long, default_value_t = 0.02)]
    pub flag_tolerance: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurveArgs {
    #[arg(long, default_value_t = 3)]
    pub l_max: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub geometry: GeometryArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternKind {
    /// Single OAM mode |l⟩.
    Donut,
    /// Up-converted (|l⟩ + e^{iθ}|−l⟩)/√2.
    Superposition,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RenderArgs {
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub l: i32,
    /// Interferometer phase θ (rad).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    /// Up-converted superposition of ±l instead of the single mode |l⟩.
    #[arg(long)]
    pub superposition: bool,
    /// Also simulate the ICCD acquisition (implied by --frames or --dark).
    #[arg(long)]
    pub iccd: bool,
    /// Frames per image (default: config).
    #[arg(long)]
    pub frames: Option<u32>,
    /// Dark counts per pixel per frame (default: config).
    #[arg(long)]
    pub dark: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InterferenceArgs {
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub l: i32,
    /// Output-state visibility (default: config).
    #[arg(long)]
    pub visibility: Option<f64>,
    #[arg(long)]
    pub peak_counts: Option<f64>,
    #[arg(long)]
    pub phases: Option<usize>,
    /// Expected counts instead of Poisson draws.
    #[arg(long)]
    pub noiseless: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SmfArgs {
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub l: i32,
    /// Number of fibre positions (default: config).
    #[arg(long)]
    pub points: Option<usize>,
    /// Also simulate g² at every position.
    #[arg(long)]
    pub g2: bool,
    /// Calibrate the noise floor to this maximum g² (default: config for l = 1, 2).
    #[arg(long)]
    pub target_max_g2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum G2Preset {
    /// The pair source as configured, unit channel.
    Source,
    /// After conversion, with the signal noise floor calibrated to the target g².
    PostConversion,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct G2Args {
    #[arg(long, value_enum, default_value_t = G2Preset::Source)]
    pub preset: G2Preset,
    /// Acquisition time in s (default: config).
    #[arg(long)]
    pub duration: Option<f64>,
    /// Export the click streams as CSV.
    #[arg(long)]
    pub clicks: bool,
    /// Export a coincidence histogram (±50 windows).
    #[arg(long)]
    pub histogram: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LossArgs {
    /// Detected herald rate per heralded photon (default: config).
    #[arg(long)]
    pub herald_rate: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ApdArgs {
    /// Calibrate a single count rate instead of the configured states.
    #[arg(long, requires = "transmission")]
    pub count_rate: Option<f64>,
    #[arg(long, requires = "count_rate")]
    pub transmission: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Figure {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2d,
    Fig2e,
    Fig2f,
    Fig3e,
    Fig3f,
    Fig3g,
    Fig3h,
    Fig3i,
    Fig3jk,
}

impl Figure {
    pub fn id(&self) -> &'static str {
        match self {
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig2c => "fig2c",
            Figure::Fig2d => "fig2d",
            Figure::Fig2e => "fig2e",
            Figure::Fig2f => "fig2f",
            Figure::Fig3e => "fig3e",
            Figure::Fig3f => "fig3f",
            Figure::Fig3g => "fig3g",
            Figure::Fig3h => "fig3h",
            Figure::Fig3i => "fig3i",
            Figure::Fig3jk => "fig3jk",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub figure: Figure,
}

/// Resolves the configuration (flag > file > default) and runs the command.
/// Returns the artifact paths.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed)?;
    }
    let header = RunHeader {
        command: cli.command.name(),
        args: serde_json::to_value(&cli.command)?,
        config_hash: cfg.hash(),
        seed: cfg.seed,
        config: cfg.clone(),
    };
    let mut out = Artifacts::new(&cli.out, header)?;
    dispatch(&cfg, &cli.command, &mut out)?;
    Ok(out.into_written())
}

fn dispatch(cfg: &ExperimentConfig, command: &Command, out: &mut Artifacts) -> Result<()> {
    match command {
        Command::HIntegral(a) => h_integral_cmd(cfg, a, out).map(|_| ()),
        Command::Pmax(a) => pmax_cmd(cfg, a, out).map(|_| ()),
        Command::Efficiency(a) => efficiency_cmd(cfg, a, out).map(|_| ()),
        Command::EfficiencyCurve(a) => efficiency_curve_cmd(cfg, a, out).map(|_| ()),
        Command::Render(a) => render_cmd(cfg, a, out).map(|_| ()),
        Command::Interference(a) => interference_cmd(cfg, a, out).map(|_| ()),
        Command::SmfScan(a) => smf_scan_cmd(cfg, a, out).map(|_| ()),
        Command::G2Sim(a) => g2_sim_cmd(cfg, a, out).map(|_| ()),
        Command::LossChain(a) => loss_chain_cmd(cfg, a, out).map(|_| ()),
        Command::CalibrateApd(a) => calibrate_apd_cmd(cfg, a, out).map(|_| ()),
        Command::Reproduce(a) => reproduce(cfg, a.figure, out),
    }
}

/// `{"error": kind, "message": text}` for standard error.
pub fn error_json(e: &Error) -> String {
    serde_json::json!({ "error": e.kind(), "message": e.to_string() }).to_string()
}
