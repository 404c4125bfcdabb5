//! Subcommands. Flags override values read from `--config`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use llob_core::dual::{dual_grid, run_dual_pde, DualBookParams};
use llob_core::integral::log_grid;
use llob_core::params::{participation_rate, BookParams, MetaorderSpec};
use llob_core::pde::{run_metaorder, Grid};
use llob_core::synth::{synth_generate, SynthConfig, SynthModel};
use llob_core::RegimeWarning;

use crate::config::{self, BookConfig, FitFileConfig, ScalingFnConfig, SimulateConfig, SynthFileConfig};
use crate::error::{CliError, Result};
use crate::pipeline::{analyse, FitReport};
use crate::{io, scaling};

#[derive(Debug, Parser)]
#[command(name = "llob", version, about = "Latent order book impact: simulation, scaling function, synthetic data and crossover fits")]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a metaorder through the finite-difference book.
    Simulate(SimulateArgs),
    /// Tabulate F(eta) on a log grid.
    ScalingFn(ScalingFnArgs),
    /// Generate synthetic metaorder records.
    Synth(SynthArgs),
    /// Estimate the crossover from metaorder records.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScalingFnArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub eta_min: Option<f64>,
    #[arg(long)]
    pub eta_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// `eta,F` table to use instead of solving for F.
    #[arg(long)]
    pub scaling: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Records CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub phi_min: Option<f64>,
    /// Also fit the halves below and above the median duration.
    #[arg(long)]
    pub by_duration: bool,
    /// Also fit eta* per duration bin.
    #[arg(long = "eta-star-vs-T")]
    pub eta_star_vs_t: bool,
    #[arg(long = "T-bins")]
    pub t_bins: Option<usize>,
    /// `eta,F` table to use instead of solving for F.
    #[arg(long)]
    pub scaling: Option<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::ScalingFn(a) => scaling_fn(a),
        Command::Synth(a) => synth(a),
        Command::Fit(a) => fit(a),
    }
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn warning_text(w: &RegimeWarning) -> String {
    match w {
        RegimeWarning::SlowBook { nu_t } => format!("slow book not slow: nu T = {nu_t}"),
        RegimeWarning::FastBook { nu_t } => format!("fast book not fast: nu T = {nu_t}"),
        RegimeWarning::FlowRatio { ratio } => format!("J_s / J_f = {ratio} is not small"),
    }
}

#[derive(Debug, Serialize)]
struct SimulateSummary {
    #[serde(rename = "I")]
    impact: f64,
    eta: f64,
    /// `I / sqrt(D Q / J)`, with the slow book for two books.
    #[serde(rename = "F_implied")]
    f_implied: f64,
    model: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    slow_share: Option<f64>,
    cells: usize,
    x_min: f64,
    x_max: f64,
    dx: f64,
    dt: f64,
    steps: usize,
    warnings: Vec<String>,
    config: SimulateConfig,
}

fn implied_scaling(book: &BookParams, spec: &MetaorderSpec, impact: f64) -> f64 {
    if spec.volume() == 0.0 {
        return 0.0;
    }
    impact.abs() / (book.d() * spec.volume() / book.transaction_rate()).sqrt()
}

fn grid_for(cfg: &SimulateConfig, model: &SynthModel, spec: &MetaorderSpec) -> Result<Grid> {
    let n = cfg.grid.cells;
    let grid = match (cfg.grid.half_width, model) {
        (Some(h), _) => Grid::symmetric(h, n),
        (None, SynthModel::Single(p)) => Grid::for_metaorder(p, spec, n),
        (None, SynthModel::Dual(p)) => dual_grid(p, spec, n),
    };
    grid.map_err(CliError::solver)
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut cfg: SimulateConfig = config::load(&args.config)?;
    if let Some(n) = args.cells {
        cfg.grid.cells = n;
    }
    if args.dt.is_some() {
        cfg.dt = args.dt;
    }
    let model = cfg.model()?;
    let spec = cfg.metaorder.spec()?;
    let grid = grid_for(&cfg, &model, &spec)?;
    let d_max = match &model {
        SynthModel::Single(p) => p.d(),
        SynthModel::Dual(p) => p.slow.d().max(p.fast.d()),
    };
    let dt_requested = cfg.dt.unwrap_or_else(|| grid.max_stable_dt(d_max));
    let (times, prices, impact, slow_share, warnings, book, rate) = match &model {
        SynthModel::Single(p) => {
            let run = run_metaorder(p, &spec, grid, dt_requested).map_err(CliError::solver)?;
            (run.times, run.prices, run.impact, None, run.warnings, *p, p.transaction_rate())
        }
        SynthModel::Dual(p) => {
            let run = run_dual_pde(p, &spec, grid, dt_requested).map_err(CliError::solver)?;
            (run.times, run.prices, run.impact, Some(run.slow_share), run.warnings, p.slow, p.fast.transaction_rate())
        }
    };
    let steps = times.len() - 1;
    for w in &warnings {
        log::warn!("{}", warning_text(w));
    }
    out_dir(&args.out)?;
    let path = args.out.join("trajectory.csv");
    io::write_trajectory(io::create(&path)?, &times, &prices).map_err(io::csv_error(&path))?;
    cfg.dt = Some(dt_requested);
    cfg.grid.half_width = Some(grid.x_max());
    if let SynthModel::Dual(DualBookParams { slow, fast }) = &model {
        cfg.slow = Some(BookConfig::from(slow));
        cfg.fast = Some(BookConfig::from(fast));
        cfg.crossover = None;
    }
    let summary = SimulateSummary {
        impact,
        eta: participation_rate(&spec, rate),
        f_implied: implied_scaling(&book, &spec, impact),
        model: if slow_share.is_some() { "dual" } else { "single" },
        slow_share,
        cells: grid.n_cells(),
        x_min: grid.x_min(),
        x_max: grid.x_max(),
        dx: grid.dx(),
        dt: spec.duration() / steps as f64,
        steps,
        warnings: warnings.iter().map(warning_text).collect(),
        config: cfg,
    };
    io::write_json(&args.out.join("summary.json"), &summary)
}

pub fn scaling_fn(args: &ScalingFnArgs) -> Result<()> {
    let mut cfg: ScalingFnConfig = config::load_or_default(args.config.as_deref())?;
    cfg.eta_min = args.eta_min.unwrap_or(cfg.eta_min);
    cfg.eta_max = args.eta_max.unwrap_or(cfg.eta_max);
    cfg.points = args.points.unwrap_or(cfg.points);
    let valid = cfg.eta_min.is_finite() && cfg.eta_max.is_finite() && cfg.eta_min > 0.0 && cfg.eta_min <= cfg.eta_max;
    if !valid || cfg.points == 0 || (cfg.points > 1 && cfg.eta_min == cfg.eta_max) {
        return Err(CliError::Config(format!(
            "empty eta range: need 0 < eta_min < eta_max and points >= 1, got [{}, {}] with {} points",
            cfg.eta_min, cfg.eta_max, cfg.points
        )));
    }
    let etas = if cfg.points == 1 { vec![cfg.eta_min] } else { log_grid(cfg.points, cfg.eta_min, cfg.eta_max) };
    let values = scaling::evaluate(&etas, cfg.n_steps, cfg.tol).map_err(CliError::solver)?;
    out_dir(&args.out)?;
    let path = args.out.join("scaling.csv");
    io::write_scaling(io::create(&path)?, &etas, &values).map_err(io::csv_error(&path))
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let mut cfg: SynthFileConfig = config::load(&args.config)?;
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.n = args.n.unwrap_or(cfg.n);
    cfg.noise_sigma = args.noise_sigma.unwrap_or(cfg.noise_sigma);
    let synth_cfg = SynthConfig {
        model: cfg.model()?,
        n: cfg.n,
        q_range: cfg.q_range,
        t_range: cfg.t_range,
        noise_sigma: cfg.noise_sigma,
        noise: cfg.noise.into(),
        seed: cfg.seed,
    };
    synth_cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let table = scaling::table_or_file(args.scaling.as_deref())?;
    let records = synth_generate(&synth_cfg, &table).map_err(CliError::solver)?;
    out_dir(&args.out)?;
    let path = args.out.join("records.csv");
    io::write_records(io::create(&path)?, &records).map_err(io::csv_error(&path))?;
    io::write_json(&args.out.join("synth.json"), &cfg)
}

fn fit_settings(args: &FitArgs) -> Result<(FitFileConfig, PathBuf)> {
    let mut cfg: FitFileConfig = config::load_or_default(args.config.as_deref())?;
    if let Some(p) = &args.input {
        cfg.input = Some(p.display().to_string());
    }
    cfg.bins = args.bins.unwrap_or(cfg.bins);
    cfg.phi_min = args.phi_min.unwrap_or(cfg.phi_min);
    cfg.by_duration |= args.by_duration;
    cfg.eta_star_vs_t |= args.eta_star_vs_t;
    cfg.t_bins = args.t_bins.unwrap_or(cfg.t_bins);
    if cfg.bins < 2 {
        return Err(CliError::Config("bins must be >= 2".into()));
    }
    if !(cfg.phi_min.is_finite() && cfg.phi_min >= 0.0) {
        return Err(CliError::Config("phi_min must be finite and >= 0".into()));
    }
    if cfg.eta_star_vs_t && cfg.t_bins < 3 {
        return Err(CliError::Config("T_bins must be >= 3".into()));
    }
    let input = cfg.input.clone().ok_or_else(|| CliError::Config("no input file: pass --input or set `input`".into()))?;
    Ok((cfg, PathBuf::from(input)))
}

pub fn fit(args: &FitArgs) -> Result<()> {
    let (cfg, input) = fit_settings(args)?;
    let records = io::read_records_file(&input)?;
    let table = scaling::table_or_file(args.scaling.as_deref())?;
    let analysis = analyse(&records, &cfg, &table);
    let report = FitReport::new(&analysis, &cfg);
    out_dir(&args.out)?;
    if let Some(err) = analysis.failure() {
        io::write_json(&args.out.join("diagnostics.json"), &report)?;
        return Err(CliError::statistical(err.clone()));
    }
    if let Ok(curve) = &analysis.curve {
        let path = args.out.join("curve.csv");
        io::write_curve(io::create(&path)?, &curve.bins).map_err(io::csv_error(&path))?;
    }
    if let Some(Ok(halves)) = &analysis.by_duration {
        for (name, half) in [("curve_short.csv", &halves.short), ("curve_long.csv", &halves.long)] {
            if let Ok(curve) = &half.curve {
                let path = args.out.join(name);
                io::write_curve(io::create(&path)?, &curve.bins).map_err(io::csv_error(&path))?;
            }
        }
    }
    io::write_json(&args.out.join("report.json"), &report)
}
