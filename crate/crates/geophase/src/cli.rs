//! Subcommands of the `geophase` binary.

use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use geophase_core::fringe::{
    chi_grid, fit_sinusoid, slope_at_zero, synthesize_scan, theta1_grid, CurveOptions, Exposure, FitOptions,
};
use geophase_core::geometric::closed_form_success_probability;
use geophase_core::nphoton::nphoton_postselect;
use geophase_core::snr::{
    direct_plateau, geometric_plateau, log_grid, snr_sweep, Scheme,
};
use geophase_core::{Error, NoiseModel, SetupConfig};

use crate::angle::parse_angle;
use crate::config;
use crate::output::{write_atomic, Cell, Format, Table};
use crate::parallel;
use crate::validate::{self, Status};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::FitDiverged(_) | Error::EmptyWindow | Error::DegenerateTriangle => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "geophase", version, about = "Nonlinear geometric phase of N photons: closed forms, fringes and noise")]
#[command(args_override_self = true)]
#[serde(rename_all = "kebab-case")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (written atomically); stdout when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, env = "GEOPHASE_SEED", default_value_t = 1)]
    pub seed: u64,
    /// key = value file of default flags; command-line flags win.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Write the complete resolved flag set as a config file.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub save_config: Option<PathBuf>,
    #[command(subcommand)]
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Closed-form phases and success probability for one setup.
    Phase(PhaseArgs),
    /// Curves over θ₁ (phase, probability) or over photon rate (SNR).
    Sweep(SweepArgs),
    /// Synthetic fringe scan with sinusoid fit, or a phase-shift curve.
    Fringe(FringeArgs),
    /// Monte Carlo check of the noise model against analytic predictions.
    McValidate(McValidateArgs),
}

pub const SUBCOMMANDS: &[&str] = &["phase", "sweep", "fringe", "mc-validate"];

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct NoiseArgs {
    /// Incident flux (photons or N-photon events per second).
    #[arg(long)]
    pub rate: Option<f64>,
    /// Relative intensity noise power ξ̄² (s).
    #[arg(long)]
    pub technical_power: Option<f64>,
    /// Integration time per window τ (s).
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Detection efficiency η.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
}

impl NoiseArgs {
    fn model(&self, default_rate: f64, default_technical: f64, seed: u64) -> Result<NoiseModel, CliError> {
        Ok(NoiseModel::new(
            self.rate.unwrap_or(default_rate),
            self.technical_power.unwrap_or(default_technical),
            self.tau,
            self.eta,
            seed,
        )?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PhaseArgs {
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta1: f64,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta2: f64,
    /// Photon number N.
    #[arg(long, default_value_t = 1)]
    pub n: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    PhaseCurve,
    ProbabilityCurve,
    Snr,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub kind: SweepKind,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "-90deg")]
    pub theta1_min: f64,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "90deg")]
    pub theta1_max: f64,
    /// Grid points along θ₁ or along M.
    #[arg(long, default_value_t = 181)]
    pub points: usize,
    /// θ₂ values (comma separated). Default 3.6deg,18deg,45deg for curves, 9deg for snr.
    #[arg(long, value_parser = parse_angle, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta2: Vec<f64>,
    /// Photon numbers (comma separated). Default 1 for curves, 1,2,3 for snr.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u32>,
    /// Signal angle for the snr sweep.
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "1deg")]
    pub theta1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub m_min: f64,
    #[arg(long, default_value_t = 1e14)]
    pub m_max: f64,
    /// Fringe visibility V_f of the geometric scheme.
    #[arg(long, default_value_t = 1.0)]
    pub visibility: f64,
    /// Leave the direct scheme out of the snr sweep.
    #[arg(long)]
    pub no_direct: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FringeMode {
    Scan,
    Curve,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FringeArgs {
    #[arg(long, value_enum, default_value_t = FringeMode::Scan)]
    pub mode: FringeMode,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "0")]
    pub theta1: f64,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true, default_value = "45deg")]
    pub theta2: f64,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// χ points per scan.
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// χ span of each scan, centered on zero.
    #[arg(long, value_parser = parse_angle, default_value = "720deg")]
    pub span: f64,
    /// Mean counts per point. Ignored when only --rate is given.
    #[arg(long)]
    pub mean_counts: Option<f64>,
    /// Phenomenological reduction of the fringe visibility.
    #[arg(long, default_value_t = 1.0)]
    pub visibility_factor: f64,
    /// Initial period for the fit; 2π/N by default.
    #[arg(long, value_parser = parse_angle)]
    pub period_hint: Option<f64>,
    /// Period search interval as multiples of the hint, "lo,hi".
    #[arg(long, value_delimiter = ',', default_values_t = [0.8, 1.25])]
    pub period_range: Vec<f64>,
    /// Hold the period at the hint.
    #[arg(long)]
    pub fixed_period: bool,
    /// Label χ as mirror displacement for this one-photon wavelength.
    #[arg(long)]
    pub wavelength_nm: Option<f64>,
    /// θ₁ grid points from −90° to 90° in curve mode.
    #[arg(long, default_value_t = 181)]
    pub grid_points: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct McValidateArgs {
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Simulate with 4× the nominal technical noise; checks are expected to fail.
    #[arg(long)]
    pub self_test_mismatch: bool,
}

/// Result of a command: the rendered output and whether any check failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub failed: bool,
}

/// Splices `--config` entries into `args` and parses them.
pub fn parse_args(args: Vec<String>) -> Result<Cli, clap::Error> {
    let args = config::splice(args, SUBCOMMANDS)
        .map_err(|e| clap::Error::raw(clap::error::ErrorKind::Io, format!("{e}\n")))?;
    Cli::try_parse_from(args)
}

/// Flag set of `cli` as config-file entries.
pub fn config_entries(cli: &Cli) -> Vec<(String, String)> {
    let Value::Object(map) = serde_json::to_value(cli).expect("arguments serialize") else {
        return Vec::new();
    };
    map.into_iter()
        .filter_map(|(k, v)| {
            let text = match v {
                Value::Null => return None,
                Value::Bool(false) => return None,
                Value::String(s) => s,
                Value::Array(items) => {
                    if items.is_empty() {
                        return None;
                    }
                    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
                }
                other => other.to_string(),
            };
            Some((k, text))
        })
        .collect()
}

/// Executes the parsed command and writes its output.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(path) = &cli.save_config {
        write_atomic(path, &config::render(&config_entries(cli)))
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    let (table, failed) = match &cli.command {
        Command::Phase(a) => (cmd_phase(a)?, false),
        Command::Sweep(a) => (cmd_sweep(a, cli.seed)?, false),
        Command::Fringe(a) => (cmd_fringe(a, cli.seed)?, false),
        Command::McValidate(a) => cmd_mc_validate(a, cli.seed)?,
    };
    let text = table.render(cli.format);
    if let Some(path) = &cli.output {
        write_atomic(path, &text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(Outcome { text, failed })
}

const PHASE_COLUMNS: &[&str] = &["theta1", "theta2", "n", "gamma", "phi_f", "phi_m", "p_success"];

fn phase_row(t: &mut Table, theta1: f64, theta2: f64, n: u32) -> Result<(), CliError> {
    let cfg = SetupConfig::new(theta1, theta2, n, 0.0)?;
    let r = nphoton_postselect(&cfg)?;
    t.push(vec![
        cfg.theta1().into(),
        theta2.into(),
        n.into(),
        r.geometric().into(),
        r.phase.into(),
        r.phase_m.into(),
        r.success_probability.into(),
    ]);
    Ok(())
}

pub fn cmd_phase(a: &PhaseArgs) -> Result<Table, CliError> {
    let mut t = Table::new(PHASE_COLUMNS);
    phase_row(&mut t, a.theta1, a.theta2, a.n)?;
    Ok(t)
}

fn linear_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points < 2 || !(hi > lo) {
        return Err(CliError::Validation("a sweep needs at least 2 points and min < max".into()));
    }
    Ok((0..points)
        .map(|i| if i == points - 1 { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 })
        .collect())
}

pub fn cmd_sweep(a: &SweepArgs, seed: u64) -> Result<Table, CliError> {
    let curve_theta2 = [PI / 50.0, PI / 10.0, PI / 4.0];
    let theta2: Vec<f64> = match (a.theta2.is_empty(), a.kind) {
        (false, _) => a.theta2.clone(),
        (true, SweepKind::Snr) => vec![PI / 20.0],
        (true, _) => curve_theta2.to_vec(),
    };
    let ns: Vec<u32> = match (a.n.is_empty(), a.kind) {
        (false, _) => a.n.clone(),
        (true, SweepKind::Snr) => vec![1, 2, 3],
        (true, _) => vec![1],
    };
    match a.kind {
        SweepKind::PhaseCurve => {
            let mut t = Table::new(PHASE_COLUMNS);
            for &t2 in &theta2 {
                for &n in &ns {
                    for t1 in linear_grid(a.theta1_min, a.theta1_max, a.points)? {
                        phase_row(&mut t, t1, t2, n)?;
                    }
                }
            }
            Ok(t)
        }
        SweepKind::ProbabilityCurve => {
            let mut t = Table::new(&["theta1", "theta2", "n", "p_success", "p_one_photon"]);
            for &t2 in &theta2 {
                for &n in &ns {
                    for t1 in linear_grid(a.theta1_min, a.theta1_max, a.points)? {
                        let cfg = SetupConfig::new(t1, t2, n, 0.0)?;
                        let r = nphoton_postselect(&cfg)?;
                        t.push(vec![
                            cfg.theta1().into(),
                            t2.into(),
                            n.into(),
                            r.success_probability.into(),
                            closed_form_success_probability(cfg.theta1(), t2).into(),
                        ]);
                    }
                }
            }
            Ok(t)
        }
        SweepKind::Snr => {
            let model = a.noise.model(0.0, 2.5e-5, seed)?;
            let ms = log_grid(a.m_min, a.m_max, a.points)?;
            let mut t = Table::new(&["scheme", "n", "theta2", "m_total", "snr"]);
            if !a.no_direct {
                let template = SetupConfig::new(a.theta1, PI / 4.0, 1, 0.0)?;
                let sweep = snr_sweep(Scheme::Direct, &template, 1.0, &ms, &model)?;
                for p in &sweep.points {
                    t.push(vec!["direct".into(), 1u32.into(), Cell::Empty, p.total_photon_rate.into(), p.snr.into()]);
                }
                t.trailer(
                    "crossover",
                    vec![
                        ("scheme", "direct".into()),
                        ("n", 1u32.into()),
                        ("theta2", Cell::Empty),
                        ("m_star", sweep.crossover.into()),
                        ("plateau", direct_plateau(a.theta1, &model).into()),
                    ],
                );
            }
            for &t2 in &theta2 {
                for &n in &ns {
                    let template = SetupConfig::new(a.theta1, t2, n, 0.0)?;
                    let sweep = snr_sweep(Scheme::Geometric, &template, a.visibility, &ms, &model)?;
                    for p in &sweep.points {
                        t.push(vec!["geometric".into(), n.into(), t2.into(), p.total_photon_rate.into(), p.snr.into()]);
                    }
                    let linear = sweep.points.first().is_none_or(|p| p.linear_regime);
                    t.trailer(
                        "crossover",
                        vec![
                            ("scheme", "geometric".into()),
                            ("n", n.into()),
                            ("theta2", t2.into()),
                            ("m_star", sweep.crossover.into()),
                            ("plateau", geometric_plateau(&template, a.visibility, &model).into()),
                            ("linear_regime", linear.into()),
                        ],
                    );
                }
            }
            Ok(t)
        }
    }
}

fn fit_options(a: &FringeArgs) -> Result<FitOptions, CliError> {
    if a.fixed_period {
        return Ok(FitOptions::fixed_period());
    }
    match a.period_range.as_slice() {
        [lo, hi] => Ok(FitOptions::with_period_range(*lo, *hi)),
        _ => Err(CliError::Validation("--period-range takes two values: lo,hi".into())),
    }
}

fn exposure(a: &FringeArgs) -> Exposure {
    match (a.mean_counts, a.noise.rate) {
        (Some(c), _) => Exposure::MeanCounts(c),
        (None, Some(_)) => Exposure::Model,
        (None, None) => Exposure::MeanCounts(1e3),
    }
}

fn fit_fields(fit: &geophase_core::fringe::FringeFit) -> Vec<(&'static str, Cell)> {
    vec![
        ("amplitude", fit.amplitude.into()),
        ("offset", fit.offset.into()),
        ("phase", fit.phase.into()),
        ("period", fit.period.into()),
        ("visibility", fit.visibility.into()),
        ("residual_rms", fit.residual_rms.into()),
        ("phase_stderr", fit.phase_stderr.into()),
        ("visibility_stderr", fit.visibility_stderr.into()),
        ("period_stderr", fit.period_stderr.into()),
        ("reduced_chi2", fit.reduced_chi2.into()),
    ]
}

pub fn cmd_fringe(a: &FringeArgs, seed: u64) -> Result<Table, CliError> {
    let model = a.noise.model(1e6, 0.0, seed)?;
    let options = fit_options(a)?;
    match a.mode {
        FringeMode::Scan => {
            let cfg = SetupConfig::new(a.theta1, a.theta2, a.n, 0.0)?;
            let chi = chi_grid(a.points, a.span);
            let scan = synthesize_scan(&cfg, &model, &chi, a.visibility_factor, exposure(a))?;
            let hint = a.period_hint.unwrap_or(TAU / f64::from(a.n));
            let fit = fit_sinusoid(&scan, hint, &options)?;
            let mut t = match a.wavelength_nm {
                Some(_) => Table::new(&["chi", "counts", "displacement_nm"]),
                None => Table::new(&["chi", "counts"]),
            };
            for (&x, &c) in scan.chi_values.iter().zip(&scan.counts) {
                let mut row: Vec<Cell> = vec![x.into(), c.into()];
                if let Some(lambda) = a.wavelength_nm {
                    row.push((x * lambda / TAU).into());
                }
                t.push(row);
            }
            t.trailer("fit", fit_fields(&fit));
            Ok(t)
        }
        FringeMode::Curve => {
            let curve_options = CurveOptions {
                points_per_scan: a.points,
                chi_span: a.span,
                exposure: exposure(a),
                visibility_factor: a.visibility_factor,
                fit: options,
                ..CurveOptions::default()
            };
            if a.grid_points < 2 {
                return Err(CliError::Validation("--grid-points must be at least 2".into()));
            }
            let grid = theta1_grid(a.grid_points);
            let curve = parallel::phase_shift_curve(a.theta2, &grid, a.n, &model, &curve_options)?;
            let mut t = Table::new(&["theta1", "displacement", "stderr", "theory", "flagged"]);
            for p in &curve {
                t.push(vec![p.theta1.into(), p.displacement.into(), p.stderr.into(), p.theory.into(), p.flagged.into()]);
            }
            let good: Vec<_> = curve.iter().filter(|p| !p.flagged).collect();
            let within = good
                .iter()
                .filter(|p| (p.displacement - p.theory).abs() <= 3.0 * p.stderr)
                .count();
            let end = curve.last().map_or(f64::NAN, |p| p.displacement);
            let mut fields: Vec<(&str, Cell)> = vec![
                ("span_periods", end.into()),
                ("within_3_stderr", (within as f64 / curve.len() as f64).into()),
                ("flagged", (curve.len() - good.len()).into()),
            ];
            if let Ok((slope, err)) = slope_at_zero(&curve, (a.theta2.abs().min(PI - a.theta2.abs()) / 2.0).max(0.05)) {
                fields.push(("slope_at_zero", slope.into()));
                fields.push(("slope_stderr", err.into()));
            }
            t.trailer("curve", fields);
            Ok(t)
        }
    }
}

pub fn cmd_mc_validate(a: &McValidateArgs, seed: u64) -> Result<(Table, bool), CliError> {
    let checks = validate::run_checks(a.trials, seed, a.self_test_mismatch)?;
    let failed = checks.iter().any(|c| c.status == Status::Fail);
    Ok((validate::report(&checks), failed))
}
