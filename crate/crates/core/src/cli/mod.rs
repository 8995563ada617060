//! The `roughinv` command-line tool.
//!
//! Exit codes: 0 on success, 1 when a run fails or finishes with failed
//! sweep points (artifacts are still written), 2 for usage and config errors.

pub mod config;
pub mod plot;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::experiments::{
    mhz_label, read_report, read_surface_csv, run_with_measurements, synthesize_measurements,
    write_report_bundle, write_surface_csv, ExperimentError, MeasurementSet, ReceiverSpec,
    ScenarioConfig, ScenarioReport, SurfaceSpec, Sweep, ERR_CURVE_FILE, PRESETS,
    PRESET_TAPER_WIDTH, REPORT_FILE,
};
use crate::forward::{
    scattered_field, solve_forward, wavenumber, ForwardError, IncidentWave, Medium, Wavenumbers,
};
use crate::inverse::{InverseConfig, InverseError};
use crate::surface::{
    generate_gaussian_surface, sample_surface, sample_surface_with_count, surface_statistics,
    Profile, RandomSurfaceParams, SplineBasis, SurfaceError,
};

use plot::{line_plot, Series};

pub const SURFACE_FILE: &str = "surface.csv";
pub const STATS_FILE: &str = "stats.json";
pub const SCATTERED_FILE: &str = "scattered.csv";
pub const SCATTERED_META_FILE: &str = "scattered.json";
pub const MEASUREMENTS_FILE: &str = "measurements.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Config(_) => 2,
            Self::Runtime(_) => 1,
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        let config = match &e {
            ExperimentError::InvalidConfig(_) => true,
            ExperimentError::Inverse(i) => is_config_inverse(i),
            ExperimentError::Forward(ForwardError::InvalidParameter(_)) => true,
            ExperimentError::Surface(SurfaceError::InvalidParameter(_)) => true,
            _ => false,
        };
        if config {
            Self::Config(e.to_string())
        } else {
            Self::Runtime(e.to_string())
        }
    }
}

fn is_config_inverse(e: &InverseError) -> bool {
    matches!(
        e,
        InverseError::InvalidParameter(_)
            | InverseError::EmptySchedule(_)
            | InverseError::Surface(SurfaceError::InvalidParameter(_))
    )
}

impl From<ForwardError> for CliError {
    fn from(e: ForwardError) -> Self {
        ExperimentError::from(e).into()
    }
}

impl From<SurfaceError> for CliError {
    fn from(e: SurfaceError) -> Self {
        ExperimentError::from(e).into()
    }
}

#[derive(Debug, Parser)]
#[command(name = "roughinv", version, about = "Multi-frequency reconstruction of a rough dielectric interface")]
pub struct Cli {
    /// JSON config; numbers may carry units ("600 MHz", "25 cm", "20 deg", "5 %").
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory (created if absent).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Master seed; replaces the surface seed and the noise seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    /// Only log warnings and errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a Gaussian random surface and report its statistics.
    GenSurface,
    /// Scattered field of a surface at one frequency.
    Forward,
    /// Reconstruct a surface from synthesized or recorded measurements.
    Reconstruct {
        /// Measurement set written by an earlier run (measurements.json).
        #[arg(long, value_name = "FILE")]
        measurements: Option<PathBuf>,
    },
    /// Run a canned scenario; --config is merged over the preset.
    Experiment {
        /// One of: convergence, multi_vs_single, frequency_step, sharp_profile, noise, receiver_spacing.
        preset: Option<String>,
    },
    /// Render SVG plots of a report directory.
    Plot {
        /// Directory containing report.json.
        report: PathBuf,
    },
}

pub fn main() -> ExitCode {
    run_from(std::env::args_os())
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    init_logging(cli.quiet);
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn init_logging(quiet: bool) {
    let level = if quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::GenSurface => gen_surface(cli),
        Command::Forward => forward(cli),
        Command::Reconstruct { measurements } => reconstruct(cli, measurements.as_deref()),
        Command::Experiment { preset } => experiment(cli, preset.as_deref()),
        Command::Plot { report } => plot_report(cli, report),
    }
}

fn required_config(cli: &Cli) -> Result<Value, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Usage("this command needs --config <FILE>".into()))?;
    config::read_json(path)
}

/// Creates the output directory and refuses to clobber `files` without --force.
fn prepare_out(cli: &Cli, files: &[&str]) -> Result<PathBuf, CliError> {
    let out = cli
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("this command needs --out <DIR>".into()))?;
    ensure_writable(&out, files, cli.force)?;
    Ok(out)
}

fn ensure_writable(out: &Path, files: &[&str], force: bool) -> Result<(), CliError> {
    if out.exists() && !out.is_dir() {
        return Err(CliError::Usage(format!("{} exists and is not a directory", out.display())));
    }
    if !force {
        if let Some(f) = files.iter().find(|f| out.join(f).exists()) {
            return Err(CliError::Usage(format!(
                "{} already exists; pass --force to overwrite",
                out.join(f).display()
            )));
        }
    }
    fs::create_dir_all(out).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn announce(cli: &Cli, paths: &[PathBuf]) {
    if !cli.quiet {
        for p in paths {
            println!("{}", p.display());
        }
    }
}

fn default_domain_length() -> f64 {
    16.0
}

fn default_grid_count() -> usize {
    2048
}

fn default_taper_width() -> f64 {
    PRESET_TAPER_WIDTH
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenSurfaceConfig {
    #[serde(default = "default_domain_length")]
    domain_length: f64,
    corr_length: f64,
    height_std: f64,
    #[serde(default = "default_grid_count")]
    grid_count: usize,
    #[serde(default = "default_taper_width")]
    taper_width: f64,
    #[serde(default)]
    seed: u64,
}

fn gen_surface(cli: &Cli) -> Result<(), CliError> {
    let mut cfg: GenSurfaceConfig = config::from_value(required_config(cli)?, "gen-surface config")?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let params = RandomSurfaceParams {
        corr_length: cfg.corr_length,
        height_std: cfg.height_std,
        domain_length: cfg.domain_length,
        grid_count: cfg.grid_count,
        taper_width: cfg.taper_width,
        seed: cfg.seed,
    };
    params.validate()?;
    let out = prepare_out(cli, &[SURFACE_FILE, STATS_FILE])?;
    let surface = generate_gaussian_surface(&params)?;
    let stats = surface_statistics(&surface, cfg.taper_width);
    info!(
        "surface: rms height {:.4} m, correlation length {:?} m",
        stats.height_std, stats.corr_length
    );

    let surface_path = out.join(SURFACE_FILE);
    write_surface_csv(&surface_path, &surface)?;
    let stats_path = out.join(STATS_FILE);
    write_json(
        &stats_path,
        &json!({
            "params": params,
            "analysis_margin": cfg.taper_width,
            "height_std": stats.height_std,
            "corr_length": stats.corr_length,
            "points": surface.heights().len(),
        }),
    )?;
    announce(cli, &[surface_path, stats_path]);
    Ok(())
}

fn default_upper() -> Medium {
    Medium::VACUUM
}

fn default_points_per_wavelength() -> f64 {
    InverseConfig::default().points_per_wavelength
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForwardConfig {
    #[serde(default = "default_domain_length")]
    domain_length: f64,
    surface: SurfaceSpec,
    #[serde(default = "default_upper")]
    upper: Medium,
    lower: Medium,
    wave: IncidentWave,
    receivers: ReceiverSpec,
    frequency: f64,
    /// Explicit segment count; otherwise derived from points_per_wavelength.
    #[serde(default)]
    segments: Option<usize>,
    #[serde(default = "default_points_per_wavelength")]
    points_per_wavelength: f64,
    /// Basis of `coefficients` surfaces.
    #[serde(default)]
    spline_count: Option<usize>,
    #[serde(default)]
    spline_order: Option<u32>,
}

/// Replaces the seed of a random surface.
fn reseed(surface: &mut Option<SurfaceSpec>, seed: u64) {
    if let Some(SurfaceSpec::Random { seed: s, .. }) = surface {
        *s = seed;
    }
}

fn forward(cli: &Cli) -> Result<(), CliError> {
    let cfg: ForwardConfig = config::from_value(required_config(cli)?, "forward config")?;
    let mut surface_spec = Some(cfg.surface.clone());
    if let Some(seed) = cli.seed {
        reseed(&mut surface_spec, seed);
    }
    let surface_spec = surface_spec.expect("set above");
    if let Some(n) = cfg.segments {
        if n < 2 {
            return Err(CliError::Config(format!("segments must be at least 2, got {n}")));
        }
    }
    if !(cfg.points_per_wavelength > 0.0 && cfg.points_per_wavelength.is_finite()) {
        return Err(CliError::Config(format!(
            "points_per_wavelength must be positive, got {}",
            cfg.points_per_wavelength
        )));
    }
    if !(cfg.domain_length > 0.0 && cfg.domain_length.is_finite()) {
        return Err(CliError::Config(format!("domain_length must be positive, got {}", cfg.domain_length)));
    }
    cfg.wave.validate()?;
    let wavenumbers = Wavenumbers::new(&cfg.upper, &cfg.lower, cfg.frequency)?;
    let receivers = cfg.receivers.build()?;
    let defaults = InverseConfig::default();
    let basis = SplineBasis::new(
        cfg.spline_count.unwrap_or(defaults.spline_count),
        cfg.spline_order.unwrap_or(defaults.spline_order),
        cfg.domain_length,
    )?;
    let profile = surface_spec.build(cfg.domain_length, &basis)?;
    let out = prepare_out(cli, &[SCATTERED_FILE, SCATTERED_META_FILE])?;

    let sampled = match cfg.segments {
        Some(n) => sample_surface_with_count(&profile, n)?,
        None => {
            let mesh = InverseConfig {
                points_per_wavelength: cfg.points_per_wavelength,
                ..defaults
            };
            sample_surface(&profile, mesh.mesh_width(wavenumber(&cfg.lower, cfg.frequency)?))?
        }
    };
    info!("forward solve at {} MHz on {} segments", mhz_label(cfg.frequency), sampled.len());
    let solution = solve_forward(&sampled, wavenumbers, &cfg.wave)?;
    let field = scattered_field(&receivers, &solution, wavenumbers.k1)?;

    let csv_path = out.join(SCATTERED_FILE);
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| CliError::Runtime(e.to_string()))?;
    let rows = std::iter::once(["x".to_string(), "Re".into(), "Im".into()]).chain(
        receivers
            .xs
            .iter()
            .zip(&field)
            .map(|(x, u)| [x.to_string(), u.re.to_string(), u.im.to_string()]),
    );
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Runtime(e.to_string()))?;

    let meta_path = out.join(SCATTERED_META_FILE);
    write_json(
        &meta_path,
        &json!({
            "frequency": cfg.frequency,
            "segments": sampled.len(),
            "segment_width": sampled.width,
            "relative_residual": solution.relative_residual,
            "receiver_count": receivers.len(),
            "receiver_height": receivers.height,
            "domain_length": cfg.domain_length,
            "surface": surface_spec,
            "upper": cfg.upper,
            "lower": cfg.lower,
            "wave": cfg.wave,
        }),
    )?;
    announce(cli, &[csv_path, meta_path]);
    Ok(())
}

const REPORT_FILES: [&str; 2] = [REPORT_FILE, ERR_CURVE_FILE];

fn apply_seed(cfg: &mut ScenarioConfig, seed: Option<u64>) {
    if let Some(seed) = seed {
        reseed(&mut cfg.surface, seed);
        cfg.noise_seed = seed;
    }
}

fn reconstruct(cli: &Cli, measurements: Option<&Path>) -> Result<(), CliError> {
    let mut value = required_config(cli)?;
    let from_config = value
        .as_object_mut()
        .and_then(|m| m.remove("measurements"))
        .map(|v| match v {
            Value::String(s) => Ok(PathBuf::from(s)),
            other => Err(CliError::Config(format!("measurements must be a path, got {other}"))),
        })
        .transpose()?;
    let mut cfg: ScenarioConfig = config::from_value(value, "reconstruct config")?;
    apply_seed(&mut cfg, cli.seed);
    if cfg.sweep != Sweep::None {
        return Err(CliError::Usage("reconstruct runs a single point; use `experiment` for sweeps".into()));
    }
    cfg.validate()?;
    let recorded = match measurements.map(Path::to_path_buf).or(from_config) {
        Some(path) => Some(read_measurements(&path)?),
        None => None,
    };
    if recorded.is_none() && cfg.surface.is_none() {
        return Err(CliError::Config(
            "without --measurements the config needs a reference surface".into(),
        ));
    }
    let out = prepare_out(cli, &[REPORT_FILE, ERR_CURVE_FILE, MEASUREMENTS_FILE])?;

    let mut written = Vec::new();
    let data = match recorded {
        Some(m) => m,
        None => {
            let setup = cfg.point(0)?;
            let reference = cfg.reference()?.expect("checked above");
            let frequencies = setup.schedule.frequencies().map_err(ExperimentError::from)?;
            let m = synthesize_measurements(&reference, &setup.problem, &frequencies, setup.synthesis)?;
            let path = out.join(MEASUREMENTS_FILE);
            write_json(&path, &m)?;
            written.push(path);
            m
        }
    };
    let report = run_with_measurements(&cfg, &data)?;
    finish_report(cli, &cfg, &report, &out, written)
}

fn read_measurements(path: &Path) -> Result<MeasurementSet, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read measurements {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let set: MeasurementSet = config::from_value(value, &path.display().to_string())?;
    set.validate()?;
    Ok(set)
}

fn finish_report(
    cli: &Cli,
    cfg: &ScenarioConfig,
    report: &ScenarioReport,
    out: &Path,
    mut written: Vec<PathBuf>,
) -> Result<(), CliError> {
    let reference = cfg.reference()?;
    written.extend(write_report_bundle(report, out, reference.as_ref().map(|r| r as &dyn Profile))?);
    announce(cli, &written);
    match report.failures() {
        0 => Ok(()),
        n => Err(CliError::Runtime(format!(
            "{n} of {} points failed; see {}",
            report.points.len(),
            out.join(REPORT_FILE).display()
        ))),
    }
}

fn experiment(cli: &Cli, preset: Option<&str>) -> Result<(), CliError> {
    let mut value = match preset {
        Some(name) => {
            let cfg = ScenarioConfig::preset(name, cli.seed.unwrap_or(1)).map_err(|e| {
                CliError::Usage(format!("{e}; known presets: {}", PRESETS.join(", ")))
            })?;
            serde_json::to_value(cfg).map_err(|e| CliError::Runtime(e.to_string()))?
        }
        None => Value::Object(Default::default()),
    };
    match (&cli.config, preset) {
        (Some(path), _) => config::merge(&mut value, config::read_json(path)?),
        (None, None) => {
            return Err(CliError::Usage("experiment needs a preset name or --config <FILE>".into()));
        }
        (None, Some(_)) => {}
    }
    let mut cfg: ScenarioConfig = config::from_value(value, "experiment config")?;
    apply_seed(&mut cfg, cli.seed);
    cfg.validate()?;
    if cfg.surface.is_none() {
        return Err(CliError::Config("an experiment needs a reference surface".into()));
    }
    let out = prepare_out(cli, &REPORT_FILES)?;
    let report = crate::experiments::run_scenario(&cfg)?;
    finish_report(cli, &cfg, &report, &out, Vec::new())
}

#[derive(Deserialize)]
struct ErrRow {
    point: usize,
    frequency_hz: f64,
    iterations: usize,
    step_norm: f64,
    err: Option<f64>,
}

#[derive(Deserialize)]
struct ProfileRow {
    x: f64,
    reference: Option<f64>,
    reconstructed: f64,
}

fn plot_report(cli: &Cli, report_dir: &Path) -> Result<(), CliError> {
    let runtime = |e: &dyn std::fmt::Display| CliError::Runtime(e.to_string());
    if !report_dir.is_dir() {
        return Err(CliError::Usage(format!("{} is not a directory", report_dir.display())));
    }
    let report = read_report(report_dir).map_err(|e| runtime(&e))?;
    let out = cli.out.clone().unwrap_or_else(|| report_dir.to_path_buf());

    let profiles = profile_files(report_dir).map_err(|e| runtime(&e))?;
    let mut targets: Vec<String> = vec!["err_curve.svg".into()];
    targets.extend(profiles.iter().map(|rel| svg_name(rel)));
    let target_refs: Vec<&str> = targets.iter().map(String::as_str).collect();
    ensure_writable(&out, &target_refs, cli.force)?;

    let mut written = Vec::new();
    let err_path = report_dir.join(ERR_CURVE_FILE);
    let mut rows: Vec<ErrRow> = Vec::new();
    for row in csv::Reader::from_path(&err_path).map_err(|e| runtime(&e))?.deserialize() {
        rows.push(row.map_err(|e| runtime(&format!("{}: {e}", err_path.display())))?);
    }
    let use_err = rows.iter().any(|r| r.err.is_some());
    let mut series: Vec<Series> = Vec::new();
    for p in &report.points {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.point == p.index)
            .map(|r| {
                let y = if use_err { r.err.unwrap_or(f64::NAN) } else { r.step_norm };
                (r.frequency_hz / 1e6, y)
            })
            .collect();
        let label = match p.sweep_value {
            Some(v) => format!("point {} ({v})", p.index),
            None => format!("point {}", p.index),
        };
        series.push(Series { label, points });
    }
    let total: usize = rows.iter().map(|r| r.iterations).sum();
    let title = format!("{}: {} Newton iterations", report.config.name, total);
    let y_label = if use_err { "err" } else { "final step norm (m)" };
    let path = out.join("err_curve.svg");
    fs::write(&path, line_plot(&title, "frequency (MHz)", y_label, &series)).map_err(|e| runtime(&e))?;
    written.push(path);

    for rel in &profiles {
        let src = report_dir.join(rel);
        let mut xs = Vec::new();
        for row in csv::Reader::from_path(&src).map_err(|e| runtime(&e))?.deserialize() {
            let row: ProfileRow = row.map_err(|e| runtime(&format!("{}: {e}", src.display())))?;
            xs.push(row);
        }
        let mut series = vec![Series {
            label: "reconstructed".into(),
            points: xs.iter().map(|r| (r.x, r.reconstructed)).collect(),
        }];
        if xs.iter().all(|r| r.reference.is_some()) {
            series.insert(
                0,
                Series {
                    label: "reference".into(),
                    points: xs.iter().map(|r| (r.x, r.reference.unwrap_or_default())).collect(),
                },
            );
        }
        let path = out.join(svg_name(rel));
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| runtime(&e))?;
        }
        let title = rel.trim_end_matches(".csv").replace('/', " ");
        fs::write(&path, line_plot(&title, "x (m)", "s(x) (m)", &series)).map_err(|e| runtime(&e))?;
        written.push(path);
    }
    announce(cli, &written);
    Ok(())
}

fn svg_name(rel: &str) -> String {
    format!("{}.svg", rel.trim_end_matches(".csv"))
}

/// Profile CSVs of a report, relative to its directory, in sorted order.
fn profile_files(dir: &Path) -> std::io::Result<Vec<String>> {
    let is_profile = |name: &str| name.starts_with("profile") && name.ends_with(".csv");
    let mut found = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if entry.file_type()?.is_dir() && name.starts_with("point") {
            for inner in fs::read_dir(entry.path())? {
                let inner = inner?.file_name().to_string_lossy().into_owned();
                if is_profile(&inner) {
                    found.push(format!("{name}/{inner}"));
                }
            }
        } else if is_profile(&name) {
            found.push(name);
        }
    }
    found.sort();
    Ok(found)
}

/// Surface CSV reader re-exported for the tool's users.
pub fn load_surface(path: &Path) -> Result<crate::surface::GriddedSurface, CliError> {
    read_surface_csv(path).map_err(CliError::from)
}
