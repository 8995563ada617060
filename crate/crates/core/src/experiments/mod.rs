//! Synthetic measurements, the reconstruction error metric, and the canned
//! scenarios with their report bundles.

mod report;

pub use report::{mhz_label, read_report, write_report_bundle, ERR_CURVE_FILE, REPORT_FILE};

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use log::{info, warn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::forward::{
    scattered_field, solve_forward, ForwardError, IncidentWave, Medium, ReceiverArray,
};
use crate::inverse::{
    multi_frequency_reconstruct, FieldSamples, FrequencyOutcome, FrequencySchedule, InverseConfig,
    InverseError, InverseProblem,
};
use crate::numerics::{derive_seed, SeededRng};
use crate::surface::{
    generate_gaussian_surface, sample_surface, GriddedSurface, Profile, RandomSurfaceParams,
    SplineBasis, SurfaceError, SurfaceModel, TriangularProfile,
};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("reference profile is identically zero on the error grid")]
    DegenerateReference,
    #[error(transparent)]
    Inverse(#[from] InverseError),
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

/// Noisy scattered-field data for a frequency list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    pub receivers: ReceiverArray,
    /// One entry per frequency, ascending.
    pub samples: Vec<FieldSamples>,
    /// Relative noise amplitude A_n.
    pub noise_level: f64,
    pub noise_seed: u64,
    /// Synthesis mesh density relative to the inversion mesh.
    pub mesh_factor: f64,
}

impl MeasurementSet {
    pub fn frequencies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.frequency).collect()
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.samples.windows(2).any(|w| w[1].frequency <= w[0].frequency) {
            return Err(ExperimentError::InvalidConfig(
                "measurement frequencies must be strictly ascending".into(),
            ));
        }
        if let Some(bad) = self.samples.iter().find(|s| s.values.len() != self.receivers.len()) {
            return Err(ExperimentError::InvalidConfig(format!(
                "{} samples at {} Hz for {} receivers",
                bad.values.len(),
                bad.frequency,
                self.receivers.len()
            )));
        }
        Ok(())
    }
}

/// Knobs of the measurement synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSettings {
    pub noise_level: f64,
    pub seed: u64,
    pub mesh_factor: f64,
}

impl Default for SynthesisSettings {
    fn default() -> Self {
        Self {
            noise_level: 0.0,
            seed: 0,
            mesh_factor: 2.0,
        }
    }
}

/// u_mea = u_ref + |u_ref| A_n e^{i2πP}, one uniform phase P per sample.
pub fn add_noise(clean: &[Complex64], noise_level: f64, rng: &mut SeededRng) -> Vec<Complex64> {
    clean
        .iter()
        .map(|&u| {
            let phase = 2.0 * PI * rng.uniform();
            u + u.norm() * noise_level * Complex64::from_polar(1.0, phase)
        })
        .collect()
}

/// Forward-solves `reference` at every frequency on a mesh `mesh_factor`
/// times denser than the inversion mesh and contaminates the result.
pub fn synthesize_measurements<P: Profile + ?Sized>(
    reference: &P,
    problem: &InverseProblem,
    frequencies: &[f64],
    settings: SynthesisSettings,
) -> Result<MeasurementSet, ExperimentError> {
    if !(settings.noise_level >= 0.0 && settings.noise_level.is_finite()) {
        return Err(ExperimentError::InvalidConfig(format!(
            "noise level must be non-negative, got {}",
            settings.noise_level
        )));
    }
    if !(settings.mesh_factor >= 1.0 && settings.mesh_factor.is_finite()) {
        return Err(ExperimentError::InvalidConfig(format!(
            "synthesis mesh factor must be at least 1, got {}",
            settings.mesh_factor
        )));
    }
    let mut samples = Vec::with_capacity(frequencies.len());
    for (m, &f) in frequencies.iter().enumerate() {
        let wavenumbers = problem.wavenumbers(f)?;
        let width = problem.config.mesh_width(wavenumbers.k2) / settings.mesh_factor;
        let surface = sample_surface(reference, width)?;
        let solution = solve_forward(&surface, wavenumbers, &problem.wave)?;
        let clean = scattered_field(&problem.receivers, &solution, wavenumbers.k1)?;
        let mut rng = SeededRng::new(derive_seed(settings.seed, m as u64));
        samples.push(FieldSamples {
            frequency: f,
            values: add_noise(&clean, settings.noise_level, &mut rng),
        });
        info!("synthesized {:.1} MHz on {} segments", f / 1e6, surface.len());
    }
    let set = MeasurementSet {
        receivers: problem.receivers.clone(),
        samples,
        noise_level: settings.noise_level,
        noise_seed: settings.seed,
        mesh_factor: settings.mesh_factor,
    };
    set.validate()?;
    Ok(set)
}

/// err = √(Σ(s_rec − s_ref)² / Σ s_ref²) over `grid`.
pub fn reconstruction_error<A: Profile + ?Sized, B: Profile + ?Sized>(
    reconstructed: &A,
    reference: &B,
    grid: &[f64],
) -> Result<f64, ExperimentError> {
    crate::inverse::profile_error(reconstructed, reference, grid).ok_or(ExperimentError::DegenerateReference)
}

/// The true interface of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceSpec {
    Random {
        corr_length: f64,
        height_std: f64,
        #[serde(default = "default_grid_count")]
        grid_count: usize,
        taper_width: f64,
        seed: u64,
    },
    Triangular,
    /// Spline coefficients on the inversion basis.
    Coefficients { coeffs: Vec<f64> },
    Flat,
    /// A surface CSV (`x,s` on a uniform grid spanning the domain).
    Csv { path: PathBuf },
}

fn default_grid_count() -> usize {
    2048
}

/// A reference surface built from a [`SurfaceSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSurface {
    Gridded(GriddedSurface),
    Triangular,
    Spline(SurfaceModel),
    Flat(f64),
}

impl Profile for ReferenceSurface {
    fn height(&self, x: f64) -> f64 {
        match self {
            Self::Gridded(s) => s.height(x),
            Self::Triangular => TriangularProfile.height(x),
            Self::Spline(m) => m.eval(x),
            Self::Flat(_) => 0.0,
        }
    }

    fn slope(&self, x: f64) -> f64 {
        match self {
            Self::Gridded(s) => s.slope(x),
            Self::Triangular => TriangularProfile.slope(x),
            Self::Spline(m) => m.slope(x),
            Self::Flat(_) => 0.0,
        }
    }

    fn domain_length(&self) -> f64 {
        match self {
            Self::Gridded(s) => s.domain_length(),
            Self::Triangular => TriangularProfile.domain_length(),
            Self::Spline(m) => Profile::domain_length(m),
            Self::Flat(l) => *l,
        }
    }
}

impl SurfaceSpec {
    pub fn build(&self, domain_length: f64, basis: &SplineBasis) -> Result<ReferenceSurface, ExperimentError> {
        Ok(match self {
            Self::Random {
                corr_length,
                height_std,
                grid_count,
                taper_width,
                seed,
            } => ReferenceSurface::Gridded(generate_gaussian_surface(&RandomSurfaceParams {
                corr_length: *corr_length,
                height_std: *height_std,
                domain_length,
                grid_count: *grid_count,
                taper_width: *taper_width,
                seed: *seed,
            })?),
            Self::Triangular => {
                if (domain_length - TriangularProfile.domain_length()).abs() > 1e-12 {
                    return Err(ExperimentError::InvalidConfig(format!(
                        "the triangular profile is defined on a {} m domain",
                        TriangularProfile.domain_length()
                    )));
                }
                ReferenceSurface::Triangular
            }
            Self::Coefficients { coeffs } => {
                ReferenceSurface::Spline(SurfaceModel::new(basis.clone(), coeffs.clone())?)
            }
            Self::Flat => ReferenceSurface::Flat(domain_length),
            Self::Csv { path } => {
                let surface = read_surface_csv(path)?;
                if (surface.domain_length() - domain_length).abs() > 1e-9 * domain_length {
                    return Err(ExperimentError::InvalidConfig(format!(
                        "{} spans {} m, the scenario domain is {domain_length} m",
                        path.display(),
                        surface.domain_length()
                    )));
                }
                ReferenceSurface::Gridded(surface)
            }
        })
    }
}

/// Writes a gridded surface as `x,s` rows.
pub fn write_surface_csv(path: &Path, surface: &GriddedSurface) -> Result<(), ExperimentError> {
    let csv_err = |source| ExperimentError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["x", "s"]).map_err(csv_err)?;
    for (x, s) in surface.abscissae().iter().zip(surface.heights()) {
        w.write_record([x.to_string(), s.to_string()]).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Deserialize)]
struct SurfaceRow {
    x: f64,
    s: f64,
}

/// Reads an `x,s` CSV; the abscissae must be uniform and symmetric about 0.
pub fn read_surface_csv(path: &Path) -> Result<GriddedSurface, ExperimentError> {
    let csv_err = |source| ExperimentError::Csv {
        path: path.display().to_string(),
        source,
    };
    let mut rows = Vec::new();
    for row in csv::Reader::from_path(path).map_err(csv_err)?.deserialize() {
        let row: SurfaceRow = row.map_err(csv_err)?;
        rows.push(row);
    }
    let bad = |msg: String| Err(ExperimentError::InvalidConfig(format!("{}: {msg}", path.display())));
    if rows.len() < 2 {
        return bad(format!("need at least two rows, got {}", rows.len()));
    }
    let first = rows[0].x;
    let last = rows[rows.len() - 1].x;
    let length = last - first;
    if !(length > 0.0) || (first + last).abs() > 1e-9 * length {
        return bad(format!("abscissae must span [-L/2, L/2], got [{first}, {last}]"));
    }
    let h = length / (rows.len() - 1) as f64;
    if let Some((k, r)) = rows
        .iter()
        .enumerate()
        .find(|(k, r)| (r.x - (first + *k as f64 * h)).abs() > 1e-6 * h)
    {
        return bad(format!("row {k} at x = {} breaks the uniform spacing {h}", r.x));
    }
    Ok(GriddedSurface::new(length, rows.into_iter().map(|r| r.s).collect())?)
}

/// x_sta : Δx : x_end at height α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverSpec {
    pub start: f64,
    pub end: f64,
    pub step: f64,
    pub height: f64,
    #[serde(default = "default_true")]
    pub include_endpoint: bool,
}

fn default_true() -> bool {
    true
}

impl ReceiverSpec {
    pub fn build(&self) -> Result<ReceiverArray, ExperimentError> {
        Ok(ReceiverArray::grid(
            self.start,
            self.end,
            self.step,
            self.height,
            self.include_endpoint,
        )?)
    }
}

/// The single parameter varied across sweep points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "axis", content = "values", rename_all = "snake_case")]
pub enum Sweep {
    #[default]
    None,
    /// Δf values (Hz).
    FrequencyStep(Vec<f64>),
    /// A_n values (fractions).
    NoiseLevel(Vec<f64>),
    /// Δx^r values (m).
    ReceiverSpacing(Vec<f64>),
}

impl Sweep {
    fn values(&self) -> Option<&[f64]> {
        match self {
            Sweep::None => None,
            Sweep::FrequencyStep(v) | Sweep::NoiseLevel(v) | Sweep::ReceiverSpacing(v) => Some(v),
        }
    }

    pub fn point_count(&self) -> usize {
        self.values().map_or(1, <[f64]>::len)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_domain_length")]
    pub domain_length: f64,
    /// The true interface; optional only when measurements come from a file.
    #[serde(default)]
    pub surface: Option<SurfaceSpec>,
    #[serde(default = "default_upper")]
    pub upper: Medium,
    pub lower: Medium,
    pub wave: IncidentWave,
    pub receivers: ReceiverSpec,
    pub schedule: FrequencySchedule,
    #[serde(default)]
    pub inverse: InverseConfig,
    #[serde(default)]
    pub noise_level: f64,
    #[serde(default)]
    pub noise_seed: u64,
    #[serde(default = "default_mesh_factor")]
    pub mesh_factor: f64,
    /// Also reconstruct from a flat start at the last frequency alone.
    #[serde(default)]
    pub compare_single_frequency: bool,
    #[serde(default)]
    pub sweep: Sweep,
}

fn default_name() -> String {
    "scenario".into()
}

fn default_domain_length() -> f64 {
    16.0
}

fn default_upper() -> Medium {
    Medium::VACUUM
}

fn default_mesh_factor() -> f64 {
    2.0
}

/// Names accepted by [`ScenarioConfig::preset`].
pub const PRESETS: [&str; 6] = [
    "convergence",
    "multi_vs_single",
    "frequency_step",
    "sharp_profile",
    "noise",
    "receiver_spacing",
];

/// Physical edge-taper width of the preset random surfaces (m).
pub const PRESET_TAPER_WIDTH: f64 = 2.0;

const MHZ: f64 = 1e6;

impl ScenarioConfig {
    /// Setting shared by all presets.
    fn base(name: &str, surface: SurfaceSpec, schedule: (f64, f64, f64), spacing: f64, spline_count: usize) -> Self {
        Self {
            name: name.into(),
            domain_length: 16.0,
            surface: Some(surface),
            upper: Medium::VACUUM,
            lower: Medium {
                eps_r: 4.0,
                mu_r: 1.0,
                sigma: 1e-5,
            },
            wave: IncidentWave {
                theta: 0.0,
                taper: 8.0,
            },
            receivers: ReceiverSpec {
                start: -10.0,
                end: 10.0,
                step: spacing,
                height: 4.25,
                include_endpoint: true,
            },
            schedule: FrequencySchedule {
                start: schedule.0,
                step: schedule.1,
                end: schedule.2,
            },
            inverse: InverseConfig {
                spline_count,
                ..InverseConfig::default()
            },
            noise_level: 0.0,
            noise_seed: 1,
            mesh_factor: 2.0,
            compare_single_frequency: false,
            sweep: Sweep::None,
        }
    }

    fn random(corr_length: f64, height_std: f64, seed: u64) -> SurfaceSpec {
        SurfaceSpec::Random {
            corr_length,
            height_std,
            grid_count: default_grid_count(),
            taper_width: PRESET_TAPER_WIDTH,
            seed,
        }
    }

    /// One of the numerical examples, with `seed` for the random surface.
    pub fn preset(name: &str, seed: u64) -> Result<Self, ExperimentError> {
        let cfg = match name {
            "convergence" => {
                let mut c = Self::base(name, Self::random(0.7, 0.07, seed), (325.0 * MHZ, 25.0 * MHZ, 900.0 * MHZ), 0.1, 25);
                c.noise_level = 0.05;
                c
            }
            "multi_vs_single" => {
                let mut c = Self::base(name, Self::random(0.55, 0.06, seed), (400.0 * MHZ, 25.0 * MHZ, 600.0 * MHZ), 0.2, 20);
                c.compare_single_frequency = true;
                c
            }
            "frequency_step" => {
                let mut c = Self::base(name, Self::random(0.4, 0.07, seed), (300.0 * MHZ, 10.0 * MHZ, 600.0 * MHZ), 0.1, 17);
                c.sweep = Sweep::FrequencyStep([10.0, 20.0, 50.0, 150.0, 300.0].map(|v| v * MHZ).to_vec());
                c
            }
            "sharp_profile" => {
                let mut c = Self::base(name, SurfaceSpec::Triangular, (400.0 * MHZ, 20.0 * MHZ, 800.0 * MHZ), 0.1, 18);
                c.compare_single_frequency = true;
                c
            }
            "noise" => {
                let mut c = Self::base(name, Self::random(0.5, 0.05, seed), (425.0 * MHZ, 25.0 * MHZ, 675.0 * MHZ), 0.1, 18);
                c.sweep = Sweep::NoiseLevel(
                    [3.0, 5.0, 7.0, 10.0, 12.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0]
                        .map(|v| v / 100.0)
                        .to_vec(),
                );
                c
            }
            "receiver_spacing" => {
                let mut c = Self::base(name, Self::random(0.7, 0.08, seed), (300.0 * MHZ, 20.0 * MHZ, 500.0 * MHZ), 0.1, 18);
                c.sweep = Sweep::ReceiverSpacing(
                    [2.5, 5.0, 7.5, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0, 60.0, 80.0, 100.0]
                        .map(|v| v / 100.0)
                        .to_vec(),
                );
                c
            }
            other => {
                return Err(ExperimentError::InvalidConfig(format!(
                    "unknown preset '{other}' (expected one of {})",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !(self.domain_length > 0.0 && self.domain_length.is_finite()) {
            return Err(ExperimentError::InvalidConfig(format!(
                "domain length must be positive, got {}",
                self.domain_length
            )));
        }
        if !(self.noise_level >= 0.0) {
            return Err(ExperimentError::InvalidConfig(format!(
                "noise level must be non-negative, got {}",
                self.noise_level
            )));
        }
        if !(self.mesh_factor >= 1.0) {
            return Err(ExperimentError::InvalidConfig(format!(
                "mesh factor must be at least 1, got {}",
                self.mesh_factor
            )));
        }
        if let Some(values) = self.sweep.values() {
            if values.is_empty() {
                return Err(ExperimentError::InvalidConfig("sweep has no values".into()));
            }
        }
        self.schedule.frequencies()?;
        self.receivers.build()?;
        self.problem(&self.receivers)?.validate()?;
        Ok(())
    }

    fn problem(&self, receivers: &ReceiverSpec) -> Result<InverseProblem, ExperimentError> {
        Ok(InverseProblem {
            upper: self.upper,
            lower: self.lower,
            wave: self.wave,
            receivers: receivers.build()?,
            domain_length: self.domain_length,
            config: self.inverse,
        })
    }

    /// Configuration of sweep point `index` (schedule, noise and receivers
    /// adjusted; noise seed derived from the master seed).
    pub fn point(&self, index: usize) -> Result<PointSetup, ExperimentError> {
        let mut schedule = self.schedule;
        let mut noise_level = self.noise_level;
        let mut receivers = self.receivers;
        let value = match &self.sweep {
            Sweep::None => None,
            Sweep::FrequencyStep(v) => {
                schedule.step = v[index];
                Some(v[index])
            }
            Sweep::NoiseLevel(v) => {
                noise_level = v[index];
                Some(v[index])
            }
            Sweep::ReceiverSpacing(v) => {
                receivers.step = v[index];
                Some(v[index])
            }
        };
        Ok(PointSetup {
            index,
            sweep_value: value,
            problem: self.problem(&receivers)?,
            schedule,
            synthesis: SynthesisSettings {
                noise_level,
                seed: derive_seed(self.noise_seed, index as u64),
                mesh_factor: self.mesh_factor,
            },
        })
    }
}

/// Fully resolved inputs of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSetup {
    pub index: usize,
    pub sweep_value: Option<f64>,
    pub problem: InverseProblem,
    pub schedule: FrequencySchedule,
    pub synthesis: SynthesisSettings,
}

/// Flat-start reconstruction at a single frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleFrequencyRun {
    pub frequency: f64,
    pub outcome: FrequencyOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub index: usize,
    pub sweep_value: Option<f64>,
    pub receiver_count: usize,
    pub noise_level: f64,
    pub noise_seed: u64,
    pub frequencies: Vec<f64>,
    pub outcomes: Vec<FrequencyOutcome>,
    pub total_iterations: usize,
    pub final_err: Option<f64>,
    pub single_frequency: Option<SingleFrequencyRun>,
    /// Why this point stopped early or failed outright.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub config: ScenarioConfig,
    pub points: Vec<PointReport>,
}

impl ScenarioReport {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.failure.is_some()).count()
    }
}

/// Synthesis and reconstruction for one sweep point.
pub fn run_point(
    setup: &PointSetup,
    reference: &ReferenceSurface,
    compare_single: bool,
) -> Result<PointReport, ExperimentError> {
    let frequencies = setup.schedule.frequencies()?;
    let measurements = synthesize_measurements(reference, &setup.problem, &frequencies, setup.synthesis)?;
    reconstruct_point(setup, &measurements, Some(reference), compare_single)
}

/// Reconstruction of one sweep point from given measurements.
pub fn reconstruct_point(
    setup: &PointSetup,
    measurements: &MeasurementSet,
    reference: Option<&dyn Profile>,
    compare_single: bool,
) -> Result<PointReport, ExperimentError> {
    measurements.validate()?;
    let (a, b) = (&measurements.receivers, &setup.problem.receivers);
    let same_receivers = a.len() == b.len()
        && (a.height - b.height).abs() <= 1e-9
        && a.xs.iter().zip(&b.xs).all(|(x, y)| (x - y).abs() <= 1e-9);
    if !same_receivers {
        return Err(ExperimentError::InvalidConfig(
            "measurement receivers differ from the configured receiver array".into(),
        ));
    }
    let frequencies = setup.schedule.frequencies()?;
    let report = multi_frequency_reconstruct(&setup.problem, &setup.schedule, &measurements.samples, reference)?;
    let outcomes = report.state.outcomes.clone();
    let mut failure = report.aborted.clone();

    let single_frequency = if compare_single {
        let last = measurements.samples.last().expect("schedule is never empty").clone();
        let schedule = FrequencySchedule::single(last.frequency)?;
        match multi_frequency_reconstruct(&setup.problem, &schedule, &[last], reference) {
            Ok(r) => {
                if let Some(msg) = &r.aborted {
                    failure.get_or_insert_with(|| format!("single-frequency run: {msg}"));
                }
                r.state.outcomes.first().map(|o| SingleFrequencyRun {
                    frequency: o.frequency,
                    outcome: o.clone(),
                })
            }
            Err(e) => {
                failure.get_or_insert_with(|| format!("single-frequency run: {e}"));
                None
            }
        }
    } else {
        None
    };

    Ok(PointReport {
        index: setup.index,
        sweep_value: setup.sweep_value,
        receiver_count: setup.problem.receivers.len(),
        noise_level: measurements.noise_level,
        noise_seed: measurements.noise_seed,
        frequencies,
        total_iterations: outcomes.iter().map(|o| o.iterations).sum(),
        final_err: outcomes.last().and_then(|o| o.err),
        outcomes,
        single_frequency,
        failure,
    })
}

fn failed_point(setup: &PointSetup, error: &ExperimentError) -> PointReport {
    PointReport {
        index: setup.index,
        sweep_value: setup.sweep_value,
        receiver_count: setup.problem.receivers.len(),
        noise_level: setup.synthesis.noise_level,
        noise_seed: setup.synthesis.seed,
        frequencies: setup.schedule.frequencies().unwrap_or_default(),
        outcomes: Vec::new(),
        total_iterations: 0,
        final_err: None,
        single_frequency: None,
        failure: Some(error.to_string()),
    }
}

impl ScenarioConfig {
    /// The reference surface, when one is configured.
    pub fn reference(&self) -> Result<Option<ReferenceSurface>, ExperimentError> {
        let basis = SplineBasis::new(self.inverse.spline_count, self.inverse.spline_order, self.domain_length)?;
        self.surface
            .as_ref()
            .map(|spec| spec.build(self.domain_length, &basis))
            .transpose()
    }
}

/// Runs every sweep point; a failing point is recorded and the rest still run.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport, ExperimentError> {
    config.validate()?;
    let reference = config.reference()?.ok_or_else(|| {
        ExperimentError::InvalidConfig("synthesizing measurements needs a reference surface".into())
    })?;
    let mut points = Vec::with_capacity(config.sweep.point_count());
    for index in 0..config.sweep.point_count() {
        let setup = config.point(index)?;
        let point = run_point(&setup, &reference, config.compare_single_frequency).unwrap_or_else(|e| {
            warn!("sweep point {index} failed: {e}");
            failed_point(&setup, &e)
        });
        log_point(config, &point);
        points.push(point);
    }
    Ok(ScenarioReport {
        config: config.clone(),
        points,
    })
}

/// Reconstructs a single-point scenario from recorded measurements.
pub fn run_with_measurements(
    config: &ScenarioConfig,
    measurements: &MeasurementSet,
) -> Result<ScenarioReport, ExperimentError> {
    config.validate()?;
    if config.sweep.point_count() != 1 {
        return Err(ExperimentError::InvalidConfig(
            "recorded measurements cannot drive a sweep".into(),
        ));
    }
    let reference = config.reference()?;
    let setup = config.point(0)?;
    let point = reconstruct_point(
        &setup,
        measurements,
        reference.as_ref().map(|r| r as &dyn Profile),
        config.compare_single_frequency,
    )
    .or_else(|e| match e {
        ExperimentError::InvalidConfig(_) => Err(e),
        e => {
            warn!("reconstruction failed: {e}");
            Ok(failed_point(&setup, &e))
        }
    })?;
    log_point(config, &point);
    Ok(ScenarioReport {
        config: config.clone(),
        points: vec![point],
    })
}

fn log_point(config: &ScenarioConfig, point: &PointReport) {
    info!(
        "{} point {}: final err {:?} after {} iterations",
        config.name, point.index, point.final_err, point.total_iterations
    );
}
