//! Python bindings: surfaces, the forward solver, scenarios and reports.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use roughinv_core::experiments::{
    self, ExperimentError, MeasurementSet, ScenarioConfig, ScenarioReport, SynthesisSettings,
};
use roughinv_core::forward::{scattered_field, solve_forward, IncidentWave, Medium, ReceiverArray, Wavenumbers};
use roughinv_core::inverse::InverseConfig;
use roughinv_core::numerics;
use roughinv_core::surface::{generate_gaussian_surface, sample_surface, GriddedSurface, Profile, RandomSurfaceParams};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn experiment_error(e: ExperimentError) -> PyErr {
    match e {
        ExperimentError::InvalidConfig(_) | ExperimentError::Json { .. } => value_error(e),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A surface sampled on a uniform grid spanning [-L/2, L/2].
#[pyclass(name = "Surface", module = "roughinv_py", frozen)]
#[derive(Clone)]
struct PySurface {
    inner: GriddedSurface,
}

#[pymethods]
impl PySurface {
    #[new]
    fn new(domain_length: f64, heights: Vec<f64>) -> PyResult<Self> {
        let inner = GriddedSurface::new(domain_length, heights).map_err(value_error)?;
        Ok(Self { inner })
    }

    /// Gaussian-spectrum random surface with cosine edge tapers.
    #[staticmethod]
    #[pyo3(signature = (corr_length, height_std, seed, domain_length=16.0, grid_count=2048, taper_width=2.0))]
    fn gaussian(
        corr_length: f64,
        height_std: f64,
        seed: u64,
        domain_length: f64,
        grid_count: usize,
        taper_width: f64,
    ) -> PyResult<Self> {
        let inner = generate_gaussian_surface(&RandomSurfaceParams {
            corr_length,
            height_std,
            domain_length,
            grid_count,
            taper_width,
            seed,
        })
        .map_err(value_error)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn read_csv(path: PathBuf) -> PyResult<Self> {
        let inner = experiments::read_surface_csv(&path).map_err(experiment_error)?;
        Ok(Self { inner })
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        experiments::write_surface_csv(&path, &self.inner).map_err(experiment_error)
    }

    #[getter]
    fn domain_length(&self) -> f64 {
        self.inner.domain_length()
    }

    fn abscissae(&self) -> Vec<f64> {
        self.inner.abscissae()
    }

    fn heights(&self) -> Vec<f64> {
        self.inner.heights().to_vec()
    }

    fn height(&self, x: f64) -> f64 {
        self.inner.height(x)
    }

    fn slope(&self, x: f64) -> f64 {
        self.inner.slope(x)
    }

    fn __len__(&self) -> usize {
        self.inner.heights().len()
    }

    fn __repr__(&self) -> String {
        format!("Surface(domain_length={}, points={})", self.inner.domain_length(), self.inner.heights().len())
    }
}

/// Scattered field of `surface` at receivers `start:step:end` at `height`.
#[pyfunction]
#[pyo3(signature = (
    surface, frequency, eps_r=4.0, mu_r=1.0, sigma=1e-5, theta=0.0, taper=8.0,
    receivers=(-10.0, 10.0, 0.1, 4.25), points_per_wavelength=10.0,
))]
#[allow(clippy::too_many_arguments)]
fn scattered(
    py: Python<'_>,
    surface: &PySurface,
    frequency: f64,
    eps_r: f64,
    mu_r: f64,
    sigma: f64,
    theta: f64,
    taper: f64,
    receivers: (f64, f64, f64, f64),
    points_per_wavelength: f64,
) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
    let lower = Medium::new(eps_r, mu_r, sigma).map_err(value_error)?;
    let wave = IncidentWave::new(theta, taper).map_err(value_error)?;
    let (start, end, step, height) = receivers;
    let array = ReceiverArray::grid(start, end, step, height, true).map_err(value_error)?;
    let k = Wavenumbers::new(&Medium::VACUUM, &lower, frequency).map_err(value_error)?;
    let config = InverseConfig {
        points_per_wavelength,
        ..InverseConfig::default()
    };
    let sampled = sample_surface(&surface.inner, config.mesh_width(k.k2)).map_err(value_error)?;
    let field = py
        .allow_threads(|| {
            let solution = solve_forward(&sampled, k, &wave)?;
            scattered_field(&array, &solution, k.k1)
        })
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((array.xs.clone(), field))
}

/// Noisy scattered-field data for a list of frequencies.
#[pyclass(name = "Measurements", module = "roughinv_py", frozen)]
#[derive(Clone)]
struct PyMeasurements {
    inner: MeasurementSet,
}

#[pymethods]
impl PyMeasurements {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: MeasurementSet = serde_json::from_str(text).map_err(value_error)?;
        inner.validate().map_err(experiment_error)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(value_error)
    }

    #[getter]
    fn frequencies(&self) -> Vec<f64> {
        self.inner.frequencies()
    }

    #[getter]
    fn noise_level(&self) -> f64 {
        self.inner.noise_level
    }

    #[getter]
    fn receivers(&self) -> Vec<f64> {
        self.inner.receivers.xs.clone()
    }

    /// Samples at frequency index `index`.
    fn values(&self, index: usize) -> PyResult<Vec<Complex64>> {
        self.inner
            .samples
            .get(index)
            .map(|s| s.values.clone())
            .ok_or_else(|| PyValueError::new_err(format!("no frequency with index {index}")))
    }
}

/// A scenario: reference surface, media, receivers, schedule and sweep.
#[pyclass(name = "Scenario", module = "roughinv_py", frozen)]
#[derive(Clone)]
struct PyScenario {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    #[pyo3(signature = (name, seed=1))]
    fn preset(name: &str, seed: u64) -> PyResult<Self> {
        let inner = ScenarioConfig::preset(name, seed).map_err(experiment_error)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn presets() -> Vec<&'static str> {
        experiments::PRESETS.to_vec()
    }

    /// Parses a scenario in SI units (no unit suffixes).
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: ScenarioConfig = serde_json::from_str(text).map_err(value_error)?;
        inner.validate().map_err(experiment_error)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(value_error)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn frequencies(&self) -> PyResult<Vec<f64>> {
        self.inner.schedule.frequencies().map_err(value_error)
    }

    #[getter]
    fn point_count(&self) -> usize {
        self.inner.sweep.point_count()
    }

    /// Synthesizes the measurements of sweep point `point`.
    #[pyo3(signature = (point=0))]
    fn synthesize(&self, py: Python<'_>, point: usize) -> PyResult<PyMeasurements> {
        if point >= self.inner.sweep.point_count() {
            return Err(PyValueError::new_err(format!("no sweep point {point}")));
        }
        let cfg = &self.inner;
        let inner = py
            .allow_threads(|| {
                let reference = cfg.reference()?.ok_or_else(|| {
                    ExperimentError::InvalidConfig("the scenario has no reference surface".into())
                })?;
                let setup = cfg.point(point)?;
                let settings: SynthesisSettings = setup.synthesis;
                experiments::synthesize_measurements(&reference, &setup.problem, &setup.schedule.frequencies()?, settings)
            })
            .map_err(experiment_error)?;
        Ok(PyMeasurements { inner })
    }

    /// Synthesis and reconstruction for every sweep point.
    fn run(&self, py: Python<'_>) -> PyResult<PyReport> {
        let inner = py
            .allow_threads(|| experiments::run_scenario(&self.inner))
            .map_err(experiment_error)?;
        Ok(PyReport { inner })
    }

    /// Reconstruction of a single-point scenario from given data.
    fn reconstruct(&self, py: Python<'_>, measurements: &PyMeasurements) -> PyResult<PyReport> {
        let inner = py
            .allow_threads(|| experiments::run_with_measurements(&self.inner, &measurements.inner))
            .map_err(experiment_error)?;
        Ok(PyReport { inner })
    }

    fn __repr__(&self) -> String {
        format!("Scenario(name={:?}, points={})", self.inner.name, self.inner.sweep.point_count())
    }
}

/// Outcome of a scenario run.
#[pyclass(name = "Report", module = "roughinv_py", frozen)]
struct PyReport {
    inner: ScenarioReport,
}

#[pymethods]
impl PyReport {
    #[staticmethod]
    fn read(dir: PathBuf) -> PyResult<Self> {
        let inner = experiments::read_report(&dir).map_err(experiment_error)?;
        Ok(Self { inner })
    }

    /// Writes report.json, err_curve.csv and the profile CSVs; returns the paths.
    fn write(&self, dir: PathBuf) -> PyResult<Vec<PathBuf>> {
        std::fs::create_dir_all(&dir).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        let reference = self.inner.config.reference().map_err(experiment_error)?;
        experiments::write_report_bundle(&self.inner, &dir, reference.as_ref().map(|r| r as &dyn Profile))
            .map_err(experiment_error)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(value_error)
    }

    #[getter]
    fn failures(&self) -> usize {
        self.inner.failures()
    }

    #[getter]
    fn final_errs(&self) -> Vec<Option<f64>> {
        self.inner.points.iter().map(|p| p.final_err).collect()
    }

    /// (point, frequency, iterations, err) for every frequency of every point.
    fn err_curve(&self) -> Vec<(usize, f64, usize, Option<f64>)> {
        self.inner
            .points
            .iter()
            .flat_map(|p| p.outcomes.iter().map(move |o| (p.index, o.frequency, o.iterations, o.err)))
            .collect()
    }

    /// Spline coefficients after the last frequency of sweep point `point`.
    #[pyo3(signature = (point=0))]
    fn coefficients(&self, point: usize) -> PyResult<Vec<f64>> {
        self.inner
            .points
            .get(point)
            .and_then(|p| p.outcomes.last())
            .map(|o| o.coeffs.clone())
            .ok_or_else(|| PyValueError::new_err(format!("no reconstruction for point {point}")))
    }
}

/// (H₀⁽¹⁾(z), H₁⁽¹⁾(z)) for Im z ≥ 0.
#[pyfunction]
fn hankel1(z: Complex64) -> PyResult<(Complex64, Complex64)> {
    numerics::hankel1_pair(z).map_err(value_error)
}

/// err = ‖s_rec − s_ref‖ / ‖s_ref‖ on equal-length samples.
#[pyfunction]
fn relative_error(reconstructed: Vec<f64>, reference: Vec<f64>) -> PyResult<f64> {
    if reconstructed.len() != reference.len() {
        return Err(PyValueError::new_err("profiles must have the same length"));
    }
    let num: f64 = reconstructed.iter().zip(&reference).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = reference.iter().map(|b| b * b).sum();
    if den == 0.0 {
        return Err(PyValueError::new_err("reference profile is identically zero"));
    }
    Ok((num / den).sqrt())
}

#[pymodule]
fn roughinv_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySurface>()?;
    m.add_class::<PyMeasurements>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(scattered, m)?)?;
    m.add_function(wrap_pyfunction!(hankel1, m)?)?;
    m.add_function(wrap_pyfunction!(relative_error, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
