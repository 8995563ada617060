//! Newton reconstruction of the interface from scattered-field data: the
//! Frechet matrix of the scattered field with respect to the spline
//! coefficients, the Tikhonov-regularized step, the per-frequency loop and
//! the frequency-marching driver.

use std::f64::consts::PI;

use log::{debug, info, warn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::forward::{
    kernels, scattering_operator, ForwardError, ForwardSolution, ForwardSystem, IncidentWave,
    Medium, ReceiverArray, Wavenumbers,
};
use crate::numerics::special::hankel1_pair_unchecked;
use crate::numerics::{norm2, regularized_normal_solve, ComplexMatrix, NumericsError};
use crate::surface::{sample_surface, Profile, SampledSurface, SplineBasis, SurfaceError, SurfaceModel};

#[derive(Debug, thiserror::Error)]
pub enum InverseError {
    #[error("invalid inversion setting: {0}")]
    InvalidParameter(String),
    #[error("empty frequency schedule: {0}")]
    EmptySchedule(String),
    #[error("{got} measurement vectors for {expected} receivers")]
    MeasurementShape { expected: usize, got: usize },
    #[error("measurement frequency {got} Hz does not match schedule frequency {expected} Hz")]
    FrequencyMismatch { expected: f64, got: f64 },
    #[error("forward solve failed at frequency index {frequency_index}, iteration {iteration}: {source}")]
    Forward {
        frequency_index: usize,
        iteration: usize,
        #[source]
        source: ForwardError,
    },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// How the sensitivity of the scattered field to the surface is linearized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    /// Kernel derivatives only, with the surface fields held fixed. This
    /// recovers about half of the true sensitivity, so full Newton steps
    /// overshoot and the iteration oscillates.
    FrozenField,
    /// Adds the response of the surface fields to the height change,
    /// obtained from the factored impedance matrix.
    #[default]
    FieldCoupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InverseConfig {
    /// Tikhonov parameter τ.
    pub tau: f64,
    /// Threshold on ‖d̄‖₂ (m).
    pub step_tolerance: f64,
    pub max_iterations: usize,
    pub spline_count: usize,
    pub spline_order: u32,
    /// Segments per wavelength in the lower medium.
    pub points_per_wavelength: f64,
    pub jacobian: JacobianMode,
}

impl Default for InverseConfig {
    fn default() -> Self {
        Self {
            tau: 0.75e-5,
            step_tolerance: 5e-3,
            max_iterations: 30,
            spline_count: 25,
            spline_order: 3,
            points_per_wavelength: 10.0,
            jacobian: JacobianMode::FieldCoupled,
        }
    }
}

impl InverseConfig {
    pub fn validate(&self) -> Result<(), InverseError> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(InverseError::InvalidParameter(format!(
                "τ must satisfy 0 < τ < 1, got {}",
                self.tau
            )));
        }
        if !(self.step_tolerance > 0.0 && self.step_tolerance.is_finite()) {
            return Err(InverseError::InvalidParameter(format!(
                "step tolerance must be positive, got {}",
                self.step_tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(InverseError::InvalidParameter(
                "at least one Newton iteration is required".into(),
            ));
        }
        if !(self.points_per_wavelength > 0.0 && self.points_per_wavelength.is_finite()) {
            return Err(InverseError::InvalidParameter(format!(
                "points per wavelength must be positive, got {}",
                self.points_per_wavelength
            )));
        }
        Ok(())
    }

    /// Segment width 2π / (coef·|k₂|).
    pub fn mesh_width(&self, k2: Complex64) -> f64 {
        2.0 * PI / (self.points_per_wavelength * k2.norm())
    }
}

/// Frequencies f_sta, f_sta + Δf, … up to f_end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySchedule {
    pub start: f64,
    pub step: f64,
    pub end: f64,
}

impl FrequencySchedule {
    pub fn new(start: f64, step: f64, end: f64) -> Result<Self, InverseError> {
        let s = Self { start, step, end };
        s.frequencies()?;
        Ok(s)
    }

    /// A schedule holding only `frequency`.
    pub fn single(frequency: f64) -> Result<Self, InverseError> {
        Self::new(frequency, 1.0, frequency)
    }

    pub fn frequencies(&self) -> Result<Vec<f64>, InverseError> {
        if !(self.start > 0.0 && self.start.is_finite() && self.end.is_finite()) {
            return Err(InverseError::EmptySchedule(format!(
                "start frequency must be positive, got {}",
                self.start
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(InverseError::EmptySchedule(format!(
                "frequency step must be positive, got {}",
                self.step
            )));
        }
        if self.end < self.start {
            return Err(InverseError::EmptySchedule(format!(
                "end frequency {} is below start frequency {}",
                self.end, self.start
            )));
        }
        let count = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|m| self.start + m as f64 * self.step).collect())
    }

    pub fn len(&self) -> usize {
        self.frequencies().map(|f| f.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Everything about the experiment the inversion treats as known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseProblem {
    pub upper: Medium,
    pub lower: Medium,
    pub wave: IncidentWave,
    pub receivers: ReceiverArray,
    pub domain_length: f64,
    pub config: InverseConfig,
}

impl InverseProblem {
    pub fn validate(&self) -> Result<(), InverseError> {
        self.config.validate()?;
        self.basis()?;
        self.wave.validate().map_err(forward_setup)?;
        self.upper.validate().map_err(forward_setup)?;
        self.lower.validate().map_err(forward_setup)?;
        Ok(())
    }

    pub fn basis(&self) -> Result<SplineBasis, InverseError> {
        Ok(SplineBasis::new(
            self.config.spline_count,
            self.config.spline_order,
            self.domain_length,
        )?)
    }

    pub fn wavenumbers(&self, frequency: f64) -> Result<Wavenumbers, InverseError> {
        Wavenumbers::new(&self.upper, &self.lower, frequency).map_err(forward_setup)
    }

    /// Inversion mesh at `frequency`.
    pub fn discretize<P: Profile + ?Sized>(&self, profile: &P, frequency: f64) -> Result<SampledSurface, InverseError> {
        let k2 = self.wavenumbers(frequency)?.k2;
        Ok(sample_surface(profile, self.config.mesh_width(k2))?)
    }
}

fn forward_setup(e: ForwardError) -> InverseError {
    InverseError::InvalidParameter(e.to_string())
}

/// Complex field samples at the receivers for one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSamples {
    pub frequency: f64,
    pub values: Vec<Complex64>,
}

/// ∂u_sca/∂s̄_i at every receiver, N^r × N^p.
#[derive(Debug, Clone, PartialEq)]
pub struct FrechetMatrix {
    pub matrix: ComplexMatrix,
    pub frequency: f64,
    pub surface: SampledSurface,
}

/// Trapezoid weights over the midpoints, in arc length.
fn trapezoid_weights(surface: &SampledSurface) -> Vec<f64> {
    let n = surface.len();
    let mut w = surface.arc_lengths.clone();
    if n >= 2 {
        w[0] *= 0.5;
        w[n - 1] *= 0.5;
    }
    w
}

/// C_ji = ∫ [-∂G₁/∂y' v + ∂K₁/∂y' u] φ_i dl' with the surface fields frozen.
pub fn frechet_matrix(
    surface: &SampledSurface,
    solution: &ForwardSolution,
    receivers: &ReceiverArray,
    basis: &SplineBasis,
    k1: f64,
) -> Result<FrechetMatrix, InverseError> {
    let n = surface.len();
    if solution.u.len() != n || solution.v.len() != n {
        return Err(InverseError::InvalidParameter(format!(
            "forward solution has {} unknowns, surface has {n} segments",
            solution.u.len()
        )));
    }
    if receivers.height <= surface.max_height() {
        return Err(InverseError::Forward {
            frequency_index: 0,
            iteration: 0,
            source: ForwardError::ReceiverBelowSurface {
                index: 0,
                height: receivers.height,
                surface_max: surface.max_height(),
            },
        });
    }
    let k = Complex64::new(k1, 0.0);
    let weights = trapezoid_weights(surface);
    let phis: Vec<Vec<(usize, f64)>> = surface
        .midpoints
        .iter()
        .map(|&x| {
            basis
                .active(x)
                .map(|i| (i, basis.eval(i, x)))
                .filter(|&(_, p)| p != 0.0)
                .collect()
        })
        .collect();

    let mut c = ComplexMatrix::zeros(receivers.len(), basis.len());
    for j in 0..receivers.len() {
        let r = receivers.point(j);
        let row = c.row_mut(j);
        for q in 0..n {
            if phis[q].is_empty() {
                continue;
            }
            let rp = surface.point(q);
            let dx = r[0] - rp[0];
            let dy = r[1] - rp[1];
            let dist = dx.hypot(dy);
            let (h0, h1) = hankel1_pair_unchecked(k * dist);
            let g_dy = kernels::g_dy_from_parts(k, h1, dy, dist);
            let k_dy = kernels::k_dy_from_parts(k, h0, h1, dx, dy, dist, surface.slopes[q]);
            let integrand = (k_dy * solution.u[q] - g_dy * solution.v[q]) * weights[q];
            for &(i, phi) in &phis[q] {
                row[i] += integrand * phi;
            }
        }
    }
    if !c.is_finite() {
        return Err(NumericsError::NonFinite("Frechet matrix").into());
    }
    Ok(FrechetMatrix {
        matrix: c,
        frequency: solution.frequency,
        surface: surface.clone(),
    })
}

/// Adds the surface-field response to the frozen-field matrix:
/// column i gains S Z⁻¹ (δb_i − δZ_i x) for the height change δy = φ_i.
pub fn couple_field_response(
    frechet: &mut FrechetMatrix,
    system: &ForwardSystem,
    solution: &ForwardSolution,
    receivers: &ReceiverArray,
    basis: &SplineBasis,
    wave: &IncidentWave,
) -> Result<(), InverseError> {
    let d = system.height_derivative().ok_or_else(|| {
        InverseError::InvalidParameter("forward system was built without its height derivative".into())
    })?;
    let surface = &system.surface;
    let n = surface.len();
    let k1 = system.wavenumbers.k1;
    let s = scattering_operator(receivers, surface, k1).map_err(|source| InverseError::Forward {
        frequency_index: 0,
        iteration: 0,
        source,
    })?;
    let x: Vec<Complex64> = solution.u.iter().chain(&solution.v).copied().collect();
    let dx_full = d.mul_vec(&x)?;
    let inc_dy: Vec<Complex64> = (0..n).map(|j| wave.field_dy(surface.point(j), k1)).collect();

    for i in 0..basis.len() {
        let dy: Vec<f64> = surface.midpoints.iter().map(|&xm| basis.eval(i, xm)).collect();
        if dy.iter().all(|&v| v == 0.0) {
            continue;
        }
        let scaled: Vec<Complex64> = (0..2 * n).map(|q| x[q] * dy[q % n]).collect();
        let d_scaled = d.mul_vec(&scaled)?;
        let rhs: Vec<Complex64> = (0..2 * n)
            .map(|j| {
                let dzx = dy[j % n] * dx_full[j] - d_scaled[j];
                let db = if j < n { inc_dy[j] * dy[j] } else { Complex64::new(0.0, 0.0) };
                db - dzx
            })
            .collect();
        let (dfield, _) = system.solve(&rhs).map_err(|source| InverseError::Forward {
            frequency_index: 0,
            iteration: 0,
            source,
        })?;
        let du = s.mul_vec(&dfield)?;
        for (j, v) in du.into_iter().enumerate() {
            frechet.matrix[(j, i)] += v;
        }
    }
    Ok(())
}

/// A Newton update and the part of the solved step that was discarded.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonStep {
    pub step: Vec<f64>,
    /// ‖Im d̄‖₂ before projection onto real coefficients.
    pub imag_norm: f64,
}

impl NewtonStep {
    pub fn norm(&self) -> f64 {
        self.step.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// d̄ = Re[(CᴴC + τI)⁻¹ Cᴴ (u_mea − u_sca)].
pub fn newton_step(
    frechet: &ComplexMatrix,
    measured: &[Complex64],
    simulated: &[Complex64],
    tau: f64,
) -> Result<NewtonStep, InverseError> {
    if measured.len() != frechet.rows() || simulated.len() != frechet.rows() {
        return Err(InverseError::MeasurementShape {
            expected: frechet.rows(),
            got: measured.len().min(simulated.len()),
        });
    }
    let residual: Vec<Complex64> = measured.iter().zip(simulated).map(|(m, s)| m - s).collect();
    let d = regularized_normal_solve(frechet, &residual, tau)?;
    Ok(NewtonStep {
        step: d.iter().map(|z| z.re).collect(),
        imag_norm: d.iter().map(|z| z.im * z.im).sum::<f64>().sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub frequency_index: usize,
    pub frequency: f64,
    /// 1-based within the frequency.
    pub iteration: usize,
    pub step_norm: f64,
    pub imag_step_norm: f64,
    /// ‖u_mea − u_sca‖₂ before the step.
    pub residual_norm: f64,
    pub segment_count: usize,
    /// Reconstruction error after the step, when a reference is known.
    pub err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyOutcome {
    pub frequency: f64,
    pub iterations: usize,
    pub final_step_norm: f64,
    pub converged: bool,
    pub segment_count: usize,
    pub err: Option<f64>,
    /// Spline coefficients at the end of this frequency.
    pub coeffs: Vec<f64>,
}

/// Coefficients and history of a running reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionState {
    /// 0-based index of the frequency currently (or last) processed.
    pub frequency_index: usize,
    /// Iterations performed at the current frequency.
    pub iteration: usize,
    pub model: SurfaceModel,
    pub history: Vec<IterationRecord>,
    pub outcomes: Vec<FrequencyOutcome>,
}

impl ReconstructionState {
    /// The flat starting surface.
    pub fn flat(basis: SplineBasis) -> Self {
        Self {
            frequency_index: 0,
            iteration: 0,
            model: SurfaceModel::flat(basis),
            history: Vec::new(),
            outcomes: Vec::new(),
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        self.model.coeffs()
    }
}

/// Relative L2 misfit √(Σ(s_rec − s_ref)² / Σ s_ref²) on the given abscissae.
pub fn profile_error<A: Profile + ?Sized, B: Profile + ?Sized>(
    reconstructed: &A,
    reference: &B,
    grid: &[f64],
) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for &x in grid {
        let r = reference.height(x);
        num += (reconstructed.height(x) - r).powi(2);
        den += r * r;
    }
    (den > 0.0).then(|| (num / den).sqrt())
}

/// Newton iterations at one frequency, starting from `state.model`.
pub fn newton_at_frequency(
    state: &mut ReconstructionState,
    frequency_index: usize,
    problem: &InverseProblem,
    measured: &FieldSamples,
    reference: Option<&dyn Profile>,
) -> Result<FrequencyOutcome, InverseError> {
    problem.validate()?;
    if measured.values.len() != problem.receivers.len() {
        return Err(InverseError::MeasurementShape {
            expected: problem.receivers.len(),
            got: measured.values.len(),
        });
    }
    let cfg = &problem.config;
    let frequency = measured.frequency;
    let wavenumbers = problem.wavenumbers(frequency)?;
    let width = cfg.mesh_width(wavenumbers.k2);
    let basis = state.model.basis().clone();
    state.frequency_index = frequency_index;
    state.iteration = 0;

    let mut last_norm = f64::INFINITY;
    let mut converged = false;
    let mut segment_count = 0;
    let mut err = None;
    while state.iteration < cfg.max_iterations {
        let iteration = state.iteration + 1;
        let wrap = |source| InverseError::Forward {
            frequency_index,
            iteration,
            source,
        };
        let surface = sample_surface(&state.model, width)?;
        segment_count = surface.len();
        let system = match cfg.jacobian {
            JacobianMode::FrozenField => ForwardSystem::new(surface.clone(), wavenumbers),
            JacobianMode::FieldCoupled => ForwardSystem::with_height_derivative(surface.clone(), wavenumbers),
        }
        .map_err(wrap)?;
        let solution = system.solve_incident(&problem.wave).map_err(wrap)?;
        let simulated = crate::forward::scattered_field(&problem.receivers, &solution, wavenumbers.k1)
            .map_err(wrap)?;
        let mut frechet = frechet_matrix(&surface, &solution, &problem.receivers, &basis, wavenumbers.k1)
            .map_err(|e| relabel(e, frequency_index, iteration))?;
        if cfg.jacobian == JacobianMode::FieldCoupled {
            couple_field_response(&mut frechet, &system, &solution, &problem.receivers, &basis, &problem.wave)
                .map_err(|e| relabel(e, frequency_index, iteration))?;
        }
        let residual_norm = norm2(
            &measured
                .values
                .iter()
                .zip(&simulated)
                .map(|(m, s)| m - s)
                .collect::<Vec<_>>(),
        );
        let step = newton_step(&frechet.matrix, &measured.values, &simulated, cfg.tau)?;
        let step_norm = step.norm();
        if step.imag_norm > 1e-6 * step_norm {
            debug!(
                "f = {:.1} MHz, iteration {iteration}: discarded imaginary step {:.3e} (real {:.3e})",
                frequency / 1e6,
                step.imag_norm,
                step_norm
            );
        }
        let coeffs: Vec<f64> = state.model.coeffs().iter().zip(&step.step).map(|(s, d)| s + d).collect();
        state.model = SurfaceModel::new(basis.clone(), coeffs)?;
        state.iteration = iteration;
        last_norm = step_norm;

        err = reference.and_then(|r| profile_error(&state.model, r, &surface.midpoints));
        debug!(
            "f = {:.1} MHz, iteration {iteration}: |d| = {step_norm:.3e}, residual = {residual_norm:.3e}, err = {err:?}",
            frequency / 1e6
        );
        state.history.push(IterationRecord {
            frequency_index,
            frequency,
            iteration,
            step_norm,
            imag_step_norm: step.imag_norm,
            residual_norm,
            segment_count,
            err,
        });
        if step_norm <= cfg.step_tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        warn!(
            "f = {:.1} MHz: stopped after {} iterations with |d| = {last_norm:.3e}",
            frequency / 1e6,
            state.iteration
        );
    }
    let outcome = FrequencyOutcome {
        frequency,
        iterations: state.iteration,
        final_step_norm: last_norm,
        converged,
        segment_count,
        err,
        coeffs: state.model.coeffs().to_vec(),
    };
    state.outcomes.push(outcome.clone());
    Ok(outcome)
}

fn relabel(e: InverseError, frequency_index: usize, iteration: usize) -> InverseError {
    match e {
        InverseError::Forward { source, .. } => InverseError::Forward {
            frequency_index,
            iteration,
            source,
        },
        other => other,
    }
}

/// Result of a frequency march, possibly cut short.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub state: ReconstructionState,
    /// Message of the failure that stopped the march early, if any.
    pub aborted: Option<String>,
}

impl ReconstructionReport {
    pub fn final_err(&self) -> Option<f64> {
        self.state.outcomes.last().and_then(|o| o.err)
    }
}

/// Marches through `schedule`, warm-starting each frequency from the previous
/// result and the first one from the flat surface.
pub fn multi_frequency_reconstruct(
    problem: &InverseProblem,
    schedule: &FrequencySchedule,
    measurements: &[FieldSamples],
    reference: Option<&dyn Profile>,
) -> Result<ReconstructionReport, InverseError> {
    problem.validate()?;
    let frequencies = schedule.frequencies()?;
    if measurements.len() != frequencies.len() {
        return Err(InverseError::InvalidParameter(format!(
            "{} measurement sets for {} scheduled frequencies",
            measurements.len(),
            frequencies.len()
        )));
    }
    for (f, m) in frequencies.iter().zip(measurements) {
        if (f - m.frequency).abs() > 1e-6 * f {
            return Err(InverseError::FrequencyMismatch {
                expected: *f,
                got: m.frequency,
            });
        }
    }
    let mut state = ReconstructionState::flat(problem.basis()?);
    let mut aborted = None;
    for (m, data) in measurements.iter().enumerate() {
        match newton_at_frequency(&mut state, m, problem, data, reference) {
            Ok(outcome) => info!(
                "f = {:.1} MHz: {} iterations, |d| = {:.3e}, err = {:?}",
                outcome.frequency / 1e6,
                outcome.iterations,
                outcome.final_step_norm,
                outcome.err
            ),
            Err(e) => {
                warn!("frequency march stopped: {e}");
                aborted = Some(e.to_string());
                break;
            }
        }
    }
    Ok(ReconstructionReport { state, aborted })
}
