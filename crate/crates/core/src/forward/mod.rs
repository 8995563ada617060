//! Forward scattering by a penetrable rough interface: tapered plane-wave
//! excitation, pulse-basis/point-matching discretization of the coupled
//! surface integral equations, and scattered-field evaluation.
//!
//! Time dependence is e^{-iωt}. Unknowns are the total field u and its normal
//! derivative v on the interface, both continuous across it.

pub mod kernels;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numerics::special::hankel1_pair_unchecked;
use crate::numerics::{norm2, ComplexMatrix, LuFactors, NumericsError, EULER_GAMMA};
use crate::surface::SampledSurface;

pub use kernels::{green_g, green_g_dy, green_k, green_k_dy};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity (F/m).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability (H/m).
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;

/// Relative residual ‖Zx - b‖ / ‖b‖ tolerated on every forward solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum ForwardError {
    #[error("invalid forward-model parameter: {0}")]
    InvalidParameter(String),
    #[error("receiver {index} at height {height} m is not above the surface (max height {surface_max} m)")]
    ReceiverBelowSurface {
        index: usize,
        height: f64,
        surface_max: f64,
    },
    #[error("forward solve residual {residual:e} exceeds tolerance")]
    Residual { residual: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Homogeneous medium described by relative constants and conductivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub eps_r: f64,
    pub mu_r: f64,
    /// Conductivity (S/m).
    pub sigma: f64,
}

impl Medium {
    pub const VACUUM: Medium = Medium {
        eps_r: 1.0,
        mu_r: 1.0,
        sigma: 0.0,
    };

    pub fn new(eps_r: f64, mu_r: f64, sigma: f64) -> Result<Self, ForwardError> {
        let m = Self { eps_r, mu_r, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ForwardError> {
        if !(self.eps_r >= 1.0 && self.eps_r.is_finite()) {
            return Err(ForwardError::InvalidParameter(format!(
                "relative permittivity must be >= 1, got {}",
                self.eps_r
            )));
        }
        if !(self.mu_r > 0.0 && self.mu_r.is_finite()) {
            return Err(ForwardError::InvalidParameter(format!(
                "relative permeability must be positive, got {}",
                self.mu_r
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(ForwardError::InvalidParameter(format!(
                "conductivity must be non-negative, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    pub fn is_lossless(&self) -> bool {
        self.sigma == 0.0
    }
}

/// k = ω √(μ ε_c), ε_c = ε + iσ/ω, on the branch Re k > 0, Im k ≥ 0.
pub fn wavenumber(medium: &Medium, frequency: f64) -> Result<Complex64, ForwardError> {
    if !(frequency > 0.0 && frequency.is_finite()) {
        return Err(ForwardError::InvalidParameter(format!(
            "frequency must be positive, got {frequency}"
        )));
    }
    medium.validate()?;
    let omega = 2.0 * PI * frequency;
    let mu = VACUUM_PERMEABILITY * medium.mu_r;
    let eps_c = Complex64::new(VACUUM_PERMITTIVITY * medium.eps_r, medium.sigma / omega);
    Ok(omega * (mu * eps_c).sqrt())
}

/// Wavenumbers of the two media at one frequency; the upper medium must be
/// lossless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumbers {
    pub frequency: f64,
    pub k1: f64,
    pub k2: Complex64,
}

impl Wavenumbers {
    pub fn new(upper: &Medium, lower: &Medium, frequency: f64) -> Result<Self, ForwardError> {
        if !upper.is_lossless() {
            return Err(ForwardError::InvalidParameter(
                "the medium carrying the incident wave must be lossless".into(),
            ));
        }
        Ok(Self {
            frequency,
            k1: wavenumber(upper, frequency)?.re,
            k2: wavenumber(lower, frequency)?,
        })
    }
}

/// Plane wave with a Gaussian (Thorsos) taper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentWave {
    /// Incidence angle from the vertical (rad).
    pub theta: f64,
    /// Taper width g (m).
    pub taper: f64,
}

impl IncidentWave {
    pub fn new(theta: f64, taper: f64) -> Result<Self, ForwardError> {
        let w = Self { theta, taper };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), ForwardError> {
        if !(self.theta.abs() < PI / 2.0) {
            return Err(ForwardError::InvalidParameter(format!(
                "incidence angle must satisfy |θ| < π/2, got {}",
                self.theta
            )));
        }
        if !(self.taper > 0.0 && self.taper.is_finite()) {
            return Err(ForwardError::InvalidParameter(format!(
                "taper width must be positive, got {}",
                self.taper
            )));
        }
        Ok(())
    }

    /// u_inc(r) for wavenumber k1 of the upper medium.
    pub fn field(&self, r: [f64; 2], k1: f64) -> Complex64 {
        let (phase_arg, decay, xi) = self.parts(r, k1);
        let exponent = Complex64::new(-decay * decay, k1 * phase_arg * (1.0 + xi));
        exponent.exp()
    }

    /// ∂u_inc/∂y at r.
    pub fn field_dy(&self, r: [f64; 2], k1: f64) -> Complex64 {
        let (phase_arg, decay, xi) = self.parts(r, k1);
        let (sin, cos) = self.theta.sin_cos();
        let tan = sin / cos;
        let denom = (k1 * self.taper * cos).powi(2);
        let dphase = -cos;
        let ddecay = tan / self.taper;
        let dxi = 4.0 * decay * ddecay / denom;
        let dlog = Complex64::new(
            -2.0 * decay * ddecay,
            k1 * (dphase * (1.0 + xi) + phase_arg * dxi),
        );
        self.field(r, k1) * dlog
    }

    /// (k̂·r, (x + y tanθ)/g, ξ(r)).
    fn parts(&self, r: [f64; 2], k1: f64) -> (f64, f64, f64) {
        let (sin, cos) = self.theta.sin_cos();
        let phase_arg = r[0] * sin - r[1] * cos;
        let decay = (r[0] + r[1] * sin / cos) / self.taper;
        let xi = (2.0 * decay * decay - 1.0) / (k1 * self.taper * cos).powi(2);
        (phase_arg, decay, xi)
    }
}

/// u_inc(r) for the tapered plane wave.
pub fn incident_field(r: [f64; 2], wave: &IncidentWave, k1: f64) -> Complex64 {
    wave.field(r, k1)
}

/// Receivers on the horizontal line y = height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverArray {
    pub xs: Vec<f64>,
    pub height: f64,
}

impl ReceiverArray {
    pub fn new(xs: Vec<f64>, height: f64) -> Result<Self, ForwardError> {
        if xs.is_empty() {
            return Err(ForwardError::InvalidParameter("no receivers".into()));
        }
        if !height.is_finite() || xs.iter().any(|x| !x.is_finite()) {
            return Err(ForwardError::InvalidParameter(
                "receiver coordinates must be finite".into(),
            ));
        }
        if xs.windows(2).any(|p| p[1] <= p[0]) {
            return Err(ForwardError::InvalidParameter(
                "receiver abscissae must be strictly increasing".into(),
            ));
        }
        Ok(Self { xs, height })
    }

    /// x_j = start + (j - 1) step for j = 1..=floor((end - start) / step) + 1.
    /// With `include_endpoint == false` a sample landing on `end` is dropped.
    pub fn grid(start: f64, end: f64, step: f64, height: f64, include_endpoint: bool) -> Result<Self, ForwardError> {
        if !(step > 0.0 && step.is_finite()) || !(end >= start) {
            return Err(ForwardError::InvalidParameter(format!(
                "invalid receiver grid {start}:{step}:{end}"
            )));
        }
        let span = (end - start) / step;
        let mut count = (span + 1e-9).floor() as usize + 1;
        let lands_on_end = (span - span.round()).abs() < 1e-9;
        if !include_endpoint && lands_on_end && count > 1 {
            count -= 1;
        }
        Self::new((0..count).map(|j| start + j as f64 * step).collect(), height)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn point(&self, j: usize) -> [f64; 2] {
        [self.xs[j], self.height]
    }

    fn check_above(&self, surface: &SampledSurface) -> Result<(), ForwardError> {
        let surface_max = surface.max_height();
        if self.height <= surface_max {
            return Err(ForwardError::ReceiverBelowSurface {
                index: 0,
                height: self.height,
                surface_max,
            });
        }
        Ok(())
    }
}

/// Surface field coefficients (ū, v̄) at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardSolution {
    pub frequency: f64,
    pub surface: SampledSurface,
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub relative_residual: f64,
}

/// Self term of ∫ G over a segment of arc length `arc`, from the
/// small-argument form of H₀⁽¹⁾.
fn green_self_term(k: Complex64, arc: f64) -> Complex64 {
    let log_term = (k * arc / 4.0).ln();
    arc * (Complex64::new(0.0, 0.25) - (log_term + (EULER_GAMMA - 1.0)) / (2.0 * PI))
}

/// Visits every off-diagonal pair (j, i) once per unordered pair, passing
/// both kernel sets (observation j / source i and the reverse).
fn for_each_pair(
    surface: &SampledSurface,
    k: Complex64,
    mut visit: impl FnMut(usize, usize, kernels::KernelValues, kernels::KernelValues),
) {
    let n = surface.len();
    for j in 0..n {
        let rj = surface.point(j);
        for i in j + 1..n {
            let ri = surface.point(i);
            let dx = rj[0] - ri[0];
            let dy = rj[1] - ri[1];
            let dist = dx.hypot(dy);
            let (h0, h1) = hankel1_pair_unchecked(k * dist);
            // observation j, source i
            let ji = kernels::kernel_values(k, dx, dy, dist, surface.slopes[i], h0, h1);
            // observation i, source j
            let ij = kernels::kernel_values(k, -dx, -dy, dist, surface.slopes[j], h0, h1);
            visit(j, i, ji, ij);
        }
    }
}

fn check_surface(surface: &SampledSurface) -> Result<(), ForwardError> {
    if surface.len() < 2 {
        return Err(ForwardError::InvalidParameter(format!(
            "at least two segments are required, got {}",
            surface.len()
        )));
    }
    Ok(())
}

/// Impedance matrix Z of the coupled integral equations, 2N^s × 2N^s,
/// unknowns ordered [ū; v̄].
pub fn assemble_impedance(surface: &SampledSurface, k1: f64, k2: Complex64) -> Result<ComplexMatrix, ForwardError> {
    Ok(assemble(surface, k1, k2, false)?.0)
}

/// Z together with D, where D_ji = ∂Z_ji/∂y_j at fixed slopes. Because every
/// off-diagonal entry depends on the heights only through y_j - y_i, a
/// height perturbation δy changes Z by δZ_ji = D_ji (δy_j - δy_i).
pub fn assemble_impedance_with_height_derivative(
    surface: &SampledSurface,
    k1: f64,
    k2: Complex64,
) -> Result<(ComplexMatrix, ComplexMatrix), ForwardError> {
    let (z, d) = assemble(surface, k1, k2, true)?;
    Ok((z, d.expect("derivative requested")))
}

fn assemble(
    surface: &SampledSurface,
    k1: f64,
    k2: Complex64,
    with_derivative: bool,
) -> Result<(ComplexMatrix, Option<ComplexMatrix>), ForwardError> {
    check_surface(surface)?;
    if !(k1 > 0.0) || !(k2.re > 0.0 && k2.im >= 0.0) {
        return Err(ForwardError::InvalidParameter(format!(
            "wavenumbers must lie in the upper half plane with positive real part (k1 = {k1}, k2 = {k2})"
        )));
    }
    let n = surface.len();
    let w = &surface.arc_lengths;
    let mut z = ComplexMatrix::zeros(2 * n, 2 * n);
    let mut d = with_derivative.then(|| ComplexMatrix::zeros(2 * n, 2 * n));
    let half = Complex64::new(0.5, 0.0);
    let k1c = Complex64::new(k1, 0.0);

    for i in 0..n {
        z[(i, i)] = half;
        z[(i, n + i)] = green_self_term(k1c, w[i]);
        z[(n + i, i)] = half;
        z[(n + i, n + i)] = -green_self_term(k2, w[i]);
    }

    for_each_pair(surface, k1c, |j, i, ji, ij| {
        z[(j, i)] = -w[i] * ji.k;
        z[(j, n + i)] = w[i] * ji.g;
        z[(i, j)] = -w[j] * ij.k;
        z[(i, n + j)] = w[j] * ij.g;
        if let Some(d) = d.as_mut() {
            // ∂/∂y_j = -∂/∂y' for kernels of (y_j - y_i)
            d[(j, i)] = w[i] * ji.k_dy;
            d[(j, n + i)] = -w[i] * ji.g_dy;
            d[(i, j)] = w[j] * ij.k_dy;
            d[(i, n + j)] = -w[j] * ij.g_dy;
        }
    });
    for_each_pair(surface, k2, |j, i, ji, ij| {
        z[(n + j, i)] = w[i] * ji.k;
        z[(n + j, n + i)] = -w[i] * ji.g;
        z[(n + i, j)] = w[j] * ij.k;
        z[(n + i, n + j)] = -w[j] * ij.g;
        if let Some(d) = d.as_mut() {
            d[(n + j, i)] = -w[i] * ji.k_dy;
            d[(n + j, n + i)] = w[i] * ji.g_dy;
            d[(n + i, j)] = -w[j] * ij.k_dy;
            d[(n + i, n + j)] = w[j] * ij.g_dy;
        }
    });

    if !z.is_finite() {
        return Err(NumericsError::NonFinite("impedance matrix").into());
    }
    Ok((z, d))
}

/// Tested incident field [u_inc(x_j, s(x_j)); 0].
pub fn incident_vector(surface: &SampledSurface, wave: &IncidentWave, k1: f64) -> Vec<Complex64> {
    let n = surface.len();
    let mut b = vec![Complex64::new(0.0, 0.0); 2 * n];
    for (j, bj) in b[..n].iter_mut().enumerate() {
        *bj = wave.field(surface.point(j), k1);
    }
    b
}

/// An assembled and factored impedance system on one surface and frequency.
#[derive(Debug, Clone)]
pub struct ForwardSystem {
    pub surface: SampledSurface,
    pub wavenumbers: Wavenumbers,
    matrix: ComplexMatrix,
    height_derivative: Option<ComplexMatrix>,
    lu: LuFactors,
}

impl ForwardSystem {
    pub fn new(surface: SampledSurface, wavenumbers: Wavenumbers) -> Result<Self, ForwardError> {
        let matrix = assemble_impedance(&surface, wavenumbers.k1, wavenumbers.k2)?;
        let lu = LuFactors::factor(&matrix)?;
        Ok(Self {
            surface,
            wavenumbers,
            matrix,
            height_derivative: None,
            lu,
        })
    }

    /// Also keeps the height-derivative matrix for field-sensitivity solves.
    pub fn with_height_derivative(surface: SampledSurface, wavenumbers: Wavenumbers) -> Result<Self, ForwardError> {
        let (matrix, d) =
            assemble_impedance_with_height_derivative(&surface, wavenumbers.k1, wavenumbers.k2)?;
        let lu = LuFactors::factor(&matrix)?;
        Ok(Self {
            surface,
            wavenumbers,
            matrix,
            height_derivative: Some(d),
            lu,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn height_derivative(&self) -> Option<&ComplexMatrix> {
        self.height_derivative.as_ref()
    }

    /// Solves Z x = b and checks the residual.
    pub fn solve(&self, rhs: &[Complex64]) -> Result<(Vec<Complex64>, f64), ForwardError> {
        let x = self.lu.solve(rhs)?;
        let zx = self.matrix.mul_vec(&x)?;
        let diff: Vec<Complex64> = zx.iter().zip(rhs).map(|(a, b)| a - b).collect();
        let scale = norm2(rhs);
        let residual = if scale > 0.0 { norm2(&diff) / scale } else { norm2(&diff) };
        if !(residual <= RESIDUAL_TOLERANCE) {
            return Err(ForwardError::Residual { residual });
        }
        Ok((x, residual))
    }

    pub fn solve_incident(&self, wave: &IncidentWave) -> Result<ForwardSolution, ForwardError> {
        wave.validate()?;
        let rhs = incident_vector(&self.surface, wave, self.wavenumbers.k1);
        let (x, residual) = self.solve(&rhs)?;
        let n = self.surface.len();
        Ok(ForwardSolution {
            frequency: self.wavenumbers.frequency,
            surface: self.surface.clone(),
            u: x[..n].to_vec(),
            v: x[n..].to_vec(),
            relative_residual: residual,
        })
    }
}

/// Solves the forward problem on `surface` for the incident wave.
pub fn solve_forward(
    surface: &SampledSurface,
    wavenumbers: Wavenumbers,
    wave: &IncidentWave,
) -> Result<ForwardSolution, ForwardError> {
    ForwardSystem::new(surface.clone(), wavenumbers)?.solve_incident(wave)
}

/// Matrix S with u_sca = S [ū; v̄] at the receivers (midpoint rule).
pub fn scattering_operator(
    receivers: &ReceiverArray,
    surface: &SampledSurface,
    k1: f64,
) -> Result<ComplexMatrix, ForwardError> {
    receivers.check_above(surface)?;
    let n = surface.len();
    let k = Complex64::new(k1, 0.0);
    let mut s = ComplexMatrix::zeros(receivers.len(), 2 * n);
    for j in 0..receivers.len() {
        let r = receivers.point(j);
        let row = s.row_mut(j);
        for i in 0..n {
            let rp = surface.point(i);
            let dx = r[0] - rp[0];
            let dy = r[1] - rp[1];
            let dist = dx.hypot(dy);
            let (h0, h1) = hankel1_pair_unchecked(k * dist);
            let w = surface.arc_lengths[i];
            row[i] = w * kernels::k_from_parts(k, h1, dx, dy, dist, surface.slopes[i]);
            row[n + i] = -w * Complex64::i() * 0.25 * h0;
        }
    }
    Ok(s)
}

/// u_sca at the receivers from the surface fields.
pub fn scattered_field(
    receivers: &ReceiverArray,
    solution: &ForwardSolution,
    k1: f64,
) -> Result<Vec<Complex64>, ForwardError> {
    let s = scattering_operator(receivers, &solution.surface, k1)?;
    let x: Vec<Complex64> = solution.u.iter().chain(&solution.v).copied().collect();
    Ok(s.mul_vec(&x)?)
}
