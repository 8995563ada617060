//! Gaussian random rough surfaces by spectral synthesis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{GriddedSurface, Profile, SurfaceError};
use crate::numerics::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSurfaceParams {
    /// Correlation length ℓ (m).
    pub corr_length: f64,
    /// RMS height h (m).
    pub height_std: f64,
    /// Domain length L (m).
    pub domain_length: f64,
    /// Number of spectral samples; a power of two, at least 256.
    pub grid_count: usize,
    /// Width of the cosine ramp at each end (m).
    pub taper_width: f64,
    pub seed: u64,
}

impl RandomSurfaceParams {
    pub fn validate(&self) -> Result<(), SurfaceError> {
        let bad = |msg: String| Err(SurfaceError::InvalidParameter(msg));
        if !(self.corr_length > 0.0 && self.corr_length.is_finite()) {
            return bad(format!("correlation length must be positive, got {}", self.corr_length));
        }
        if !(self.height_std >= 0.0 && self.height_std.is_finite()) {
            return bad(format!("height std must be non-negative, got {}", self.height_std));
        }
        if !(self.domain_length > 0.0 && self.domain_length.is_finite()) {
            return bad(format!("domain length must be positive, got {}", self.domain_length));
        }
        if !(self.taper_width >= 0.0 && self.taper_width < self.domain_length / 2.0) {
            return bad(format!(
                "taper width must lie in [0, L/2), got {} for L = {}",
                self.taper_width, self.domain_length
            ));
        }
        if self.grid_count < 256 || !self.grid_count.is_power_of_two() {
            return bad(format!(
                "grid count must be a power of two >= 256, got {}",
                self.grid_count
            ));
        }
        Ok(())
    }
}

/// Gaussian roughness spectrum W(k) = h² ℓ / (2√π) · exp(-k² ℓ² / 4), whose
/// autocorrelation is h² exp(-x² / ℓ²).
pub fn gaussian_spectrum(k: f64, height_std: f64, corr_length: f64) -> f64 {
    height_std * height_std * corr_length / (2.0 * PI.sqrt())
        * (-k * k * corr_length * corr_length / 4.0).exp()
}

/// Cosine ramp: 0 at the domain ends, 1 beyond `taper_width` from them.
pub fn edge_taper(x: f64, domain_length: f64, taper_width: f64) -> f64 {
    let d = (x + domain_length / 2.0).min(domain_length / 2.0 - x).max(0.0);
    if d >= taper_width {
        1.0
    } else {
        0.5 * (1.0 - (PI * d / taper_width).cos())
    }
}

/// Draws a stationary Gaussian surface with the Gaussian spectrum, then
/// applies the edge taper so heights and slopes vanish at ±L/2.
///
/// The grid has `grid_count + 1` points including both endpoints. The DC
/// spectral bin is drawn like every other bin, so the surface has zero
/// ensemble mean rather than zero sample mean.
pub fn generate_gaussian_surface(params: &RandomSurfaceParams) -> Result<GriddedSurface, SurfaceError> {
    params.validate()?;
    let n = params.grid_count;
    let l = params.domain_length;
    let mut rng = SeededRng::new(params.seed);

    let amplitude = |j: usize| {
        let k = 2.0 * PI * j as f64 / l;
        (2.0 * PI * l * gaussian_spectrum(k, params.height_std, params.corr_length)).sqrt()
    };

    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    spectrum[0] = Complex64::new(amplitude(0) * rng.gaussian(), 0.0);
    for j in 1..n / 2 {
        let a = amplitude(j) / std::f64::consts::SQRT_2;
        let re = rng.gaussian();
        let im = rng.gaussian();
        spectrum[j] = Complex64::new(a * re, a * im);
        spectrum[n - j] = spectrum[j].conj();
    }
    spectrum[n / 2] = Complex64::new(amplitude(n / 2) * rng.gaussian(), 0.0);

    FftPlanner::new().plan_fft_inverse(n).process(&mut spectrum);

    let dx = l / n as f64;
    let mut heights: Vec<f64> = spectrum.iter().map(|z| z.re / l).collect();
    heights.push(heights[0]);
    for (k, h) in heights.iter_mut().enumerate() {
        *h *= edge_taper(-l / 2.0 + k as f64 * dx, l, params.taper_width);
    }
    if params.taper_width > 0.0 {
        GriddedSurface::with_end_slopes(l, heights, 0.0, 0.0)
    } else {
        GriddedSurface::new(l, heights)
    }
}

/// Empirical height statistics of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceStatistics {
    /// RMS height about zero over the analysed window (m).
    pub height_std: f64,
    /// Lag at which the normalized autocorrelation first drops below e⁻¹ (m);
    /// `None` if it never does within the window.
    pub corr_length: Option<f64>,
}

/// Statistics over the grid points farther than `margin` from both ends.
pub fn surface_statistics(surface: &GriddedSurface, margin: f64) -> SurfaceStatistics {
    let xs = surface.abscissae();
    let half = surface.domain_length() / 2.0;
    let window: Vec<f64> = xs
        .iter()
        .zip(surface.heights())
        .filter(|(x, _)| x.abs() <= half - margin)
        .map(|(_, h)| *h)
        .collect();
    let acf = autocorrelation(&window, window.len() / 2);
    SurfaceStatistics {
        height_std: acf.first().copied().unwrap_or(0.0).sqrt(),
        corr_length: first_e_folding(&acf, surface.spacing()),
    }
}

/// Biased autocorrelation estimate Σ h_n h_{n+m} / (N - m) for m = 0..max_lag.
pub fn autocorrelation(heights: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag.min(heights.len().saturating_sub(1)))
        .map(|m| {
            let pairs = heights.len() - m;
            heights[..pairs]
                .iter()
                .zip(&heights[m..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / pairs as f64
        })
        .collect()
}

/// First lag where acf[m]/acf[0] crosses e⁻¹, linearly interpolated.
pub fn first_e_folding(acf: &[f64], spacing: f64) -> Option<f64> {
    let c0 = *acf.first()?;
    if c0 <= 0.0 {
        return None;
    }
    let target = (-1.0f64).exp();
    acf.windows(2).enumerate().find_map(|(m, pair)| {
        let (a, b) = (pair[0] / c0, pair[1] / c0);
        (a >= target && b < target).then(|| (m as f64 + (a - target) / (a - b)) * spacing)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Profile;

    fn params(seed: u64) -> RandomSurfaceParams {
        RandomSurfaceParams {
            corr_length: 0.7,
            height_std: 0.07,
            domain_length: 16.0,
            grid_count: 1024,
            taper_width: 0.25,
            seed,
        }
    }

    #[test]
    fn zero_height_std_gives_flat_surface() {
        let s = generate_gaussian_surface(&RandomSurfaceParams {
            height_std: 0.0,
            ..params(3)
        })
        .unwrap();
        assert!(s.heights().iter().all(|&h| h == 0.0));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_gaussian_surface(&params(5)).unwrap();
        let b = generate_gaussian_surface(&params(5)).unwrap();
        let c = generate_gaussian_surface(&params(6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn ends_are_flat() {
        let s = generate_gaussian_surface(&params(9)).unwrap();
        for x in [-8.0, 8.0] {
            assert!(s.height(x).abs() < 1e-12);
            assert!(s.slope(x).abs() < 1e-6);
        }
    }

    #[test]
    fn taper_shape() {
        assert_eq!(edge_taper(-8.0, 16.0, 0.25), 0.0);
        assert!((edge_taper(-7.875, 16.0, 0.25) - 0.5).abs() < 1e-12);
        assert_eq!(edge_taper(0.0, 16.0, 0.25), 1.0);
        assert_eq!(edge_taper(7.9, 16.0, 0.0), 1.0);
    }

    #[test]
    fn parameter_validation() {
        for bad in [
            RandomSurfaceParams { corr_length: 0.0, ..params(0) },
            RandomSurfaceParams { height_std: -0.1, ..params(0) },
            RandomSurfaceParams { grid_count: 1000, ..params(0) },
            RandomSurfaceParams { grid_count: 128, ..params(0) },
            RandomSurfaceParams { taper_width: 8.0, ..params(0) },
        ] {
            assert!(generate_gaussian_surface(&bad).is_err());
        }
    }

    #[test]
    fn e_folding_of_exact_gaussian() {
        let dx = 0.01;
        let acf: Vec<f64> = (0..300).map(|m| (-(m as f64 * dx / 0.7).powi(2)).exp()).collect();
        let lag = first_e_folding(&acf, dx).unwrap();
        assert!((lag - 0.7).abs() < 1e-3);
    }
}
