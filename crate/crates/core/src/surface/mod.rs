//! Surface profiles: random Gaussian surfaces, the triangular test profile,
//! the spline parameterization used by the inversion, and the midpoint
//! sampling consumed by the forward solver.

mod gridded;
mod random;
mod spline;

pub use gridded::GriddedSurface;
pub use random::{
    autocorrelation, edge_taper, first_e_folding, gaussian_spectrum, generate_gaussian_surface,
    surface_statistics, RandomSurfaceParams, SurfaceStatistics,
};
pub use spline::{cardinal_bspline, cardinal_bspline_derivative, fit_spline, SplineBasis, SurfaceModel};

use serde::{Deserialize, Serialize};

use crate::numerics::NumericsError;

#[derive(Debug, thiserror::Error)]
pub enum SurfaceError {
    #[error("invalid surface parameter: {0}")]
    InvalidParameter(String),
    #[error("spline fit is rank deficient")]
    RankDeficient,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// A single-valued height function y = s(x) on [-L/2, L/2].
pub trait Profile {
    fn height(&self, x: f64) -> f64;
    fn slope(&self, x: f64) -> f64;
    fn domain_length(&self) -> f64;
}

impl<P: Profile + ?Sized> Profile for &P {
    fn height(&self, x: f64) -> f64 {
        (**self).height(x)
    }
    fn slope(&self, x: f64) -> f64 {
        (**self).slope(x)
    }
    fn domain_length(&self) -> f64 {
        (**self).domain_length()
    }
}

impl<P: Profile + ?Sized> Profile for Box<P> {
    fn height(&self, x: f64) -> f64 {
        (**self).height(x)
    }
    fn slope(&self, x: f64) -> f64 {
        (**self).slope(x)
    }
    fn domain_length(&self) -> f64 {
        (**self).domain_length()
    }
}

/// The plane y = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatProfile {
    pub domain_length: f64,
}

impl Profile for FlatProfile {
    fn height(&self, _x: f64) -> f64 {
        0.0
    }
    fn slope(&self, _x: f64) -> f64 {
        0.0
    }
    fn domain_length(&self) -> f64 {
        self.domain_length
    }
}

/// Piecewise-linear test profile with two jumps and a ridge.
pub fn triangular_profile(x: f64) -> f64 {
    if (-6.0..=-3.0).contains(&x) {
        x + 4.0
    } else if (0.0..=2.0).contains(&x) {
        x
    } else if (2.0..4.0).contains(&x) {
        4.0 - x
    } else {
        0.0
    }
}

fn triangular_slope(x: f64) -> f64 {
    if (-6.0..=-3.0).contains(&x) || (0.0..2.0).contains(&x) {
        1.0
    } else if (2.0..4.0).contains(&x) {
        -1.0
    } else {
        0.0
    }
}

/// [`triangular_profile`] on the 16 m domain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TriangularProfile;

impl Profile for TriangularProfile {
    fn height(&self, x: f64) -> f64 {
        triangular_profile(x)
    }
    fn slope(&self, x: f64) -> f64 {
        triangular_slope(x)
    }
    fn domain_length(&self) -> f64 {
        16.0
    }
}

/// Midpoint discretization of a profile into N^s equal segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSurface {
    pub domain_length: f64,
    /// Segment width w (m).
    pub width: f64,
    pub midpoints: Vec<f64>,
    pub heights: Vec<f64>,
    pub slopes: Vec<f64>,
    /// Arc length of each segment, w √(1 + s'²).
    pub arc_lengths: Vec<f64>,
}

impl SampledSurface {
    pub fn len(&self) -> usize {
        self.midpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.midpoints.is_empty()
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        [self.midpoints[i], self.heights[i]]
    }

    pub fn max_height(&self) -> f64 {
        self.heights.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Number of segments for a requested width: round(L / w), at least 1.
pub fn segment_count(domain_length: f64, width: f64) -> usize {
    ((domain_length / width).round() as usize).max(1)
}

/// Samples `profile` at the midpoints of round(L / w) equal segments; the
/// width is recomputed as L / N^s so the segments tile [-L/2, L/2] exactly.
pub fn sample_surface<P: Profile + ?Sized>(profile: &P, width: f64) -> Result<SampledSurface, SurfaceError> {
    let l = profile.domain_length();
    if !(width > 0.0 && width.is_finite()) {
        return Err(SurfaceError::InvalidParameter(format!(
            "segment width must be positive, got {width}"
        )));
    }
    if width >= l {
        return Err(SurfaceError::InvalidParameter(format!(
            "segment width {width} m does not subdivide a {l} m domain"
        )));
    }
    sample_surface_with_count(profile, segment_count(l, width))
}

/// Samples `profile` on exactly `count` equal segments.
pub fn sample_surface_with_count<P: Profile + ?Sized>(
    profile: &P,
    count: usize,
) -> Result<SampledSurface, SurfaceError> {
    if count < 2 {
        return Err(SurfaceError::InvalidParameter(format!(
            "at least two segments are required, got {count}"
        )));
    }
    let l = profile.domain_length();
    let width = l / count as f64;
    let midpoints: Vec<f64> = (0..count)
        .map(|i| -l / 2.0 + (i as f64 + 0.5) * width)
        .collect();
    let heights: Vec<f64> = midpoints.iter().map(|&x| profile.height(x)).collect();
    let slopes: Vec<f64> = midpoints.iter().map(|&x| profile.slope(x)).collect();
    if heights.iter().chain(&slopes).any(|v| !v.is_finite()) {
        return Err(SurfaceError::InvalidParameter(
            "profile produced non-finite samples".into(),
        ));
    }
    let arc_lengths = slopes.iter().map(|s| width * (1.0 + s * s).sqrt()).collect();
    Ok(SampledSurface {
        domain_length: l,
        width,
        midpoints,
        heights,
        slopes,
        arc_lengths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Linear;
    impl Profile for Linear {
        fn height(&self, x: f64) -> f64 {
            x
        }
        fn slope(&self, _x: f64) -> f64 {
            1.0
        }
        fn domain_length(&self) -> f64 {
            16.0
        }
    }

    #[test]
    fn triangular_cases() {
        assert_eq!(triangular_profile(-4.0), 0.0);
        assert_eq!(triangular_profile(2.0), 2.0);
        assert_eq!(triangular_profile(5.0), 0.0);
        assert_eq!(triangular_profile(-6.0), -2.0);
        assert_eq!(triangular_profile(-1.0), 0.0);
        assert_eq!(triangular_profile(1.5), 1.5);
        assert_eq!(triangular_profile(3.0), 1.0);
        assert_eq!(triangular_profile(4.0), 0.0);
    }

    #[test]
    fn grid_contract() {
        let s = sample_surface(&FlatProfile { domain_length: 16.0 }, 0.1).unwrap();
        assert_eq!(s.len(), 160);
        assert!((s.midpoints[0] + 7.95).abs() < 1e-12);
        assert!((s.midpoints[159] - 7.95).abs() < 1e-12);
        assert!(s.arc_lengths.iter().all(|&w| w == s.width));
        let total: f64 = (0..s.len()).map(|_| s.width).sum();
        assert!((total - 16.0).abs() < 1e-12);
    }

    #[test]
    fn width_rounds_to_integer_count() {
        let s = sample_surface(&FlatProfile { domain_length: 16.0 }, 0.0333).unwrap();
        assert_eq!(s.len(), 480);
        assert!((s.width * 480.0 - 16.0).abs() < 1e-12);
    }

    #[test]
    fn constant_slope_arc_length() {
        let s = sample_surface(&Linear, 0.2).unwrap();
        for &w in &s.arc_lengths {
            assert!((w - 0.2 * 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn width_must_subdivide_domain() {
        let flat = FlatProfile { domain_length: 16.0 };
        assert!(sample_surface(&flat, 16.0).is_err());
        assert!(sample_surface(&flat, 20.0).is_err());
        assert!(sample_surface(&flat, 0.0).is_err());
        assert!(sample_surface(&flat, f64::NAN).is_err());
    }
}
