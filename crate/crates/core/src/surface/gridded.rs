//! Uniformly gridded profiles with a clamped cubic-spline interpolant.

use serde::{Deserialize, Serialize};

use super::{Profile, SurfaceError};

/// Heights on a uniform grid spanning [-L/2, L/2] (both endpoints included),
/// interpolated by a clamped cubic spline so heights and slopes are
/// available anywhere in the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GriddedSurface {
    domain_length: f64,
    heights: Vec<f64>,
    second_derivs: Vec<f64>,
}

impl GriddedSurface {
    /// End slopes are estimated with second-order one-sided differences.
    pub fn new(domain_length: f64, heights: Vec<f64>) -> Result<Self, SurfaceError> {
        Self::check(domain_length, &heights)?;
        let h = domain_length / (heights.len() - 1) as f64;
        let n = heights.len();
        let (left, right) = if n >= 3 {
            (
                (-3.0 * heights[0] + 4.0 * heights[1] - heights[2]) / (2.0 * h),
                (3.0 * heights[n - 1] - 4.0 * heights[n - 2] + heights[n - 3]) / (2.0 * h),
            )
        } else {
            let s = (heights[1] - heights[0]) / h;
            (s, s)
        };
        Self::with_end_slopes(domain_length, heights, left, right)
    }

    /// Clamped spline with prescribed slopes at -L/2 and L/2.
    pub fn with_end_slopes(
        domain_length: f64,
        heights: Vec<f64>,
        left_slope: f64,
        right_slope: f64,
    ) -> Result<Self, SurfaceError> {
        Self::check(domain_length, &heights)?;
        let n = heights.len();
        let h = domain_length / (n - 1) as f64;
        let y = &heights;

        // Tridiagonal system for the second derivatives (Thomas algorithm).
        let mut diag = vec![4.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 2.0;
        diag[n - 1] = 2.0;
        rhs[0] = 6.0 / h * ((y[1] - y[0]) / h - left_slope);
        rhs[n - 1] = 6.0 / h * (right_slope - (y[n - 1] - y[n - 2]) / h);
        for i in 1..n - 1 {
            rhs[i] = 6.0 / (h * h) * (y[i + 1] - 2.0 * y[i] + y[i - 1]);
        }
        for i in 1..n {
            let m = 1.0 / diag[i - 1];
            diag[i] -= m;
            rhs[i] -= m * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - m[i + 1]) / diag[i];
        }

        Ok(Self {
            domain_length,
            heights,
            second_derivs: m,
        })
    }

    fn check(domain_length: f64, heights: &[f64]) -> Result<(), SurfaceError> {
        if !(domain_length > 0.0 && domain_length.is_finite()) {
            return Err(SurfaceError::InvalidParameter(format!(
                "domain length must be positive, got {domain_length}"
            )));
        }
        if heights.len() < 2 {
            return Err(SurfaceError::InvalidParameter(
                "a gridded surface needs at least two samples".into(),
            ));
        }
        if heights.iter().any(|v| !v.is_finite()) {
            return Err(SurfaceError::InvalidParameter("heights must be finite".into()));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.domain_length / (self.heights.len() - 1) as f64
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// Grid abscissae, -L/2 ..= L/2.
    pub fn abscissae(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.heights.len())
            .map(|k| -self.domain_length / 2.0 + k as f64 * h)
            .collect()
    }

    fn locate(&self, x: f64) -> (usize, f64, f64) {
        let h = self.spacing();
        let t = ((x + self.domain_length / 2.0) / h).clamp(0.0, (self.heights.len() - 1) as f64);
        let i = (t.floor() as usize).min(self.heights.len() - 2);
        let b = t - i as f64;
        (i, 1.0 - b, b)
    }
}

impl Profile for GriddedSurface {
    fn height(&self, x: f64) -> f64 {
        let (i, a, b) = self.locate(x);
        let h = self.spacing();
        let (y0, y1) = (self.heights[i], self.heights[i + 1]);
        let (m0, m1) = (self.second_derivs[i], self.second_derivs[i + 1]);
        a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0
    }

    fn slope(&self, x: f64) -> f64 {
        let (i, a, b) = self.locate(x);
        let h = self.spacing();
        let (y0, y1) = (self.heights[i], self.heights[i + 1]);
        let (m0, m1) = (self.second_derivs[i], self.second_derivs[i + 1]);
        (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1
    }

    fn domain_length(&self) -> f64 {
        self.domain_length
    }
}
