//! Centered cardinal B-splines and the spline expansion of a surface profile.

use serde::{Deserialize, Serialize};

use super::{Profile, SurfaceError};
use crate::numerics::{Cholesky, ComplexMatrix};
use num_complex::Complex64;

/// Centered cardinal B-spline of order `p`, written as the alternating sum
/// of truncated powers. Support is |t| < (p + 1) / 2.
pub fn cardinal_bspline(order: u32, t: f64) -> f64 {
    let half = (order + 1) as f64 / 2.0;
    if t.abs() >= half {
        return 0.0;
    }
    truncated_power_sum(order, order, t + half)
}

/// First derivative of [`cardinal_bspline`] with respect to its argument.
pub fn cardinal_bspline_derivative(order: u32, t: f64) -> f64 {
    let half = (order + 1) as f64 / 2.0;
    if t.abs() >= half {
        return 0.0;
    }
    truncated_power_sum(order, order - 1, t + half)
}

/// Σ_q (-1)^q C(p+1, q) (s - q)_+^e / e!   with e = power.
fn truncated_power_sum(order: u32, power: u32, shifted: f64) -> f64 {
    let factorial: f64 = (1..=power).map(f64::from).product();
    let mut binom = 1.0;
    let mut sum = 0.0;
    for q in 0..=order + 1 {
        let base = shifted - q as f64;
        if base <= 0.0 {
            break;
        }
        let term = binom * base.powi(power as i32);
        sum += if q % 2 == 0 { term } else { -term };
        binom = binom * (order + 1 - q) as f64 / (q + 1) as f64;
    }
    sum / factorial
}

/// N^p shifted B-splines of order p spread uniformly over [-L/2, L/2].
///
/// Scale g = L / (N^p + 5) and centers x_i = (i + 2) g - L/2 (1-based i),
/// leaving a margin of at least (5 - p) g / 2 between each support and the
/// domain ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineBasis {
    count: usize,
    order: u32,
    domain_length: f64,
    scale: f64,
    centers: Vec<f64>,
}

impl SplineBasis {
    pub fn new(count: usize, order: u32, domain_length: f64) -> Result<Self, SurfaceError> {
        if count == 0 {
            return Err(SurfaceError::InvalidParameter(
                "spline basis needs at least one function".into(),
            ));
        }
        if order == 0 || order > 5 {
            return Err(SurfaceError::InvalidParameter(format!(
                "spline order must lie in 1..=5 to keep supports inside the domain, got {order}"
            )));
        }
        if !(domain_length > 0.0 && domain_length.is_finite()) {
            return Err(SurfaceError::InvalidParameter(format!(
                "domain length must be positive, got {domain_length}"
            )));
        }
        let scale = domain_length / (count as f64 + 5.0);
        let centers = (1..=count)
            .map(|i| (i as f64 + 2.0) * scale - domain_length / 2.0)
            .collect();
        Ok(Self {
            count,
            order,
            domain_length,
            scale,
            centers,
        })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Half-width of each basis function's support, in meters.
    pub fn support_radius(&self) -> f64 {
        self.scale * (self.order + 1) as f64 / 2.0
    }

    /// φ_i(x) for a 0-based index.
    pub fn eval(&self, index: usize, x: f64) -> f64 {
        cardinal_bspline(self.order, (x - self.centers[index]) / self.scale)
    }

    /// dφ_i/dx for a 0-based index.
    pub fn eval_derivative(&self, index: usize, x: f64) -> f64 {
        cardinal_bspline_derivative(self.order, (x - self.centers[index]) / self.scale) / self.scale
    }

    /// 0-based indices of the basis functions that can be nonzero at `x`.
    pub fn active(&self, x: f64) -> std::ops::Range<usize> {
        let t = (x - self.centers[0]) / self.scale;
        let half = (self.order + 1) as f64 / 2.0;
        let lo = (t - half).floor().max(0.0) as usize;
        let hi = ((t + half).ceil() + 1.0).clamp(0.0, self.count as f64) as usize;
        lo.min(self.count)..hi
    }

    /// Interval on which Σ_i φ_i(x) = 1 holds exactly.
    pub fn covered_interval(&self) -> (f64, f64) {
        let inset = (self.order as f64 - 1.0) / 2.0 * self.scale;
        (
            self.centers[0] + inset,
            self.centers[self.count - 1] - inset,
        )
    }
}

/// Surface profile s(x) = Σ s̄_i φ_i(x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceModel {
    basis: SplineBasis,
    coeffs: Vec<f64>,
}

impl SurfaceModel {
    pub fn new(basis: SplineBasis, coeffs: Vec<f64>) -> Result<Self, SurfaceError> {
        if coeffs.len() != basis.len() {
            return Err(SurfaceError::InvalidParameter(format!(
                "{} coefficients for a basis of {} functions",
                coeffs.len(),
                basis.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(SurfaceError::InvalidParameter(
                "spline coefficients must be finite".into(),
            ));
        }
        Ok(Self { basis, coeffs })
    }

    /// The flat surface y = 0.
    pub fn flat(basis: SplineBasis) -> Self {
        let coeffs = vec![0.0; basis.len()];
        Self { basis, coeffs }
    }

    pub fn basis(&self) -> &SplineBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.basis
            .active(x)
            .map(|i| self.coeffs[i] * self.basis.eval(i, x))
            .sum()
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.basis
            .active(x)
            .map(|i| self.coeffs[i] * self.basis.eval_derivative(i, x))
            .sum()
    }
}

impl Profile for SurfaceModel {
    fn height(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn slope(&self, x: f64) -> f64 {
        SurfaceModel::slope(self, x)
    }

    fn domain_length(&self) -> f64 {
        self.basis.domain_length
    }
}

/// Least-squares spline coefficients for samples (x_k, y_k).
pub fn fit_spline(xs: &[f64], samples: &[f64], basis: &SplineBasis) -> Result<SurfaceModel, SurfaceError> {
    if xs.len() != samples.len() {
        return Err(SurfaceError::InvalidParameter(format!(
            "{} abscissae but {} samples",
            xs.len(),
            samples.len()
        )));
    }
    let n = basis.len();
    if xs.len() < n {
        return Err(SurfaceError::InvalidParameter(format!(
            "{} samples cannot determine {n} coefficients",
            xs.len()
        )));
    }
    let mut gram = ComplexMatrix::zeros(n, n);
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for (&x, &y) in xs.iter().zip(samples) {
        let active = basis.active(x);
        for i in active.clone() {
            let phi_i = basis.eval(i, x);
            if phi_i == 0.0 {
                continue;
            }
            rhs[i] += phi_i * y;
            for j in active.clone() {
                gram[(i, j)] += phi_i * basis.eval(j, x);
            }
        }
    }
    let chol = Cholesky::factor(&gram).map_err(|_| SurfaceError::RankDeficient)?;
    let solution = chol.solve(&rhs)?;
    SurfaceModel::new(basis.clone(), solution.iter().map(|c| c.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_center_value() {
        assert!((cardinal_bspline(3, 0.0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((cardinal_bspline(3, 1.0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((cardinal_bspline(1, 0.0) - 1.0).abs() < 1e-15);
        assert!((cardinal_bspline(2, 0.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn compact_support() {
        for p in 1..=5 {
            let half = (p + 1) as f64 / 2.0;
            for t in [half, half + 0.3, -half, -half - 2.0, 40.0] {
                assert_eq!(cardinal_bspline(p, t), 0.0);
                assert_eq!(cardinal_bspline_derivative(p, t), 0.0);
            }
        }
    }

    #[test]
    fn basis_geometry() {
        let basis = SplineBasis::new(25, 3, 16.0).unwrap();
        assert!((basis.scale() - 0.5333333333333333).abs() < 1e-15);
        let r = basis.support_radius();
        for &c in basis.centers() {
            assert!(c - r >= -8.0 - 1e-12 && c + r <= 8.0 + 1e-12);
        }
        assert!(SplineBasis::new(0, 3, 16.0).is_err());
        assert!(SplineBasis::new(5, 0, 16.0).is_err());
        assert!(SplineBasis::new(5, 6, 16.0).is_err());
        assert!(SplineBasis::new(5, 3, -1.0).is_err());
    }

    #[test]
    fn basis_at_its_center() {
        let basis = SplineBasis::new(10, 3, 16.0).unwrap();
        for i in 0..10 {
            assert!((basis.eval(i, basis.centers()[i]) - 2.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn active_range_covers_support() {
        let basis = SplineBasis::new(12, 3, 16.0).unwrap();
        for k in 0..=400 {
            let x = -8.0 + 16.0 * k as f64 / 400.0;
            let active = basis.active(x);
            for i in 0..12 {
                if !active.contains(&i) {
                    assert_eq!(basis.eval(i, x), 0.0, "i={i} x={x}");
                }
            }
        }
    }

    #[test]
    fn zero_coefficients_give_flat_surface() {
        let model = SurfaceModel::flat(SplineBasis::new(8, 3, 16.0).unwrap());
        for x in [-8.0, -1.0, 0.0, 3.3, 8.0] {
            assert_eq!(model.eval(x), 0.0);
            assert_eq!(model.slope(x), 0.0);
        }
    }

    #[test]
    fn coefficient_count_checked() {
        let basis = SplineBasis::new(4, 3, 16.0).unwrap();
        assert!(SurfaceModel::new(basis.clone(), vec![0.0; 3]).is_err());
        assert!(SurfaceModel::new(basis, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn zero_samples_fit_to_zero() {
        let basis = SplineBasis::new(6, 3, 16.0).unwrap();
        let xs: Vec<f64> = (0..200).map(|k| -8.0 + 16.0 * (k as f64 + 0.5) / 200.0).collect();
        let model = fit_spline(&xs, &vec![0.0; 200], &basis).unwrap();
        assert!(model.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn rank_deficient_fit() {
        let basis = SplineBasis::new(6, 3, 16.0).unwrap();
        // all samples inside the support of the first function only
        let xs = vec![-6.0; 10];
        assert!(matches!(
            fit_spline(&xs, &[1.0; 10], &basis),
            Err(SurfaceError::RankDeficient)
        ));
        assert!(fit_spline(&[0.0, 1.0], &[0.0, 0.0], &basis).is_err());
    }
}
