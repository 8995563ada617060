//! Hankel functions of the first kind, orders 0 and 1, for complex arguments
//! in the closed upper half plane.
//!
//! Small arguments use the ascending series for J_n and Y_n; large arguments
//! use the Hankel asymptotic expansion. The crossover at |z| = 12 keeps both
//! branches above ten significant digits: the series loses roughly
//! e^|z| / |z| to cancellation, and the smallest asymptotic term is about
//! e^(-2|z|).

use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, PI};

use num_complex::Complex64;

use super::NumericsError;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Series/asymptotic crossover radius.
const CROSSOVER: f64 = 12.0;

const MAX_SERIES_TERMS: usize = 120;
const MAX_ASYMPTOTIC_TERMS: usize = 60;

/// Bessel order supported by [`hankel1`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HankelOrder {
    Zero,
    One,
}

impl TryFrom<u32> for HankelOrder {
    type Error = NumericsError;

    fn try_from(n: u32) -> Result<Self, Self::Error> {
        match n {
            0 => Ok(Self::Zero),
            1 => Ok(Self::One),
            _ => Err(NumericsError::Domain(format!(
                "Hankel order {n} is not supported (only 0 and 1)"
            ))),
        }
    }
}

fn check_argument(z: Complex64) -> Result<(), NumericsError> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(NumericsError::NonFinite("Hankel argument"));
    }
    if z.re == 0.0 && z.im == 0.0 {
        return Err(NumericsError::Domain(
            "Hankel function has a logarithmic singularity at z = 0".into(),
        ));
    }
    if z.im < 0.0 {
        return Err(NumericsError::Domain(format!(
            "Hankel argument {z} lies below the real axis (outgoing branch needs Im z >= 0)"
        )));
    }
    Ok(())
}

/// H_n^(1)(z) = J_n(z) + i Y_n(z) for n in {0, 1}.
pub fn hankel1(order: HankelOrder, z: Complex64) -> Result<Complex64, NumericsError> {
    let (h0, h1) = hankel1_pair(z)?;
    Ok(match order {
        HankelOrder::Zero => h0,
        HankelOrder::One => h1,
    })
}

/// Both H_0^(1)(z) and H_1^(1)(z); cheaper than two separate calls.
pub fn hankel1_pair(z: Complex64) -> Result<(Complex64, Complex64), NumericsError> {
    check_argument(z)?;
    Ok(hankel1_pair_unchecked(z))
}

/// Same as [`hankel1_pair`] without argument validation. Callers guarantee
/// `z != 0` and `Im z >= 0`.
#[inline]
pub(crate) fn hankel1_pair_unchecked(z: Complex64) -> (Complex64, Complex64) {
    if z.norm_sqr() < CROSSOVER * CROSSOVER {
        let (j0, j1, y0, y1) = ascending_series(z);
        let i = Complex64::i();
        (j0 + i * y0, j1 + i * y1)
    } else {
        asymptotic_pair(z)
    }
}

/// J_0, J_1, Y_0, Y_1 from their ascending series.
pub fn bessel_series(z: Complex64) -> Result<[Complex64; 4], NumericsError> {
    check_argument(z)?;
    let (j0, j1, y0, y1) = ascending_series(z);
    Ok([j0, j1, y0, y1])
}

fn ascending_series(z: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
    let t = z * 0.5;
    let neg_t2 = -(t * t);

    // a_k = (-t^2)^k / (k!)^2, b_k = a_k / (k + 1)
    let mut a = Complex64::new(1.0, 0.0);
    let mut harmonic = 0.0; // H_k
    let mut sum_j0 = a;
    let mut sum_j1 = a;
    let mut sum_y0 = Complex64::new(0.0, 0.0);
    // (psi(k+1) + psi(k+2)) b_k, with psi(k+1) = -gamma + H_k
    let mut sum_y1 = a * (1.0 - 2.0 * EULER_GAMMA);

    for k in 1..MAX_SERIES_TERMS {
        let kf = k as f64;
        a *= neg_t2 / (kf * kf);
        harmonic += 1.0 / kf;
        let b = a / (kf + 1.0);
        let next_harmonic = harmonic + 1.0 / (kf + 1.0);

        sum_j0 += a;
        sum_j1 += b;
        sum_y0 -= a * harmonic;
        sum_y1 += b * (harmonic + next_harmonic - 2.0 * EULER_GAMMA);

        if kf > t.norm() && a.norm() * (1.0 + next_harmonic) < 1e-17 {
            break;
        }
    }

    let log_t = t.ln();
    let j0 = sum_j0;
    let j1 = t * sum_j1;
    let y0 = FRAC_2_PI * ((log_t + EULER_GAMMA) * j0 + sum_y0);
    let y1 = -1.0 / (PI * t) + FRAC_2_PI * log_t * j1 - t * sum_y1 / PI;
    (j0, j1, y0, y1)
}

fn asymptotic_pair(z: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let prefactor = (2.0 / (PI * z)).sqrt();
    let inv_z = 1.0 / z;

    let series = |nu_sq4: f64| -> Complex64 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        let mut last = f64::INFINITY;
        for k in 1..MAX_ASYMPTOTIC_TERMS {
            let odd = (2 * k - 1) as f64;
            let next = term * i * inv_z * ((nu_sq4 - odd * odd) / (8.0 * k as f64));
            let size = next.norm();
            // divergent tail: stop at the smallest term
            if size >= last {
                break;
            }
            sum += next;
            term = next;
            last = size;
            if size < 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    };

    let phase0 = (i * (z - FRAC_PI_4)).exp();
    // e^{i(z - pi/2 - pi/4)} = -i e^{i(z - pi/4)}
    let phase1 = -i * phase0;
    (
        prefactor * phase0 * series(0.0),
        prefactor * phase1 * series(4.0),
    )
}
