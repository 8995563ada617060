//! 2D Helmholtz Green function, its normal derivative, and the derivatives of
//! both with respect to the height of the source point.
//!
//! Points are `[x, y]` in meters. The surface normal at the source point r'
//! is n̂ = (-s', 1) / √(1 + s'²), pointing from the lower into the upper
//! medium.

use num_complex::Complex64;

use crate::numerics::special::hankel1_pair_unchecked;
use crate::numerics::NumericsError;

#[inline]
fn separation(r: [f64; 2], rp: [f64; 2]) -> Result<(f64, f64, f64), NumericsError> {
    let dx = r[0] - rp[0];
    let dy = r[1] - rp[1];
    let dist = dx.hypot(dy);
    if !(dist > 0.0) {
        return Err(NumericsError::Domain(
            "Green function evaluated at coincident points".into(),
        ));
    }
    Ok((dx, dy, dist))
}

/// G(r, r') = (i/4) H₀⁽¹⁾(k |r - r'|).
pub fn green_g(r: [f64; 2], rp: [f64; 2], k: Complex64) -> Result<Complex64, NumericsError> {
    let (_, _, dist) = separation(r, rp)?;
    let (h0, _) = hankel1_pair_unchecked(k * dist);
    Ok(Complex64::i() * 0.25 * h0)
}

/// K(r, r') = n̂(r')·∇'G(r, r') for a source point with slope `slope`.
pub fn green_k(r: [f64; 2], rp: [f64; 2], slope: f64, k: Complex64) -> Result<Complex64, NumericsError> {
    let (dx, dy, dist) = separation(r, rp)?;
    let (_, h1) = hankel1_pair_unchecked(k * dist);
    Ok(k_from_parts(k, h1, dx, dy, dist, slope))
}

/// ∂G/∂y' at fixed x'.
pub fn green_g_dy(r: [f64; 2], rp: [f64; 2], k: Complex64) -> Result<Complex64, NumericsError> {
    let (_, dy, dist) = separation(r, rp)?;
    let (_, h1) = hankel1_pair_unchecked(k * dist);
    Ok(g_dy_from_parts(k, h1, dy, dist))
}

/// ∂K/∂y' at fixed x' and fixed slope.
pub fn green_k_dy(r: [f64; 2], rp: [f64; 2], slope: f64, k: Complex64) -> Result<Complex64, NumericsError> {
    let (dx, dy, dist) = separation(r, rp)?;
    let (h0, h1) = hankel1_pair_unchecked(k * dist);
    Ok(k_dy_from_parts(k, h0, h1, dx, dy, dist, slope))
}

/// All four kernel values at once, sharing one Hankel evaluation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KernelValues {
    pub g: Complex64,
    pub k: Complex64,
    pub g_dy: Complex64,
    pub k_dy: Complex64,
}

#[inline]
pub(crate) fn kernel_values(
    k: Complex64,
    dx: f64,
    dy: f64,
    dist: f64,
    slope: f64,
    h0: Complex64,
    h1: Complex64,
) -> KernelValues {
    KernelValues {
        g: Complex64::i() * 0.25 * h0,
        k: k_from_parts(k, h1, dx, dy, dist, slope),
        g_dy: g_dy_from_parts(k, h1, dy, dist),
        k_dy: k_dy_from_parts(k, h0, h1, dx, dy, dist, slope),
    }
}

#[inline]
pub(crate) fn k_from_parts(k: Complex64, h1: Complex64, dx: f64, dy: f64, dist: f64, slope: f64) -> Complex64 {
    let bracket = dy - slope * dx;
    let norm = (1.0 + slope * slope).sqrt();
    Complex64::i() * k * 0.25 * h1 * (bracket / (dist * norm))
}

#[inline]
pub(crate) fn g_dy_from_parts(k: Complex64, h1: Complex64, dy: f64, dist: f64) -> Complex64 {
    Complex64::i() * k * 0.25 * h1 * (dy / dist)
}

#[inline]
pub(crate) fn k_dy_from_parts(
    k: Complex64,
    h0: Complex64,
    h1: Complex64,
    dx: f64,
    dy: f64,
    dist: f64,
    slope: f64,
) -> Complex64 {
    // K = (ik/4N) H1(kR) B / R,  B = dy - s' dx,  ∂R/∂y' = -dy/R,  ∂B/∂y' = -1,
    // d/dR [H1(kR)/R] = (k H0(kR) - 2 H1(kR)/R) / R.
    let bracket = dy - slope * dx;
    let norm = (1.0 + slope * slope).sqrt();
    let radial = (k * h0 - h1 * (2.0 / dist)) / dist;
    let d_inner = -radial * (dy * bracket / dist) - h1 / dist;
    Complex64::i() * k * 0.25 * d_inner / norm
}
