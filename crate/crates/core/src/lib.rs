//! Reconstruction of a one-dimensional rough interface between two
//! penetrable media from multi-frequency scattered-field data.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: Hankel functions, dense complex LU/Cholesky, seeded RNG.
//! - [`surface`]: random and analytic profiles, the B-spline parameterization
//!   and the midpoint sampling the solver works on.
//! - [`forward`]: tapered plane-wave excitation, method-of-moments impedance
//!   matrix and scattered-field evaluation.
//! - [`inverse`]: Frechet matrix, Tikhonov-regularized Newton step and the
//!   frequency-marching driver.
//! - [`experiments`]: synthetic measurements, the error metric and canned
//!   scenarios.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod numerics;
pub mod surface;
pub mod forward;
pub mod inverse;
pub mod experiments;
pub mod cli;
