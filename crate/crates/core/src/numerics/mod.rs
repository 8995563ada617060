//! Special functions, dense complex linear algebra and seeded random streams.

pub mod linalg;
pub mod rng;
pub mod special;

pub use linalg::{
    lu_solve, norm2, regularized_normal_solve, Cholesky, ComplexMatrix, ComplexVector, LuFactors,
};
pub use rng::{derive_seed, SeededRng};
pub use special::{hankel1, hankel1_pair, HankelOrder, EULER_GAMMA};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("matrix is singular to working precision (pivot {pivot})")]
    Singular { pivot: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite values in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
