//! Dense complex matrices and the solves built on them. Factorizations are
//! delegated to `faer`; this module adds the singularity checks and the
//! row-major storage the assembly code writes into.

use faer::linalg::solvers::{Llt, PartialPivLu, ShapeCore, Solve};
use faer::prelude::*;
use faer::Side;
use num_complex::Complex64;

use super::NumericsError;

pub type ComplexVector = Vec<Complex64>;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting NaN/Inf entries.
    pub fn from_row_major(
        rows: usize,
        cols: usize,
        data: Vec<Complex64>,
    ) -> Result<Self, NumericsError> {
        if data.len() != rows * cols {
            return Err(NumericsError::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if !all_finite(&data) {
            return Err(NumericsError::NonFinite("matrix entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [Complex64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.data)
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Result<ComplexVector, NumericsError> {
        if x.len() != self.cols {
            return Err(NumericsError::Dimension(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Cᴴ·x.
    pub fn adjoint_mul_vec(&self, x: &[Complex64]) -> Result<ComplexVector, NumericsError> {
        if x.len() != self.rows {
            return Err(NumericsError::Dimension(format!(
                "adjoint product needs {} entries, got {}",
                self.rows,
                x.len()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (r, xr) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * xr;
            }
        }
        Ok(out)
    }

    /// Cᴴ·C (Hermitian, cols × cols).
    pub fn gram(&self) -> ComplexMatrix {
        let n = self.cols;
        let mut g = ComplexMatrix::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ai = row[i].conj();
                let grow = g.row_mut(i);
                for (gij, aj) in grow.iter_mut().zip(row) {
                    *gij += ai * aj;
                }
            }
        }
        g
    }

    /// Column-major copy for the dense kernels.
    pub fn to_faer(&self) -> Mat<Complex64> {
        Mat::from_fn(self.rows, self.cols, |r, c| self[(r, c)])
    }

    pub fn from_faer(m: MatRef<'_, Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }

    /// self · other.
    pub fn mul_mat(&self, other: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
        if self.cols != other.rows {
            return Err(NumericsError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let product = self.to_faer() * other.to_faer();
        Ok(Self::from_faer(product.as_ref()))
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

fn all_finite(v: &[Complex64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// LU factors with partial pivoting, PA = LU.
#[derive(Debug)]
pub struct LuFactors {
    lu: PartialPivLu<Complex64>,
}

impl Clone for LuFactors {
    fn clone(&self) -> Self {
        Self { lu: self.lu.clone() }
    }
}

impl LuFactors {
    /// Factors `a` with partial pivoting. A pivot that is zero, or negligible
    /// relative to the largest entry of the matrix, is reported as singular.
    pub fn factor(a: &ComplexMatrix) -> Result<Self, NumericsError> {
        if !a.is_square() {
            return Err(NumericsError::Dimension(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows, a.cols
            )));
        }
        if !a.is_finite() {
            return Err(NumericsError::NonFinite("matrix entries"));
        }
        let n = a.rows;
        let scale = a.data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tiny = scale * f64::EPSILON * n.max(1) as f64;
        let lu = a.to_faer().partial_piv_lu();
        let u = lu.U();
        for k in 0..n {
            if !(u[(k, k)].norm() > tiny) {
                return Err(NumericsError::Singular { pivot: k });
            }
        }
        Ok(Self { lu })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<ComplexVector, NumericsError> {
        let n = self.dim();
        if b.len() != n {
            return Err(NumericsError::Dimension(format!(
                "right-hand side has {} entries, system has {n}",
                b.len()
            )));
        }
        let mut rhs = Mat::from_fn(n, 1, |i, _| b[i]);
        self.lu.solve_in_place(rhs.as_mut());
        let x: ComplexVector = (0..n).map(|i| rhs[(i, 0)]).collect();
        if !all_finite(&x) {
            return Err(NumericsError::NonFinite("LU solution"));
        }
        Ok(x)
    }
}

/// Solves A·x = b by LU with partial pivoting.
pub fn lu_solve(a: &ComplexMatrix, b: &[Complex64]) -> Result<ComplexVector, NumericsError> {
    if a.rows != b.len() {
        return Err(NumericsError::Dimension(format!(
            "matrix has {} rows, right-hand side has {} entries",
            a.rows,
            b.len()
        )));
    }
    LuFactors::factor(a)?.solve(b)
}

/// Cholesky factor of a Hermitian positive definite matrix, A = L Lᴴ.
#[derive(Debug)]
pub struct Cholesky {
    llt: Llt<Complex64>,
}

impl Cholesky {
    pub fn factor(a: &ComplexMatrix) -> Result<Self, NumericsError> {
        if !a.is_square() {
            return Err(NumericsError::Dimension(format!(
                "Cholesky needs a square matrix, got {}x{}",
                a.rows, a.cols
            )));
        }
        if !a.is_finite() {
            return Err(NumericsError::NonFinite("matrix entries"));
        }
        let n = a.rows;
        let scale = (0..n).map(|i| a[(i, i)].re.abs()).fold(0.0, f64::max);
        let llt = a
            .to_faer()
            .llt(Side::Lower)
            .map_err(|_| NumericsError::Singular { pivot: 0 })?;
        // faer accepts any positive pivot; reject numerically rank-deficient input
        let l = llt.L();
        for j in 0..n {
            if !(l[(j, j)].re * l[(j, j)].re > scale * f64::EPSILON * n as f64) {
                return Err(NumericsError::Singular { pivot: j });
            }
        }
        Ok(Self { llt })
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<ComplexVector, NumericsError> {
        let n = self.llt.nrows();
        if b.len() != n {
            return Err(NumericsError::Dimension(format!(
                "right-hand side has {} entries, system has {n}",
                b.len()
            )));
        }
        let mut rhs = Mat::from_fn(n, 1, |i, _| b[i]);
        self.llt.solve_in_place(rhs.as_mut());
        Ok((0..n).map(|i| rhs[(i, 0)]).collect())
    }
}

/// Solves (Cᴴ C + τ I) d = Cᴴ rhs.
pub fn regularized_normal_solve(
    c: &ComplexMatrix,
    rhs: &[Complex64],
    tau: f64,
) -> Result<ComplexVector, NumericsError> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(NumericsError::InvalidParameter(format!(
            "regularization parameter must be positive, got {tau}"
        )));
    }
    let mut system = c.gram();
    for i in 0..system.rows {
        system[(i, i)] += tau;
    }
    let projected = c.adjoint_mul_vec(rhs)?;
    Cholesky::factor(&system)?.solve(&projected)
}
