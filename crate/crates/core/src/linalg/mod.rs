//! Dense real linear algebra for the small systems that show up in this crate.
//!
//! Everything here is sized for desk-scale problems (state dimension up to a few
//! dozen). Matrices are stored row-major in a flat `Vec<f64>`.

mod control;
mod eigen;
mod expm;
mod lu;
mod lyapunov;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use control::{is_controllable, ControllabilityCertificate};
pub use eigen::{general_eigenvalues, spectral_abscissa, sym_eigen, SymEigen};
pub use expm::expm;
pub use lu::Lu;
pub use lyapunov::solve_lyapunov;

/// Relative asymmetry accepted by [`SymMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not symmetric: max |m_ij - m_ji| = {asymmetry:e} exceeds {tolerance:e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },
    #[error("matrix is not positive definite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("matrix is not positive semidefinite: eigenvalue {min_eigenvalue:e} below tolerance")]
    NotSemidefinite { min_eigenvalue: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("drift matrix is not stable: spectral abscissa {abscissa:e} >= 0")]
    Unstable { abscissa: f64 },
    #[error("Lyapunov residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("dimension {dim} exceeds the supported maximum {max}")]
    TooLarge { dim: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense real matrix (row-major). Used for drift, noise and propagator matrices.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from a row-major slice.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self {
            rows,
            cols,
            data: data.to_vec(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Shape("ragged rows".into()));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(r, c, &data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.cols.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Induced 1-norm (max column sum).
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "matrix-vector shape mismatch");
        self.data
            .chunks(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Principal-style submatrix picking the given rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Assembles a 2x2 block matrix `[[a, b], [c, d]]`.
    pub fn block2(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Result<Self> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(LinalgError::Shape("incompatible blocks".into()));
        }
        let (r0, c0) = (a.rows, a.cols);
        Ok(Self::from_fn(r0 + c.rows, c0 + b.cols, |i, j| {
            match (i < r0, j < c0) {
                (true, true) => a[(i, j)],
                (true, false) => b[(i, j - c0)],
                (false, true) => c[(i - r0, j)],
                (false, false) => d[(i - r0, j - c0)],
            }
        }))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest |m_ij - m_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "matrix sum shape mismatch"
        );
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "matrix difference shape mismatch"
        );
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Symmetric square matrix. Construction checks symmetry to
/// [`SYMMETRY_TOL`] relative to the largest entry and then symmetrizes exactly.
#[derive(Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        m.require_square()?;
        if !m.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let tolerance = SYMMETRY_TOL * m.max_abs();
        let asymmetry = m.asymmetry();
        if asymmetry > tolerance {
            return Err(LinalgError::NotSymmetric {
                asymmetry,
                tolerance,
            });
        }
        Ok(Self::symmetrized(&m))
    }

    /// Symmetric and strictly positive definite.
    pub fn positive_definite(m: Matrix) -> Result<Self> {
        let s = Self::new(m)?;
        s.require_positive()?;
        Ok(s)
    }

    /// `(m + mᵀ)/2` without any check; for results that are symmetric up to rounding.
    pub fn symmetrized(m: &Matrix) -> Self {
        let n = m.rows();
        Self(Matrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)])))
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        Self(Matrix::from_diag(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn eigen(&self) -> SymEigen {
        sym_eigen(self)
    }

    pub fn require_positive(&self) -> Result<()> {
        let min = self.eigen().values.first().copied().unwrap_or(0.0);
        if min > 0.0 {
            Ok(())
        } else {
            Err(LinalgError::NotPositive {
                min_eigenvalue: min,
            })
        }
    }

    /// `self[rows, rows]`.
    pub fn principal(&self, idx: &[usize]) -> SymMatrix {
        SymMatrix(self.0.select(idx, idx))
    }

    /// `f(self)` through the spectral decomposition.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let SymEigen { values, vectors } = self.eigen();
        let n = self.dim();
        let mut out = Matrix::zeros(n, n);
        for (k, &lam) in values.iter().enumerate() {
            let fl = f(lam);
            if fl == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = vectors[(i, k)] * fl;
                for j in 0..n {
                    out[(i, j)] += vik * vectors[(j, k)];
                }
            }
        }
        SymMatrix::symmetrized(&out)
    }

    /// `qᵀ · self · q` for a general `q`.
    pub fn congruence(&self, q: &Matrix) -> SymMatrix {
        SymMatrix::symmetrized(&(&(&q.transpose() * &self.0) * q))
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sym{:?}", self.0)
    }
}

/// Symmetric PSD square root. Eigenvalues down to `-1e-10 * max|λ|` are
/// clamped to zero; anything more negative is rejected.
pub fn sym_sqrt(m: &SymMatrix) -> Result<SymMatrix> {
    let eig = m.eigen();
    let scale = eig.values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if let Some(&min) = eig.values.first() {
        if min < -1e-10 * scale {
            return Err(LinalgError::NotSemidefinite {
                min_eigenvalue: min,
            });
        }
    }
    Ok(m.map_spectrum(|x| x.max(0.0).sqrt()))
}

/// Inverse square root of a positive definite matrix.
pub fn sym_inv_sqrt(m: &SymMatrix) -> Result<SymMatrix> {
    m.require_positive()?;
    Ok(m.map_spectrum(|x| 1.0 / x.sqrt()))
}

/// Inverse of a positive definite matrix.
pub fn sym_inverse(m: &SymMatrix) -> Result<SymMatrix> {
    m.require_positive()?;
    Ok(m.map_spectrum(|x| 1.0 / x))
}

/// Lower-triangular-like factor `f` with `f fᵀ = m`, by diagonally pivoted
/// Cholesky. Pivots down to `-clamp * max diag` are treated as zero, which
/// lets conditional covariances that are PSD up to rounding through.
pub fn psd_factor(m: &SymMatrix, clamp: f64) -> Result<Matrix> {
    let n = m.dim();
    let mut a = m.matrix().clone();
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut f = Matrix::zeros(n, n);
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&x, &y| a[(perm[x], perm[x])].total_cmp(&a[(perm[y], perm[y])]))
            .expect("non-empty pivot range");
        perm.swap(k, piv);
        let best = perm[k];
        let d = a[(best, best)];
        if d < -clamp * scale {
            return Err(LinalgError::NotSemidefinite { min_eigenvalue: d });
        }
        if d <= clamp * scale || d <= 0.0 {
            break;
        }
        let root = d.sqrt();
        f[(best, k)] = root;
        for &i in &perm[k + 1..] {
            f[(i, k)] = a[(i, best)] / root;
        }
        for &i in &perm[k + 1..] {
            for &j in &perm[k + 1..] {
                a[(i, j)] -= f[(i, k)] * f[(j, k)];
            }
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn rejects_asymmetric() {
        let err = SymMatrix::new(m(&[&[1.0, 2.0], &[2.1, 1.0]])).unwrap_err();
        assert!(matches!(err, LinalgError::NotSymmetric { .. }));
    }

    #[test]
    fn sqrt_examples() {
        let r = sym_sqrt(&SymMatrix::from_diag(&[4.0, 9.0])).unwrap();
        assert!((r[(0, 0)] - 2.0).abs() < 1e-14 && (r[(1, 1)] - 3.0).abs() < 1e-14);
        assert!(r[(0, 1)].abs() < 1e-14);

        let r = sym_sqrt(&SymMatrix::new(m(&[&[5.0, 4.0], &[4.0, 5.0]])).unwrap()).unwrap();
        let expected = m(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert!((r.matrix() - &expected).max_abs() < 1e-13);

        let id = sym_sqrt(&SymMatrix::identity(4)).unwrap();
        assert!((id.matrix() - &Matrix::identity(4)).max_abs() < 1e-15);
    }

    #[test]
    fn sqrt_rejects_negative_but_clamps_rounding() {
        let neg = SymMatrix::from_diag(&[1.0, -1e-3]);
        assert!(matches!(
            sym_sqrt(&neg),
            Err(LinalgError::NotSemidefinite { .. })
        ));
        let tiny = SymMatrix::from_diag(&[1.0, -1e-14]);
        let r = sym_sqrt(&tiny).unwrap();
        assert_eq!(r[(1, 1)], 0.0);
    }

    #[test]
    fn psd_factor_reconstructs_singular_input() {
        // rank one: v vᵀ
        let v = [1.0, -2.0, 0.5];
        let mm = SymMatrix::new(Matrix::from_fn(3, 3, |i, j| v[i] * v[j])).unwrap();
        let f = psd_factor(&mm, 1e-12).unwrap();
        let back = &f * &f.transpose();
        assert!((&back - mm.matrix()).max_abs() < 1e-14);
    }

    #[test]
    fn block_assembly() {
        let a = Matrix::identity(1);
        let b = Matrix::from_row_slice(1, 2, &[2.0, 3.0]).unwrap();
        let c = Matrix::from_row_slice(2, 1, &[4.0, 5.0]).unwrap();
        let d = Matrix::identity(2).scale(7.0);
        let blk = Matrix::block2(&a, &b, &c, &d).unwrap();
        assert_eq!(blk.row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(blk.row(2), &[5.0, 0.0, 7.0]);
    }
}
