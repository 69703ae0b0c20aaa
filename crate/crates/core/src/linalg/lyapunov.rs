use super::{spectral_abscissa, LinalgError, Lu, Matrix, Result, SymMatrix};

/// Largest state dimension for the Kronecker-vectorized solve.
pub const MAX_LYAPUNOV_DIM: usize = 32;

/// Solves `a M + M aᵀ + q = 0` for stable `a`.
///
/// Vectorizes to `(I ⊗ a + a ⊗ I) vec(M) = -vec(q)` and solves with partial
/// pivoting plus iterative refinement. The residual bound
/// `‖aM + Maᵀ + q‖_max ≤ 1e-10 ‖q‖_max` is checked before returning.
pub fn solve_lyapunov(a: &Matrix, q: &SymMatrix) -> Result<SymMatrix> {
    let n = a.require_square()?;
    if q.dim() != n {
        return Err(LinalgError::Shape(format!(
            "drift is {n}x{n} but q is {0}x{0}",
            q.dim()
        )));
    }
    if n > MAX_LYAPUNOV_DIM {
        return Err(LinalgError::TooLarge {
            dim: n,
            max: MAX_LYAPUNOV_DIM,
        });
    }
    let abscissa = spectral_abscissa(a)?;
    if abscissa >= 0.0 {
        return Err(LinalgError::Unstable { abscissa });
    }
    let qs = q.matrix();
    let q_scale = qs.max_abs();
    if q_scale == 0.0 {
        return Ok(SymMatrix::new(Matrix::zeros(n, n))?);
    }

    // column-major vec: M_ij ↦ i + j n
    let idx = |i: usize, j: usize| i + j * n;
    let mut kron = Matrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let row = idx(i, j);
            for k in 0..n {
                kron[(row, idx(k, j))] += a[(i, k)];
                kron[(row, idx(i, k))] += a[(j, k)];
            }
        }
    }
    let lu = Lu::new(&kron)?;
    let rhs: Vec<f64> = (0..n * n).map(|r| -qs[(r % n, r / n)]).collect();
    let mut x = lu.solve(&rhs);
    for _ in 0..2 {
        let kx = kron.mul_vec(&x);
        let resid: Vec<f64> = rhs.iter().zip(&kx).map(|(r, k)| r - k).collect();
        let dx = lu.solve(&resid);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
    }
    let m = SymMatrix::symmetrized(&Matrix::from_fn(n, n, |i, j| x[idx(i, j)]));

    let residual = lyapunov_residual(a, &m, q);
    let tolerance = 1e-10 * q_scale;
    if residual > tolerance {
        return Err(LinalgError::Residual {
            residual,
            tolerance,
        });
    }
    Ok(m)
}

/// `‖a m + m aᵀ + q‖_max`.
pub fn lyapunov_residual(a: &Matrix, m: &SymMatrix, q: &SymMatrix) -> f64 {
    let am = a * m.matrix();
    let r = &(&am + &am.transpose()) + q.matrix();
    r.max_abs()
}
