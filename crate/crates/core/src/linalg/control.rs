use serde::Serialize;

use super::{LinalgError, Matrix, Result};

const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControllabilityCertificate {
    pub controllable: bool,
    /// Numerical rank of the Krylov matrix `[B, AB, …, A^{n-1}B]`.
    pub rank: usize,
    pub dim: usize,
    /// Smallest residual norm among the accepted Krylov directions
    /// (the rank margin, on the unit scale of the normalized problem).
    pub margin: f64,
}

/// Kalman rank test for the pair `(a, b)`.
///
/// The Krylov space is built block by block with re-orthogonalized
/// Gram–Schmidt on `a / ‖a‖_max` and column-normalized `b`, so powers of `a`
/// never appear explicitly. A new direction counts when its residual after
/// projection exceeds `1e-10`.
pub fn is_controllable(a: &Matrix, b: &Matrix) -> Result<ControllabilityCertificate> {
    let n = a.require_square()?;
    if b.rows() != n {
        return Err(LinalgError::Shape(format!(
            "a is {n}x{n} but b has {} rows",
            b.rows()
        )));
    }
    let a_scale = a.max_abs();
    let a_unit = if a_scale > 0.0 {
        a.scale(1.0 / a_scale)
    } else {
        a.clone()
    };
    let b_scale = (0..b.cols())
        .map(|j| (0..n).map(|i| b[(i, j)].powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut margin = f64::INFINITY;
    let mut frontier: Vec<Vec<f64>> = if b_scale > 0.0 {
        (0..b.cols())
            .map(|j| (0..n).map(|i| b[(i, j)] / b_scale).collect())
            .collect()
    } else {
        Vec::new()
    };

    for _ in 0..n {
        let mut accepted = Vec::new();
        for mut v in frontier {
            for _pass in 0..2 {
                for q in &basis {
                    let dot: f64 = q.iter().zip(&v).map(|(x, y)| x * y).sum();
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= dot * qi;
                    }
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > RANK_TOL && basis.len() < n {
                margin = margin.min(norm);
                let unit: Vec<f64> = v.iter().map(|x| x / norm).collect();
                basis.push(unit.clone());
                accepted.push(unit);
            }
        }
        if accepted.is_empty() || basis.len() == n {
            break;
        }
        frontier = accepted.iter().map(|v| a_unit.mul_vec(v)).collect();
    }

    let rank = basis.len();
    Ok(ControllabilityCertificate {
        controllable: rank == n,
        rank,
        dim: n,
        margin: if rank == 0 { 0.0 } else { margin },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_pair() {
        let c = is_controllable(&Matrix::zeros(1, 1), &Matrix::identity(1)).unwrap();
        assert!(c.controllable);
        assert_eq!(c.rank, 1);
    }

    #[test]
    fn unreachable_mode() {
        let a = Matrix::from_diag(&[-1.0, -2.0]);
        let b = Matrix::from_row_slice(2, 1, &[1.0, 0.0]).unwrap();
        let c = is_controllable(&a, &b).unwrap();
        assert!(!c.controllable);
        assert_eq!(c.rank, 1);
    }

    #[test]
    fn damped_oscillator_is_controllable() {
        // K = [b, Ab] with b = (β, 0), Ab = (−γβ, β/m): full rank
        let (gamma, k, mass, beta) = (0.7, 2.0, 1.5, 0.3);
        let a = Matrix::from_rows(&[vec![-gamma, -k], vec![1.0 / mass, 0.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![beta, 0.0], vec![0.0, 0.0]]).unwrap();
        let c = is_controllable(&a, &b).unwrap();
        assert!(c.controllable);
        assert_eq!(c.rank, 2);
    }

    #[test]
    fn zero_noise_has_rank_zero() {
        let c = is_controllable(&Matrix::identity(3), &Matrix::zeros(3, 2)).unwrap();
        assert_eq!(c.rank, 0);
        assert!(!c.controllable);
    }
}
