use num_complex::Complex64;

use super::{LinalgError, Matrix, Result, SymMatrix};

/// Largest dimension accepted by the general eigenvalue routine.
pub const MAX_GENERAL_DIM: usize = 32;

/// Spectral decomposition `m = V diag(values) Vᵀ` with ascending values.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Orthogonal matrix whose columns are the eigenvectors.
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
pub fn sym_eigen(m: &SymMatrix) -> SymEigen {
    let n = m.dim();
    let mut a = m.matrix().clone();
    let mut v = Matrix::identity(n);
    let norm: f64 = a.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= 1e-16 * norm || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    SymEigen { values, vectors }
}

/// Eigenvalues of a general real matrix.
///
/// Characteristic polynomial by Faddeev–LeVerrier on the max-norm scaled
/// matrix, roots by Durand–Kerner, then each root is refined by shifted
/// inverse iteration against the matrix itself.
pub fn general_eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    let n = a.require_square()?;
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    if n > MAX_GENERAL_DIM {
        return Err(LinalgError::TooLarge {
            dim: n,
            max: MAX_GENERAL_DIM,
        });
    }
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![Complex64::new(a[(0, 0)], 0.0)]),
        2 => {
            let half_tr = 0.5 * (a[(0, 0)] + a[(1, 1)]);
            let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
            let half_diff = 0.5 * (a[(0, 0)] - a[(1, 1)]);
            let disc = half_diff * half_diff + a[(0, 1)] * a[(1, 0)];
            if disc >= 0.0 {
                let r = disc.sqrt();
                let big = if half_tr >= 0.0 {
                    half_tr + r
                } else {
                    half_tr - r
                };
                let small = if big != 0.0 { det / big } else { half_tr - r };
                return Ok(vec![Complex64::new(small, 0.0), Complex64::new(big, 0.0)]);
            }
            let im = (-disc).sqrt();
            return Ok(vec![
                Complex64::new(half_tr, -im),
                Complex64::new(half_tr, im),
            ]);
        }
        _ => {}
    }

    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let b = a.scale(1.0 / scale);
    let coeffs = faddeev_leverrier(&b);
    let roots = durand_kerner(&coeffs)?;
    Ok(roots.into_iter().map(|z| polish(&b, z) * scale).collect())
}

/// Maximum real part over the spectrum.
pub fn spectral_abscissa(a: &Matrix) -> Result<f64> {
    let eig = general_eigenvalues(a)?;
    Ok(eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Coefficients `c[0..=n]` (ascending powers, `c[n] = 1`) of `det(zI - b)`.
fn faddeev_leverrier(b: &Matrix) -> Vec<f64> {
    let n = b.rows();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut mk = Matrix::zeros(n, n);
    for k in 1..=n {
        let mut next = b * &mk;
        for i in 0..n {
            next[(i, i)] += c[n + 1 - k];
        }
        mk = next;
        c[n - k] = -(b * &mk).trace() / k as f64;
    }
    c
}

fn horner(c: &[f64], z: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck)
}

fn durand_kerner(c: &[f64]) -> Result<Vec<Complex64>> {
    const MAX_ITER: usize = 5000;
    let n = c.len() - 1;
    let radius = 1.0 + c[..n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(0.5 * radius, ang)
        })
        .collect();
    let backward_ok = |z: &[Complex64], tol: f64| {
        z.iter().all(|&zi| {
            let scale: f64 = c
                .iter()
                .rev()
                .fold(0.0, |acc, ck| acc * zi.norm() + ck.abs());
            horner(c, zi).norm() <= tol * scale
        })
    };
    for _ in 0..MAX_ITER {
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            if den.norm() == 0.0 {
                z[i] += Complex64::new(1e-8, 1e-8);
                worst = f64::INFINITY;
                continue;
            }
            let step = horner(c, z[i]) / den;
            z[i] -= step;
            worst = worst.max(step.norm() / z[i].norm().max(1.0));
        }
        if worst < 1e-15 || backward_ok(&z, 4.0 * f64::EPSILON) {
            return Ok(z);
        }
    }
    // Clustered roots converge only linearly; inverse iteration sharpens them.
    if backward_ok(&z, 1e-10) {
        Ok(z)
    } else {
        Err(LinalgError::NoConvergence {
            iterations: MAX_ITER,
        })
    }
}

/// Shifted inverse iteration started at an approximate eigenvalue.
fn polish(b: &Matrix, z0: Complex64) -> Complex64 {
    let n = b.rows();
    let mut z = z0;
    let mut x = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    for _ in 0..8 {
        let Some(y) = complex_solve_shifted(b, z, &x) else {
            break;
        };
        let xy: Complex64 = x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        if xy.norm() == 0.0 {
            break;
        }
        let dz = Complex64::new(1.0, 0.0) / xy;
        z += dz;
        let ny = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        x = y.into_iter().map(|v| v / ny).collect();
        if dz.norm() < 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    let residual: f64 = (0..n)
        .map(|i| {
            let bx: Complex64 = (0..n).map(|j| x[j] * b[(i, j)]).sum();
            (bx - x[i] * z).norm_sqr()
        })
        .sum::<f64>()
        .sqrt();
    if (z - z0).norm() < 1e-4 && residual < 1e-10 {
        z
    } else {
        z0
    }
}

fn complex_solve_shifted(b: &Matrix, z: Complex64, rhs: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = b.rows();
    let mut m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    Complex64::new(b[(i, j)], 0.0)
                        - if i == j { z } else { Complex64::new(0.0, 0.0) }
                })
                .collect()
        })
        .collect();
    let mut x = rhs.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].norm().total_cmp(&m[j][k].norm()))?;
        m.swap(k, p);
        x.swap(k, p);
        if m[k][k].norm() == 0.0 {
            m[k][k] = Complex64::new(1e-300, 0.0);
        }
        for i in (k + 1)..n {
            let f = m[i][k] / m[k][k];
            if f.norm() == 0.0 {
                continue;
            }
            for j in k..n {
                let mkj = m[k][j];
                m[i][j] -= f * mkj;
            }
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for i in (0..n).rev() {
        let s: Complex64 = ((i + 1)..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (x[i] - s) / m[i][i];
    }
    x.iter()
        .all(|v| v.re.is_finite() && v.im.is_finite())
        .then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::new(
            Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn jacobi_examples() {
        let e = sym_eigen(&SymMatrix::identity(3));
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        let e = sym_eigen(&SymMatrix::from_diag(&[3.0, 1.0, 2.0]));
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        // λ² − 4λ + 3 = 0
        let e = sym_eigen(&sym(&[&[2.0, 1.0], &[1.0, 2.0]]));
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn abscissa_examples() {
        let d = Matrix::from_diag(&[-1.0, -3.0]);
        assert_eq!(spectral_abscissa(&d).unwrap(), -1.0);
        let rot = Matrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        assert!(spectral_abscissa(&rot).unwrap().abs() < 1e-15);
    }

    #[test]
    fn companion_matrix_roots() {
        // roots −1, −2, −3, −4 ± i
        let roots = [
            Complex64::new(-1.0, 0.0),
            Complex64::new(-2.0, 0.0),
            Complex64::new(-3.0, 0.0),
            Complex64::new(-4.0, 1.0),
            Complex64::new(-4.0, -1.0),
        ];
        let mut poly = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
            for (k, &p) in poly.iter().enumerate() {
                next[k + 1] += p;
                next[k] -= p * r;
            }
            poly = next;
        }
        let n = roots.len();
        let comp = Matrix::from_fn(n, n, |i, j| {
            if i == 0 {
                -poly[n - 1 - j].re
            } else if j + 1 == i {
                1.0
            } else {
                0.0
            }
        });
        let mut eig = general_eigenvalues(&comp).unwrap();
        eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let mut expected = roots.to_vec();
        expected.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        for (e, r) in eig.iter().zip(&expected) {
            assert!((e - r).norm() < 1e-9, "{e} vs {r}");
        }
        assert!((spectral_abscissa(&comp).unwrap() + 1.0).abs() < 1e-10);
    }

    #[test]
    fn repeated_eigenvalue() {
        let d = Matrix::from_diag(&[-2.0, -2.0, -5.0, -2.0]);
        assert!((spectral_abscissa(&d).unwrap() + 2.0).abs() < 1e-9);
    }
}
