use super::{Lu, Matrix, Result};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which the [13/13] approximant meets double precision.
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring.
///
/// Small-norm inputs (`‖a‖₁ < 0.5`) use a truncated Taylor series; everything
/// else goes through the degree-13 Padé approximant.
pub fn expm(a: &Matrix) -> Result<Matrix> {
    let n = a.require_square()?;
    let norm = a.norm1();
    if norm < 0.5 {
        return Ok(taylor(a));
    }
    let s = (norm / THETA13).log2().ceil().max(0.0) as i32;
    let scaled = a.scale(0.5f64.powi(s));
    let b = &PADE13;
    let ident = Matrix::identity(n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> Matrix {
        Matrix::from_fn(n, n, |i, j| {
            c6 * a6[(i, j)] + c4 * a4[(i, j)] + c2 * a2[(i, j)] + c0 * ident[(i, j)]
        })
    };
    let u_inner = &(&a6 * &lin(b[13], b[11], b[9], 0.0)) + &lin(b[7], b[5], b[3], b[1]);
    let u = &scaled * &u_inner;
    let v = &(&a6 * &lin(b[12], b[10], b[8], 0.0)) + &lin(b[6], b[4], b[2], b[0]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = Lu::new(&q)?.solve_matrix(&p);
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn taylor(a: &Matrix) -> Matrix {
    let n = a.rows();
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..40 {
        term = (&term * a).scale(1.0 / k as f64);
        sum = &sum + &term;
        if term.max_abs() <= f64::EPSILON * 1e-2 * sum.max_abs() {
            break;
        }
    }
    sum
}
