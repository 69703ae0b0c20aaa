mod common;

use harmonet::linalg::{
    expm, general_eigenvalues, is_controllable, solve_lyapunov, sym_eigen, sym_inv_sqrt, sym_sqrt,
    Lu, Matrix, SymMatrix,
};
use proptest::prelude::*;

fn matrix_strategy(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.0f64..1.0, n * n)
        .prop_map(move |v| Matrix::from_row_slice(n, n, &v).unwrap())
}

fn spd_strategy(n: usize) -> impl Strategy<Value = SymMatrix> {
    matrix_strategy(n).prop_map(move |g| {
        let m = &(&g * &g.transpose()) + &Matrix::identity(n).scale(0.1);
        SymMatrix::symmetrized(&m)
    })
}

fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    (a - b).max_abs() <= tol * b.max_abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expm_semigroup(a in matrix_strategy(4), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let lhs = expm(&a.scale(s + t)).unwrap();
        let rhs = &expm(&a.scale(s)).unwrap() * &expm(&a.scale(t)).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn expm_inverse(a in matrix_strategy(5)) {
        let prod = &expm(&a).unwrap() * &expm(&a.scale(-1.0)).unwrap();
        prop_assert!(close(&prod, &Matrix::identity(5), 1e-12));
    }

    #[test]
    fn sqrt_squares_back(m in spd_strategy(5)) {
        let r = sym_sqrt(&m).unwrap();
        prop_assert!(close(&(r.matrix() * r.matrix()), m.matrix(), 1e-12));
        let ri = sym_inv_sqrt(&m).unwrap();
        let id = &(ri.matrix() * m.matrix()) * ri.matrix();
        prop_assert!(close(&id, &Matrix::identity(5), 1e-9));
    }

    #[test]
    fn eigen_reconstruction(m in spd_strategy(6)) {
        let e = sym_eigen(&m);
        let v = &e.vectors;
        let rebuilt = &(v * &Matrix::from_diag(&e.values)) * &v.transpose();
        prop_assert!(close(&rebuilt, m.matrix(), 1e-12));
        prop_assert!(close(&(&v.transpose() * v), &Matrix::identity(6), 1e-12));
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn trace_is_sum_of_eigenvalues(a in matrix_strategy(6)) {
        let sum: f64 = general_eigenvalues(&a).unwrap().iter().map(|z| z.re).sum();
        prop_assert!((sum - a.trace()).abs() < 1e-10);
    }

    #[test]
    fn lu_solves(a in matrix_strategy(5), b in prop::collection::vec(-1.0f64..1.0, 5)) {
        let a = &a + &Matrix::identity(5).scale(3.0);
        let x = Lu::new(&a).unwrap().solve(&b);
        let ax = a.mul_vec(&x);
        prop_assert!(ax.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-12));
    }

    #[test]
    fn lyapunov_residual_small(seed in any::<u64>(), n in 1usize..=6) {
        let (a, b) = common::random_stable(&mut common::rng(seed), n);
        let q = SymMatrix::symmetrized(&(&b * &b.transpose()));
        let m = solve_lyapunov(&a, &q).unwrap();
        let am = &a * m.matrix();
        let r = &(&am + &am.transpose()) + q.matrix();
        prop_assert!(r.max_abs() <= 1e-12 * q.matrix().max_abs());
        prop_assert!(m.require_positive().is_ok());
    }
}

#[test]
fn full_rank_noise_is_controllable() {
    let mut rng = common::rng(3);
    for n in 1..=6 {
        let (a, b) = common::random_stable(&mut rng, n);
        assert!(is_controllable(&a, &b).unwrap().controllable);
    }
}

#[test]
fn scalar_lyapunov_closed_form() {
    let a = Matrix::from_diag(&[-2.0]);
    let q = SymMatrix::from_diag(&[3.0]);
    assert!((solve_lyapunov(&a, &q).unwrap()[(0, 0)] - 0.75).abs() < 1e-15);
}
