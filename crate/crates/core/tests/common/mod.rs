#![allow(dead_code)]

use harmonet::linalg::{spectral_abscissa, Matrix};
use harmonet::networks::{NetworkSpec, RCCircuitSpec, SubnetworkSelection, BOLTZMANN};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

pub fn random_rc(rng: &mut impl Rng) -> RCCircuitSpec {
    RCCircuitSpec {
        r1: log_uniform(rng, 1e6, 1e10),
        r2: log_uniform(rng, 1e6, 1e10),
        c: log_uniform(rng, 1e-12, 1e-9),
        c1: log_uniform(rng, 1e-12, 1e-9),
        c2: log_uniform(rng, 1e-12, 1e-9),
        t1: rng.gen_range(4.0..1000.0),
        t2: rng.gen_range(4.0..1000.0),
        k_b: BOLTZMANN,
    }
}

/// Stable `A` and full-rank `B` of dimension `n`.
pub fn random_stable(rng: &mut impl Rng, n: usize) -> (Matrix, Matrix) {
    let g = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let shift = spectral_abscissa(&g).unwrap() + rng.gen_range(0.2..1.5);
    let a = Matrix::from_fn(n, n, |i, j| g[(i, j)] - if i == j { shift } else { 0.0 });
    let b = Matrix::from_fn(n, n, |i, j| {
        rng.gen_range(-1.0..1.0) + if i == j { 1.5 } else { 0.0 }
    });
    (a, b)
}

/// Connected network (a random spanning tree plus extra edges) with a
/// positive-definite potential and at least one damped vertex.
pub fn random_network(rng: &mut impl Rng, n: usize, temperatures: Option<f64>) -> NetworkSpec {
    loop {
        let masses: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let frequencies: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let mut coupling = vec![vec![0.0; n]; n];
        let set = |c: &mut Vec<Vec<f64>>, i: usize, j: usize, v: f64| {
            c[i][j] = v;
            c[j][i] = v;
        };
        for i in 1..n {
            let j = rng.gen_range(0..i);
            let v = rng.gen_range(-0.6..0.6);
            set(&mut coupling, i, j, if v == 0.0 { 0.1 } else { v });
        }
        for i in 0..n {
            for j in 0..i {
                if coupling[i][j] == 0.0 && rng.gen_bool(0.3) {
                    let v = rng.gen_range(-0.4..0.4);
                    set(&mut coupling, i, j, v);
                }
            }
        }
        let mut gammas: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    rng.gen_range(0.2..2.0)
                } else {
                    0.0
                }
            })
            .collect();
        if gammas.iter().all(|g| *g == 0.0) {
            gammas[rng.gen_range(0..n)] = 1.0;
        }
        let temps = match temperatures {
            Some(t) => vec![t; n],
            None => (0..n).map(|_| rng.gen_range(0.5..3.0)).collect(),
        };
        let spec = NetworkSpec {
            masses,
            frequencies,
            coupling,
            gammas,
            temperatures: temps,
            k_b: 1.0,
        };
        if spec.validate().is_ok() {
            return spec;
        }
    }
}

/// Random proper subset of the vertices; the network is connected, so it is
/// always coupled to its complement.
pub fn random_selection(rng: &mut impl Rng, spec: &NetworkSpec) -> SubnetworkSelection {
    let n = spec.vertices();
    let k = rng.gen_range(1..n);
    let mut all: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        all.swap(i, j);
    }
    SubnetworkSelection::new(spec, all[..k].to_vec()).unwrap()
}

pub fn random_lambdas(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| log_uniform(rng, 0.1, 10.0)).collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
