//! Cross-oracle checks: every quantity is computed two independent ways.

use harmonet::linalg::{expm, solve_lyapunov, spectral_abscissa, Matrix, SymMatrix};
use harmonet::networks::{rc_eigenvalues, rc_heat_observable, rc_model, RCCircuitSpec};
use harmonet::quadrature::GaussLegendre;
use harmonet::statlab::{ks_critical_value, ks_distance_vg, sample_vg};
use harmonet::vargamma::{make_vg, FourierInversion, VarianceGammaLaw};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::OutDir;
use crate::CliError;

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    statistical: bool,
    error: f64,
    tolerance: f64,
    passed: bool,
}

fn check(name: &'static str, statistical: bool, error: f64, tolerance: f64) -> Check {
    Check {
        name,
        statistical,
        error,
        tolerance,
        passed: error <= tolerance,
    }
}

/// Deterministic stable test system of dimension `n`.
fn test_system(n: usize, k: usize) -> Result<(Matrix, Matrix), CliError> {
    let g = Matrix::from_fn(n, n, |i, j| {
        (1.3 * i as f64 + 0.7 * j as f64 + k as f64).sin()
    });
    let shift = spectral_abscissa(&g)? + 0.5;
    let a = Matrix::from_fn(n, n, |i, j| g[(i, j)] - if i == j { shift } else { 0.0 });
    let b = Matrix::from_fn(n, n, |i, j| {
        (0.9 * i as f64 - 0.4 * j as f64 + k as f64).cos() + if i == j { 1.5 } else { 0.0 }
    });
    Ok((a, b))
}

/// `∫₀^∞ e^{sA} BBᵀ e^{sAᵀ} ds` by Gauss–Legendre panels.
fn lyapunov_quadrature(a: &Matrix, b: &Matrix) -> Result<Matrix, CliError> {
    let n = a.rows();
    let q = b * &b.transpose();
    let width = 0.25 / a.norm1();
    let gl = GaussLegendre::g20();
    let mut at_nodes = Vec::with_capacity(gl.nodes.len());
    for x in &gl.nodes {
        at_nodes.push(expm(&a.scale(0.5 * width * (1.0 + x)))?);
    }
    let step = expm(&a.scale(width))?;
    let mut start = Matrix::identity(n);
    let mut total = Matrix::zeros(n, n);
    while start.max_abs() > 1e-14 {
        for (e, w) in at_nodes.iter().zip(&gl.weights) {
            let e = e * &start;
            total = &total + &(&(&e * &q) * &e.transpose()).scale(0.5 * width * w);
        }
        start = &step * &start;
    }
    Ok(total)
}

fn lyapunov_check() -> Result<f64, CliError> {
    let mut worst = 0.0f64;
    for (k, n) in [1, 2, 3, 5, 8].into_iter().enumerate() {
        let (a, b) = test_system(n, k)?;
        let q = SymMatrix::symmetrized(&(&b * &b.transpose()));
        let m = solve_lyapunov(&a, &q)?;
        let quad = lyapunov_quadrature(&a, &b)?;
        worst = worst.max((&quad - m.matrix()).max_abs() / m.matrix().max_abs());
    }
    Ok(worst)
}

fn inversion_check() -> Result<f64, CliError> {
    let sets: [&[f64]; 4] = [
        &[1.0, 2.0],
        &[0.3, 4.0],
        &[0.5, 1.0, 1.5],
        &[0.2, 0.7, 1.1, 3.0],
    ];
    let mut worst = 0.0f64;
    for ls in sets {
        let law = VarianceGammaLaw::new(ls.to_vec())?;
        let inv = FourierInversion::new(&law)?;
        let lmax = law.lambda_max();
        for k in 1..=200 {
            let s = 0.1 * k as f64 * lmax;
            worst = worst.max((law.density(s)? - inv.density(s)).abs() * lmax);
        }
    }
    Ok(worst)
}

fn rc_check() -> Result<f64, CliError> {
    let mut worst = 0.0f64;
    let mut specs = vec![
        RCCircuitSpec::experimental(88.0, 296.0),
        RCCircuitSpec::experimental(296.0, 296.0),
    ];
    specs.push(RCCircuitSpec {
        r1: 3e7,
        c1: 2e-11,
        t1: 500.0,
        ..RCCircuitSpec::experimental(40.0, 296.0)
    });
    for spec in specs {
        let model = rc_model(&spec)?;
        let law = make_vg(rc_heat_observable(&spec)?.l(), model.m_stat())?;
        let e = rc_eigenvalues(&spec)?;
        worst = worst
            .max((law.lambdas()[0] / e.lambda_minus - 1.0).abs())
            .max((law.lambdas()[1] / e.lambda_plus - 1.0).abs());
    }
    Ok(worst)
}

fn sampling_check(config: &RunConfig) -> Result<(f64, f64), CliError> {
    let law = VarianceGammaLaw::new(vec![0.5, 1.0, 2.0])?;
    let count = 100_000;
    let sample = sample_vg(&law, count, config.seed, config.workers)?;
    Ok((
        ks_distance_vg(&sample, &law)?,
        ks_critical_value(0.01, count),
    ))
}

pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let scale = config.tol_scale;
    let (ks, critical) = sampling_check(config)?;
    let checks = [
        check(
            "lyapunov solve vs quadrature",
            false,
            lyapunov_check()?,
            1e-6 * scale,
        ),
        check(
            "density contour vs Fourier inversion",
            false,
            inversion_check()?,
            1e-6 * scale,
        ),
        check(
            "closed-form RC eigenvalues vs numeric",
            false,
            rc_check()?,
            1e-9 * scale,
        ),
        check(
            "sampler KS vs 1% critical value",
            true,
            ks,
            critical * scale,
        ),
    ];
    for c in &checks {
        println!(
            "{} {}: error {:.3e}, tolerance {:.3e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.error,
            c.tolerance
        );
    }
    if let Some(dir) = &config.out {
        let mut out = OutDir::create(dir)?;
        out.json("selftest.json", &checks)?;
        out.manifest(config)?;
    }
    if let Some(c) = checks.iter().find(|c| !c.passed && !c.statistical) {
        return Err(CliError::Numerical(format!("{} failed", c.name)));
    }
    if let Some(c) = checks.iter().find(|c| !c.passed) {
        return Err(CliError::Statistical(format!("{} failed", c.name)));
    }
    Ok(())
}
