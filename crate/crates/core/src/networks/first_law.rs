//! Work and energy balance of a subnetwork along the Hamiltonian flow.
//!
//! The flow `ṗ = −Vq`, `q̇ = p/m` is solved exactly in the normal modes of
//! `m^{−1/2} V m^{−1/2}`, so the only numerical step is the time quadrature
//! of the work integrals, done with 20-point Gauss–Legendre panels.

use serde::Serialize;

use super::{NetworkError, NetworkSpec, Result, SubnetworkSelection};
use crate::linalg::SymMatrix;
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstLawReport {
    /// `∫ F^ext · q̇_{G0} dt`, the work of the forces from outside `G0`.
    pub w_ext: f64,
    /// `∫ F^int · q̇_{G0} dt`.
    pub w_int: f64,
    pub delta_h: f64,
    pub delta_k: f64,
    pub delta_v: f64,
    /// Total energy of the whole network, conserved by the flow.
    pub energy_scale: f64,
    /// Change of the work integrals when the panel count is doubled.
    pub quadrature_error: f64,
    /// `false` when the quadrature error exceeds `1e-6 · energy_scale`.
    pub resolved: bool,
}

impl FirstLawReport {
    /// Largest violation of `W_ext = ΔH`, `W_ext + W_int = ΔK`, `−W_int = ΔV`.
    pub fn max_violation(&self) -> f64 {
        [
            (self.w_ext - self.delta_h).abs(),
            (self.w_ext + self.w_int - self.delta_k).abs(),
            (-self.w_int - self.delta_v).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

struct NormalModes {
    inv_sqrt_m: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    omegas: Vec<f64>,
    c0: Vec<f64>,
    d0: Vec<f64>,
}

impl NormalModes {
    fn new(spec: &NetworkSpec, initial: &[f64]) -> Self {
        let n = spec.vertices();
        let sqrt_m: Vec<f64> = spec.masses.iter().map(|m| m.sqrt()).collect();
        let v = spec.potential_matrix();
        let w = SymMatrix::symmetrized(&crate::linalg::Matrix::from_fn(n, n, |i, j| {
            v[(i, j)] / (sqrt_m[i] * sqrt_m[j])
        }));
        let eig = w.eigen();
        let vectors: Vec<Vec<f64>> = (0..n)
            .map(|k| (0..n).map(|i| eig.vectors[(i, k)]).collect())
            .collect();
        let omegas: Vec<f64> = eig.values.iter().map(|x| x.sqrt()).collect();
        let (p, q) = initial.split_at(n);
        let y0: Vec<f64> = (0..n).map(|i| sqrt_m[i] * q[i]).collect();
        let ydot0: Vec<f64> = (0..n).map(|i| p[i] / sqrt_m[i]).collect();
        let dot = |u: &[f64], x: &[f64]| u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let c0 = vectors.iter().map(|u| dot(u, &y0)).collect();
        let d0 = vectors.iter().map(|u| dot(u, &ydot0)).collect();
        Self {
            inv_sqrt_m: sqrt_m.iter().map(|s| 1.0 / s).collect(),
            vectors,
            omegas,
            c0,
            d0,
        }
    }

    /// `(q(τ), q̇(τ))`.
    fn at(&self, tau: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.inv_sqrt_m.len();
        let mut q = vec![0.0; n];
        let mut qdot = vec![0.0; n];
        for (k, u) in self.vectors.iter().enumerate() {
            let w = self.omegas[k];
            let (s, c) = (w * tau).sin_cos();
            let ck = self.c0[k] * c + self.d0[k] * s / w;
            let dk = -self.c0[k] * w * s + self.d0[k] * c;
            for i in 0..n {
                q[i] += u[i] * ck;
                qdot[i] += u[i] * dk;
            }
        }
        for i in 0..n {
            q[i] *= self.inv_sqrt_m[i];
            qdot[i] *= self.inv_sqrt_m[i];
        }
        (q, qdot)
    }
}

/// Integrates the work of internal and external forces on `G0` over `[0, t]`
/// with `steps` quadrature panels, and compares with the energy changes.
/// `initial` is the state `(p, q)`.
pub fn first_law_check(
    spec: &NetworkSpec,
    sel: &SubnetworkSelection,
    initial: &[f64],
    t: f64,
    steps: usize,
) -> Result<FirstLawReport> {
    spec.validate()?;
    let n = spec.vertices();
    if initial.len() != 2 * n {
        return Err(NetworkError::InvalidSpec(format!(
            "initial state has length {}, expected {}",
            initial.len(),
            2 * n
        )));
    }
    if !(t.is_finite() && t >= 0.0) || steps == 0 {
        return Err(NetworkError::InvalidSpec(format!(
            "need t >= 0 and steps >= 1 (got {t}, {steps})"
        )));
    }
    let v = spec.potential_matrix();
    let g0 = sel.vertices();
    let gc = sel.complement(n);
    let modes = NormalModes::new(spec, initial);

    // (F^ext·q̇, F^int·q̇) restricted to G0
    let powers = |tau: f64| -> (f64, f64) {
        let (q, qdot) = modes.at(tau);
        let mut ext = 0.0;
        let mut int = 0.0;
        for &x in g0 {
            let f_int: f64 = -g0.iter().map(|&y| v[(x, y)] * q[y]).sum::<f64>();
            let f_ext: f64 = -gc.iter().map(|&y| v[(x, y)] * q[y]).sum::<f64>();
            ext += f_ext * qdot[x];
            int += f_int * qdot[x];
        }
        (ext, int)
    };
    let rule = GaussLegendre::g20();
    let works = |panels: usize| -> (f64, f64) {
        let h = t / panels as f64;
        let mut ext = 0.0;
        let mut int = 0.0;
        for k in 0..panels {
            let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
            ext += rule.integrate(a, b, |tau| powers(tau).0);
            int += rule.integrate(a, b, |tau| powers(tau).1);
        }
        (ext, int)
    };
    let (ext_coarse, int_coarse) = works(steps);
    let (w_ext, w_int) = works(2 * steps);
    let quadrature_error = (w_ext - ext_coarse).abs().max((w_int - int_coarse).abs());

    let kinetic = |p: &[f64]| {
        g0.iter()
            .map(|&x| 0.5 * p[x] * p[x] / spec.masses[x])
            .sum::<f64>()
    };
    let potential = |q: &[f64]| {
        0.5 * g0
            .iter()
            .map(|&x| q[x] * g0.iter().map(|&y| v[(x, y)] * q[y]).sum::<f64>())
            .sum::<f64>()
    };
    let (q0, qdot0) = modes.at(0.0);
    let (qt, qdott) = modes.at(t);
    let p_of = |qdot: &[f64]| {
        qdot.iter()
            .zip(&spec.masses)
            .map(|(a, m)| a * m)
            .collect::<Vec<_>>()
    };
    let (p0, pt) = (p_of(&qdot0), p_of(&qdott));
    let delta_k = kinetic(&pt) - kinetic(&p0);
    let delta_v = potential(&qt) - potential(&q0);

    let (p_init, q_init) = initial.split_at(n);
    let energy_scale = 0.5
        * p_init
            .iter()
            .zip(&spec.masses)
            .map(|(p, m)| p * p / m)
            .sum::<f64>()
        + 0.5
            * (0..n)
                .map(|x| q_init[x] * (0..n).map(|y| v[(x, y)] * q_init[y]).sum::<f64>())
                .sum::<f64>();

    Ok(FirstLawReport {
        w_ext,
        w_int,
        delta_h: delta_k + delta_v,
        delta_k,
        delta_v,
        energy_scale,
        quadrature_error,
        resolved: quadrature_error <= 1e-6 * energy_scale,
    })
}
