//! Finite harmonic networks, their Langevin dynamics and energy observables,
//! and the two-resistor RC circuit.
//!
//! Network states are ordered momenta first: `Z = (p_1, …, p_n, q_1, …, q_n)`.

mod first_law;
mod rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{sym_inv_sqrt, sym_inverse, LinalgError, Matrix, SymMatrix};
use crate::ou::{build_model, LinearSDEModel, OuError};
use crate::vargamma::VgError;

pub use crate::ou::{ObservableKind, QuadraticObservable};
pub use first_law::{first_law_check, FirstLawReport};
pub use rc::{
    rc_eigenvalues, rc_heat_observable, rc_limit_density, rc_limit_law, rc_model, HeatUnits,
    RCCircuitSpec, RCEigenvalues,
};

/// Boltzmann constant in J/K.
pub const BOLTZMANN: f64 = 1.380649e-23;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("invalid network: {0}")]
    InvalidSpec(String),
    #[error("invalid subnetwork: {0}")]
    InvalidSelection(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Ou(#[from] OuError),
    #[error(transparent)]
    Vg(#[from] VgError),
}

pub type Result<T> = std::result::Result<T, NetworkError>;

/// Masses, frequencies, couplings, damping rates and temperatures of a finite
/// network. `coupling` is the symmetric matrix `C_xy` of the potential
/// `½ Σ m_x ω_x² q_x² + ½ Σ C_xy q_x q_y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub masses: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub coupling: Vec<Vec<f64>>,
    pub gammas: Vec<f64>,
    pub temperatures: Vec<f64>,
    #[serde(default = "default_kb")]
    pub k_b: f64,
}

fn default_kb() -> f64 {
    BOLTZMANN
}

fn all_positive(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite() && *x > 0.0)
}

impl NetworkSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.masses.len();
        let bad = |m: String| Err(NetworkError::InvalidSpec(m));
        if n == 0 {
            return bad("the network has no vertices".into());
        }
        for (name, len) in [
            ("frequencies", self.frequencies.len()),
            ("gammas", self.gammas.len()),
            ("temperatures", self.temperatures.len()),
            ("coupling rows", self.coupling.len()),
        ] {
            if len != n {
                return bad(format!("{name} has length {len}, expected {n}"));
            }
        }
        if self.coupling.iter().any(|r| r.len() != n) {
            return bad(format!("coupling must be {n}x{n}"));
        }
        if !all_positive(&self.masses)
            || !all_positive(&self.frequencies)
            || !all_positive(&self.temperatures)
        {
            return bad("masses, frequencies and temperatures must be positive".into());
        }
        if !(self.k_b.is_finite() && self.k_b > 0.0) {
            return bad(format!("k_b must be positive (got {})", self.k_b));
        }
        if self.gammas.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return bad("damping rates must be >= 0".into());
        }
        if !self.gammas.iter().any(|g| *g > 0.0) {
            return bad("at least one vertex needs a positive damping rate".into());
        }
        let c = Matrix::from_rows(&self.coupling)
            .map_err(|e| NetworkError::InvalidSpec(e.to_string()))?;
        SymMatrix::new(c).map_err(|e| NetworkError::InvalidSpec(format!("coupling: {e}")))?;
        self.potential_matrix()
            .require_positive()
            .map_err(|e| NetworkError::InvalidSpec(format!("m ω² + C: {e}")))?;
        Ok(())
    }

    pub fn vertices(&self) -> usize {
        self.masses.len()
    }

    /// `V = diag(m ω²) + C`.
    pub fn potential_matrix(&self) -> SymMatrix {
        let n = self.vertices();
        SymMatrix::symmetrized(&Matrix::from_fn(n, n, |i, j| {
            let d = if i == j {
                self.masses[i] * self.frequencies[i].powi(2)
            } else {
                0.0
            };
            d + self.coupling[i][j]
        }))
    }

    pub fn is_equilibrium(&self) -> bool {
        let t0 = self.temperatures[0];
        self.temperatures.iter().all(|t| *t == t0)
    }

    /// `k_B T · diag(m, V^{−1})`, the equilibrium stationary covariance.
    pub fn equilibrium_covariance(&self, temperature: f64) -> Result<SymMatrix> {
        let n = self.vertices();
        let kt = self.k_b * temperature;
        let vinv = sym_inverse(&self.potential_matrix())?;
        let top = Matrix::from_diag(&self.masses).scale(kt);
        let m = Matrix::block2(
            &top,
            &Matrix::zeros(n, n),
            &Matrix::zeros(n, n),
            &vinv.matrix().scale(kt),
        )?;
        Ok(SymMatrix::symmetrized(&m))
    }

    pub fn momentum_index(&self, x: usize) -> usize {
        x
    }

    pub fn position_index(&self, x: usize) -> usize {
        self.vertices() + x
    }
}

/// A proper, nonempty vertex subset `G0` coupled to its complement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubnetworkSelection {
    vertices: Vec<usize>,
}

impl SubnetworkSelection {
    /// Checks the subset against the network, including the nontriviality
    /// condition that some `x ∈ G0`, `y ∉ G0` have `C_xy ≠ 0`.
    pub fn new(spec: &NetworkSpec, mut vertices: Vec<usize>) -> Result<Self> {
        let n = spec.vertices();
        vertices.sort_unstable();
        vertices.dedup();
        let bad = |m: String| Err(NetworkError::InvalidSelection(m));
        if vertices.is_empty() {
            return bad("G0 is empty".into());
        }
        if let Some(v) = vertices.iter().find(|&&v| v >= n) {
            return bad(format!("vertex {v} is not in a network of {n} vertices"));
        }
        let sel = Self { vertices };
        if sel.complement(n).is_empty() {
            return bad("G0 must be a proper subset".into());
        }
        let coupled = sel.vertices.iter().any(|&x| {
            sel.complement(n)
                .iter()
                .any(|&y| spec.coupling[x][y] != 0.0)
        });
        if !coupled {
            return bad("G0 is not coupled to the rest of the network".into());
        }
        Ok(sel)
    }

    /// The whole network; only meaningful for the closed-system checks.
    pub fn whole(spec: &NetworkSpec) -> Self {
        Self {
            vertices: (0..spec.vertices()).collect(),
        }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|x| !self.vertices.contains(x)).collect()
    }
}

/// `A = [[−diag γ, −V], [diag(1/m), 0]]`, `B_xx = (2 γ_x m_x k_B T_x)^{1/2}`
/// on the momentum rows.
pub fn langevin_model(spec: &NetworkSpec) -> Result<LinearSDEModel> {
    spec.validate()?;
    let n = spec.vertices();
    let v = spec.potential_matrix();
    let mut a = Matrix::zeros(2 * n, 2 * n);
    let mut b = Matrix::zeros(2 * n, n);
    for x in 0..n {
        a[(x, x)] = -spec.gammas[x];
        a[(n + x, x)] = 1.0 / spec.masses[x];
        for y in 0..n {
            a[(x, n + y)] = -v[(x, y)];
        }
        b[(x, x)] =
            (2.0 * spec.gammas[x] * spec.masses[x] * spec.k_b * spec.temperatures[x]).sqrt();
    }
    Ok(build_model(a, b)?)
}

/// `K_{G0}(p) = Σ_{x∈G0} p_x² / 2m_x`.
pub fn kinetic_observable(
    spec: &NetworkSpec,
    sel: &SubnetworkSelection,
) -> Result<QuadraticObservable> {
    let support = sel
        .vertices()
        .iter()
        .map(|&x| spec.momentum_index(x))
        .collect();
    let diag: Vec<f64> = sel
        .vertices()
        .iter()
        .map(|&x| 0.5 / spec.masses[x])
        .collect();
    Ok(QuadraticObservable::new(
        support,
        SymMatrix::from_diag(&diag),
        ObservableKind::Kinetic,
    )?)
}

/// `H_{G0} = K_{G0} + ½ q_{G0}·V_{G0} q_{G0}` with `V_{G0}` the principal
/// submatrix of `V` on `G0`.
pub fn total_energy_observable(
    spec: &NetworkSpec,
    sel: &SubnetworkSelection,
) -> Result<QuadraticObservable> {
    let g0 = sel.vertices();
    let k = g0.len();
    let mut support: Vec<usize> = g0.iter().map(|&x| spec.momentum_index(x)).collect();
    support.extend(g0.iter().map(|&x| spec.position_index(x)));
    let v0 = spec.potential_matrix().principal(g0);
    let l = Matrix::from_fn(2 * k, 2 * k, |i, j| match (i < k, j < k) {
        (true, true) if i == j => 0.5 / spec.masses[g0[i]],
        (false, false) => 0.5 * v0[(i - k, j - k)],
        _ => 0.0,
    });
    Ok(QuadraticObservable::new(
        support,
        SymMatrix::symmetrized(&l),
        ObservableKind::Total,
    )?)
}

/// `ϑ = ‖V_{G0}^{−1/2} C_{G0,c} V_{cc}^{−1} C_{c,G0} V_{G0}^{−1/2}‖` from the
/// Schur complement of `V`.
pub fn schur_theta(spec: &NetworkSpec, sel: &SubnetworkSelection) -> Result<f64> {
    let v = spec.potential_matrix();
    let g0 = sel.vertices();
    let gc = sel.complement(spec.vertices());
    let v0_inv_sqrt = sym_inv_sqrt(&v.principal(g0))?;
    let vcc_inv = sym_inverse(&v.principal(&gc))?;
    let c0c = v.matrix().select(g0, &gc);
    let inner = vcc_inv.congruence(&c0c.transpose());
    let x = inner.congruence(v0_inv_sqrt.matrix());
    Ok(x.eigen().values.last().copied().unwrap_or(0.0))
}
