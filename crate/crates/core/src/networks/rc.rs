use serde::{Deserialize, Serialize};

use super::{NetworkError, Result, BOLTZMANN};
use crate::linalg::{Lu, Matrix, SymMatrix};
use crate::ou::{build_model_via, LinearSDEModel, ObservableKind, QuadraticObservable};
use crate::vargamma::{TwoDimVGParams, VarianceGammaLaw};

/// Two resistors `R1`, `R2` at temperatures `T1`, `T2`, coupled through `C`,
/// with capacitances `C1`, `C2` to ground.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RCCircuitSpec {
    pub r1: f64,
    pub r2: f64,
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub t1: f64,
    pub t2: f64,
    #[serde(default = "super::default_kb")]
    pub k_b: f64,
}

/// Closed-form limit-law parameters of the circuit heat.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RCEigenvalues {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
    pub epsilon: f64,
    pub theta: f64,
}

/// Units of the heat variable in density tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeatUnits {
    Joules,
    /// Multiples of `k_B T2`.
    KbT2,
}

impl RCCircuitSpec {
    /// The circuit used in the experiment: `R1 = R2 = 10⁸ Ω`, `C = 10⁻¹⁰ F`,
    /// `C1 = 6.8·10⁻¹⁰ F`, `C2 = 4.2·10⁻¹⁰ F`.
    pub fn experimental(t1: f64, t2: f64) -> Self {
        Self {
            r1: 1e8,
            r2: 1e8,
            c: 1e-10,
            c1: 6.8e-10,
            c2: 4.2e-10,
            t1,
            t2,
            k_b: BOLTZMANN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("r1", self.r1),
            ("r2", self.r2),
            ("c", self.c),
            ("c1", self.c1),
            ("c2", self.c2),
            ("t1", self.t1),
            ("t2", self.t2),
            ("k_b", self.k_b),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(NetworkError::InvalidCircuit(format!(
                    "{name} must be positive (got {v})"
                )));
            }
        }
        Ok(())
    }

    /// `[[C + C1, −C], [−C, C + C2]]`.
    pub fn capacitance_matrix(&self) -> SymMatrix {
        let (c, c1, c2) = (self.c, self.c1, self.c2);
        SymMatrix::symmetrized(&Matrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c + c1,
            (1, 1) => c + c2,
            _ => -c,
        }))
    }
}

/// `A = −𝒞⁻¹ℛ⁻¹`, `B = 𝒞⁻¹(𝒯ℛ⁻¹)^{1/2}` with `𝒯 = 2k_B diag(T1, T2)`.
///
/// The stationary covariance is solved for the charges `𝒞V`, whose noise is
/// diagonal, and mapped back; forming `BBᵀ` directly loses the small
/// eigenvalue of `M` when `C ≫ C1, C2`.
pub fn rc_model(spec: &RCCircuitSpec) -> Result<LinearSDEModel> {
    spec.validate()?;
    let cinv = Lu::new(spec.capacitance_matrix().matrix())?.inverse();
    let rinv = Matrix::from_diag(&[1.0 / spec.r1, 1.0 / spec.r2]);
    let a = (&cinv * &rinv).scale(-1.0);
    let noise = Matrix::from_diag(&[
        (2.0 * spec.k_b * spec.t1 / spec.r1).sqrt(),
        (2.0 * spec.k_b * spec.t2 / spec.r2).sqrt(),
    ]);
    let b = &cinv * &noise;
    let a_charge = (&rinv * &cinv).scale(-1.0);
    Ok(build_model_via(a, b, &a_charge, &noise, &cinv)?)
}

/// `Q_t = ½(V_t·𝒞V_t − V_0·𝒞V_0)`.
pub fn rc_heat_observable(spec: &RCCircuitSpec) -> Result<QuadraticObservable> {
    spec.validate()?;
    let l = SymMatrix::symmetrized(&spec.capacitance_matrix().matrix().scale(0.5));
    Ok(QuadraticObservable::new(
        vec![0, 1],
        l,
        ObservableKind::RcHeat,
    )?)
}

/// `λ± = (k_B/2)(T1 + T2 ± |T1 − T2|√(1 − Λ²))` and the derived `ε`, `θ`.
pub fn rc_eigenvalues(spec: &RCCircuitSpec) -> Result<RCEigenvalues> {
    spec.validate()?;
    let RCCircuitSpec {
        r1,
        r2,
        c,
        c1,
        c2,
        t1,
        t2,
        k_b,
    } = *spec;
    let big_lambda = (r1 * r2).sqrt() * c / (0.5 * (r1 + r2) * c + 0.5 * (r1 * c1 + r2 * c2));
    let root = (1.0 - big_lambda * big_lambda).sqrt();
    let dt = (t1 - t2).abs();
    let lambda_plus = 0.5 * k_b * (t1 + t2 + dt * root);
    let lambda_minus = 0.5 * k_b * (t1 + t2 - dt * root);
    let l2d2 = big_lambda * big_lambda * dt * dt;
    let epsilon = root * (t1 * t1 - t2 * t2).abs() / ((t1 * t1 + t2 * t2) - 0.5 * l2d2);
    let theta = (0.5 * (t1 * t1 + t2 * t2) - 0.25 * l2d2).sqrt() / (t1 * t2 + 0.25 * l2d2) / k_b;
    Ok(RCEigenvalues {
        lambda_minus,
        lambda_plus,
        big_lambda,
        epsilon,
        theta,
    })
}

impl RCEigenvalues {
    /// `ε` and `θ` recomputed from `λ±`.
    pub fn params_from_lambdas(&self) -> TwoDimVGParams {
        TwoDimVGParams::from_lambdas(self.lambda_minus, self.lambda_plus)
    }
}

/// Limit law with the closed-form `λ±`.
pub fn rc_limit_law(spec: &RCCircuitSpec) -> Result<VarianceGammaLaw> {
    let e = rc_eigenvalues(spec)?;
    Ok(VarianceGammaLaw::new(vec![e.lambda_minus, e.lambda_plus])?)
}

/// Limit density on a grid given in `units`; in `KbT2` units both `s` and
/// the density are rescaled so that the density integrates to one in `s`.
pub fn rc_limit_density(
    spec: &RCCircuitSpec,
    grid: &[f64],
    units: HeatUnits,
) -> Result<Vec<(f64, f64)>> {
    let law = rc_limit_law(spec)?;
    let scale = match units {
        HeatUnits::Joules => 1.0,
        HeatUnits::KbT2 => spec.k_b * spec.t2,
    };
    grid.iter()
        .map(|&s| Ok((s, scale * law.density(s * scale)?)))
        .collect()
}
