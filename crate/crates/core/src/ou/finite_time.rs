//! Exact law of `Q_t = X_t·L X_t − X_0·L X_0` at finite `t`.
//!
//! With `K = N^{−1/2} L^{1/2}`, the vectors `V = K(X_t − X_0)` and
//! `U = K(X_t + X_0)` are jointly Gaussian with covariance
//! `M̃_t = [[I − A(t), B(t)], [B(t)ᵀ, I + A(t)]]`, where
//! `A(t) = K(Δ + Δᵀ)Kᵀ` and `B(t) = K(Δ − Δᵀ)Kᵀ`, and `Q_t = V·N U`. Hence
//! `Q_t = Σ μ_k ξ_k²` with `μ_k` the eigenvalues of `M̃^{1/2} Ñ M̃^{1/2}`,
//! `Ñ = ½[[0, N], [N, 0]]`.

use num_complex::Complex64;
use serde::Serialize;

use super::{lag_cov, LinearSDEModel, QuadraticObservable, Result};
use crate::linalg::{sym_inv_sqrt, sym_sqrt, Matrix, SymMatrix};
use crate::vargamma::{n_matrix, CdfTable, GaussianQuadraticForm};

#[derive(Debug, Clone, Serialize)]
pub struct FiniteTimeQtLaw {
    pub t: f64,
    pub mtilde: SymMatrix,
    pub ntilde: SymMatrix,
    #[serde(skip)]
    form: GaussianQuadraticForm,
}

pub fn finite_time_qt_law(
    model: &LinearSDEModel,
    obs: &QuadraticObservable,
    t: f64,
) -> Result<FiniteTimeQtLaw> {
    obs.check_dim(model.dim())?;
    let support = obs.support();
    let k = support.len();
    let m_s = model.m_stat().principal(support);
    let delta = lag_cov(model, t)?.delta.select(support, support);

    let n = n_matrix(obs.l(), &m_s)?;
    let kmat = sym_inv_sqrt(&n)?.matrix() * sym_sqrt(obs.l())?.matrix();
    let kt = kmat.transpose();
    let sym_part = &delta + &delta.transpose();
    let anti_part = &delta - &delta.transpose();
    let a_t = &(&kmat * &sym_part) * &kt;
    let b_t = &(&kmat * &anti_part) * &kt;

    let eye = Matrix::identity(k);
    let mtilde = SymMatrix::symmetrized(&Matrix::block2(
        &(&eye - &a_t),
        &b_t,
        &b_t.transpose(),
        &(&eye + &a_t),
    )?);
    let zero = Matrix::zeros(k, k);
    let half_n = n.matrix().scale(0.5);
    let ntilde = SymMatrix::symmetrized(&Matrix::block2(&zero, &half_n, &half_n, &zero)?);

    let root = sym_sqrt(&mtilde)?;
    let weights = ntilde.congruence(root.matrix()).eigen().values;
    Ok(FiniteTimeQtLaw {
        t,
        mtilde,
        ntilde,
        form: GaussianQuadraticForm::new(weights),
    })
}

/// `det(I − 2iα M̃^{1/2} Ñ M̃^{1/2})^{−1/2}` as `Π_k (1 − 2iαμ_k)^{−1/2}`.
///
/// Each factor has real part one, so the principal root of every factor is
/// continuous in `α` and the product is the continuous branch from `α = 0`.
pub fn finite_time_qt_charfn(law: &FiniteTimeQtLaw, alpha: f64) -> Complex64 {
    law.form.char_fn(alpha)
}

impl FiniteTimeQtLaw {
    pub fn weights(&self) -> &[f64] {
        self.form.weights()
    }

    pub fn quadratic_form(&self) -> &GaussianQuadraticForm {
        &self.form
    }

    pub fn char_fn(&self, alpha: f64) -> Complex64 {
        finite_time_qt_charfn(self, alpha)
    }

    /// Spectral norm of `M̃_t − I`.
    pub fn deviation_from_limit(&self) -> f64 {
        let d = self.mtilde.matrix() - &Matrix::identity(self.mtilde.dim());
        let e = SymMatrix::symmetrized(&d).eigen().values;
        e.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `None` when `Q_t ≡ 0` (for instance at `t = 0`).
    pub fn density(&self, s: f64) -> Option<f64> {
        (!self.form.is_degenerate()).then(|| self.form.density(s))
    }

    pub fn cdf(&self, s: f64) -> f64 {
        if self.form.is_degenerate() {
            return if s < 0.0 { 0.0 } else { 1.0 };
        }
        self.form.cdf(s)
    }

    pub fn mean(&self) -> f64 {
        self.form.mean()
    }

    pub fn variance(&self) -> f64 {
        self.form.variance()
    }

    /// Tabulated CDF on `[−span·λ, span·λ]`, `λ = 2 max|w|` (the scale that
    /// matches `VarianceGammaLaw::cdf_table`).
    pub fn cdf_table(&self, span: f64, nodes_per_side: usize) -> CdfTable {
        let scale = 2.0 * self.weights().iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let half = span * if scale > 0.0 { scale } else { 1.0 };
        CdfTable::build(
            -half,
            half,
            2 * nodes_per_side + 1,
            |s| self.cdf(s),
            |s| {
                self.density(s)
                    .filter(|f| f.is_finite())
                    .unwrap_or(f64::INFINITY)
            },
        )
    }
}
