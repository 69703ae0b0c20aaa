//! The variance-gamma law of a pair `(L, M)`.
//!
//! If `X, Y` are independent `N(0, M)` vectors, `Q = X·LX − Y·LY` has the law
//! of `Σ_j λ_j U_j V_j` with `U, V` standard normal and `λ_j` the eigenvalues
//! of `N = 2 L^{1/2} M L^{1/2}`. Its characteristic function is
//! `Π_j (1 + α²λ_j²)^{−1/2}`.

mod contour;
mod fourier;
mod table;

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{sym_sqrt, LinalgError, SymMatrix};
use crate::quadrature::adaptive_gl;
use crate::specfun::{bessel_k_scaled, SpecFunError};

pub use contour::GaussianQuadraticForm;
pub use fourier::FourierInversion;
pub use table::CdfTable;

/// Relative spread of the `λ_j` below which a law is treated as isotropic.
pub const ISOTROPY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VgError {
    #[error("a variance-gamma law needs at least one eigenvalue")]
    Empty,
    #[error("eigenvalue {index} is {value}; all must be finite and > 0")]
    NonPositiveLambda { index: usize, value: f64 },
    #[error("L is {l}x{l} but M is {m}x{m}")]
    DimensionMismatch { l: usize, m: usize },
    #[error("the one-dimensional density diverges logarithmically at s = 0")]
    Divergent,
    #[error("argument must not be NaN")]
    NanArgument,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

pub type Result<T> = std::result::Result<T, VgError>;

/// Eigenvalues `λ_1 ≤ … ≤ λ_n` of `N`, all positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceGammaLaw {
    lambdas: Vec<f64>,
}

/// Parameters of the two-dimensional angular representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoDimVGParams {
    /// `(λ₂² − λ₁²)/(λ₂² + λ₁²)`, in `[0, 1)`.
    pub epsilon: f64,
    /// `(½(λ₁⁻² + λ₂⁻²))^{1/2}`.
    pub theta: f64,
}

impl TwoDimVGParams {
    pub fn from_lambdas(l1: f64, l2: f64) -> Self {
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        // ε = (1 − r²)/(1 + r²) with r = λ₁/λ₂ avoids squaring large values
        let r = lo / hi;
        let epsilon = (1.0 - r * r) / (1.0 + r * r);
        let theta = (0.5 * (lo.powi(-2) + hi.powi(-2))).sqrt();
        Self { epsilon, theta }
    }
}

/// `N = 2 L^{1/2} M L^{1/2}` and its law.
pub fn make_vg(l: &SymMatrix, m: &SymMatrix) -> Result<VarianceGammaLaw> {
    if l.dim() != m.dim() {
        return Err(VgError::DimensionMismatch {
            l: l.dim(),
            m: m.dim(),
        });
    }
    l.require_positive()?;
    m.require_positive()?;
    VarianceGammaLaw::new(n_matrix(l, m)?.eigen().values)
}

/// `2 L^{1/2} M L^{1/2}`.
pub fn n_matrix(l: &SymMatrix, m: &SymMatrix) -> Result<SymMatrix> {
    let root = sym_sqrt(l)?;
    let n = m.congruence(root.matrix());
    Ok(SymMatrix::symmetrized(&n.matrix().scale(2.0)))
}

impl VarianceGammaLaw {
    /// Sorts the eigenvalues; rejects empty, non-finite or non-positive input.
    pub fn new(mut lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(VgError::Empty);
        }
        if let Some((index, &value)) = lambdas
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(VgError::NonPositiveLambda { index, value });
        }
        lambdas.sort_by(f64::total_cmp);
        Ok(Self { lambdas })
    }

    pub fn isotropic(n: usize, lambda: f64) -> Result<Self> {
        Self::new(vec![lambda; n])
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambda_max(&self) -> f64 {
        *self.lambdas.last().expect("nonempty")
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambdas[0]
    }

    pub fn is_isotropic(&self) -> bool {
        self.lambda_max() - self.lambda_min() <= ISOTROPY_TOL * self.lambda_max()
    }

    /// `Some` only for `n = 2`.
    pub fn two_dim_params(&self) -> Option<TwoDimVGParams> {
        (self.dim() == 2).then(|| TwoDimVGParams::from_lambdas(self.lambdas[0], self.lambdas[1]))
    }

    /// `Σ_j (λ_j/2)(ξ_j² − η_j²)`, the same law as a signed chi-square form.
    pub fn quadratic_form(&self) -> GaussianQuadraticForm {
        GaussianQuadraticForm::new(self.lambdas.iter().flat_map(|l| [0.5 * l, -0.5 * l]))
    }

    pub fn char_fn(&self, alpha: f64) -> f64 {
        self.lambdas
            .iter()
            .map(|l| (1.0 + (alpha * l).powi(2)).sqrt().recip())
            .product()
    }

    pub fn variance(&self) -> f64 {
        self.lambdas.iter().map(|l| l * l).sum()
    }

    /// `I(θ) = |θ| / λ_max`.
    pub fn ldp_rate(&self, theta: f64) -> f64 {
        theta.abs() / self.lambda_max()
    }

    /// Density at `s`; errors only for `n = 1` at the origin or NaN input.
    pub fn density(&self, s: f64) -> Result<f64> {
        if s.is_nan() {
            return Err(VgError::NanArgument);
        }
        if s.is_infinite() {
            return Ok(0.0);
        }
        let n = self.dim();
        if n == 1 {
            return self.density_one_dim(s);
        }
        if self.is_isotropic() {
            return self.density_isotropic(s);
        }
        if n == 2 {
            return Ok(self.density_two_dim(s));
        }
        Ok(self.density_by_contour(s))
    }

    pub fn density_profile(&self, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        grid.iter()
            .map(|&s| self.density(s).map(|f| (s, f)))
            .collect()
    }

    /// `K_0(|s|/λ)/(πλ)`.
    fn density_one_dim(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Err(VgError::Divergent);
        }
        let lambda = self.lambdas[0];
        let x = s.abs() / lambda;
        Ok((bessel_k_scaled(0.0, x)?.ln() - x).exp() / (PI * lambda))
    }

    /// `|S^{n−1}| K_ν(|s|/λ) |s|^ν / (2πλ)^{(n+1)/2}` with `ν = (n−1)/2`.
    fn density_isotropic(&self, s: f64) -> Result<f64> {
        let n = self.dim();
        let lambda = self.lambda_max();
        let nu = 0.5 * (n as f64 - 1.0);
        let log_sphere = sphere_area(n).ln();
        let log_norm = 0.5 * (n as f64 + 1.0) * (2.0 * PI * lambda).ln();
        let x = s.abs() / lambda;
        let half_integer = n % 2 == 0;
        if x == 0.0 || (x < 1e-6 && !half_integer) {
            // K_ν(x) x^ν → Γ(ν) 2^{ν−1}
            let log_peak = ln_gamma_half(n - 1) + (nu - 1.0) * 2f64.ln() + nu * lambda.ln();
            return Ok((log_sphere + log_peak - log_norm).exp());
        }
        let log_k = bessel_k_scaled(nu, x)?.ln() - x;
        Ok((log_sphere + log_k + nu * s.abs().ln() - log_norm).exp())
    }

    /// Angular average over `φ ∈ [0, π]` with the decay `e^{−θ|s|√(1−ε)}`
    /// factored out of the integrand.
    fn density_two_dim(&self, s: f64) -> f64 {
        let TwoDimVGParams {
            epsilon: eps,
            theta,
        } = self.two_dim_params().expect("n = 2");
        let ts = theta * s.abs();
        let floor = (1.0 - eps).sqrt();
        let kernel = |phi: f64| {
            let c = (0.5 * phi).cos();
            // 1 + ε cos φ, written to stay accurate near φ = π
            let w = (1.0 - eps) + 2.0 * eps * c * c;
            let root = w.sqrt();
            let excess = 2.0 * eps * c * c / (root + floor);
            ((1.0 - eps * eps) / w).sqrt() * (-ts * excess).exp()
        };
        let integral = adaptive_gl(&kernel, 0.0, PI, 1e-13, 0.0);
        theta / (2.0 * PI) * (-ts * floor).exp() * integral
    }

    /// Density through the contour inversion of the quadratic-form MGF (any n).
    pub fn density_by_contour(&self, s: f64) -> f64 {
        self.quadratic_form().density(s)
    }

    /// `P(Q ≤ s)`.
    pub fn cdf(&self, s: f64) -> f64 {
        if s.is_nan() {
            return f64::NAN;
        }
        if s == 0.0 {
            return 0.5;
        }
        if s.is_infinite() {
            return if s > 0.0 { 1.0 } else { 0.0 };
        }
        let tail = if self.dim() == 2 && self.is_isotropic() {
            0.5 * (-s.abs() / self.lambda_max()).exp()
        } else {
            self.quadratic_form().upper_tail(s.abs())
        };
        if s > 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }

    /// Tabulated CDF on `[−span·λ_max, span·λ_max]` for bulk evaluation.
    pub fn cdf_table(&self, span: f64, nodes_per_side: usize) -> CdfTable {
        let half = span * self.lambda_max();
        CdfTable::build(
            -half,
            half,
            2 * nodes_per_side + 1,
            |s| self.cdf(s),
            |s| self.density(s).unwrap_or(f64::INFINITY),
        )
    }

    /// Draws `Σ λ_j U_j V_j`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        (0..count)
            .map(|_| {
                self.lambdas
                    .iter()
                    .map(|l| {
                        let u: f64 = rng.sample(StandardNormal);
                        let v: f64 = rng.sample(StandardNormal);
                        l * u * v
                    })
                    .sum()
            })
            .collect()
    }
}

/// `|S^{n−1}| = 2π^{n/2}/Γ(n/2)`.
pub fn sphere_area(n: usize) -> f64 {
    (2f64.ln() + 0.5 * n as f64 * PI.ln() - ln_gamma_half(n)).exp()
}

/// `ln Γ(k/2)` for `k ≥ 1`.
pub fn ln_gamma_half(k: usize) -> f64 {
    assert!(k >= 1);
    let (mut acc, mut x) = if k % 2 == 0 {
        (0.0, 1.0)
    } else {
        (0.5 * PI.ln(), 0.5)
    };
    while x < 0.5 * k as f64 - 0.25 {
        acc += x.ln();
        x += 1.0;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_k;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn construction_sorts_and_validates() {
        let vg = VarianceGammaLaw::new(vec![2.0, 1.0]).unwrap();
        assert_eq!(vg.lambdas(), &[1.0, 2.0]);
        assert!(matches!(VarianceGammaLaw::new(vec![]), Err(VgError::Empty)));
        assert!(matches!(
            VarianceGammaLaw::new(vec![1.0, -1.0]),
            Err(VgError::NonPositiveLambda { index: 1, .. })
        ));
    }

    #[test]
    fn make_vg_examples() {
        let vg = make_vg(&SymMatrix::from_diag(&[0.5; 3]), &SymMatrix::identity(3)).unwrap();
        for l in vg.lambdas() {
            assert!((l - 1.0).abs() < 1e-14);
        }
        let err = make_vg(&SymMatrix::identity(2), &SymMatrix::identity(3)).unwrap_err();
        assert!(matches!(err, VgError::DimensionMismatch { .. }));
        assert!(make_vg(&SymMatrix::from_diag(&[1.0, -1.0]), &SymMatrix::identity(2)).is_err());
    }

    #[test]
    fn char_fn_examples() {
        let vg = VarianceGammaLaw::new(vec![1.0]).unwrap();
        assert_eq!(vg.char_fn(0.0), 1.0);
        assert!((vg.char_fn(1.0) - 0.5f64.sqrt()).abs() < 1e-15);
        let vg = VarianceGammaLaw::new(vec![0.3, 1.7, 2.2]).unwrap();
        assert_eq!(vg.char_fn(1.3), vg.char_fn(-1.3));
    }

    #[test]
    fn laplace_when_isotropic_in_two_dims() {
        let vg = VarianceGammaLaw::isotropic(2, 1.5).unwrap();
        for &s in &[0.0, 0.2, -1.0, 30.0, -59.0] {
            let exact = (-f64::abs(s) / 1.5).exp() / 3.0;
            assert!(rel(vg.density(s).unwrap(), exact) < 1e-13, "s={s}");
        }
        assert!((vg.cdf(1.5) - (1.0 - 0.5 * (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn cdf_examples() {
        let vg = VarianceGammaLaw::isotropic(2, 1.0).unwrap();
        assert!((vg.cdf(1.0) - 0.8160603).abs() < 1e-7);
        let vg = VarianceGammaLaw::new(vec![0.4, 1.0, 2.5]).unwrap();
        assert_eq!(vg.cdf(0.0), 0.5);
        assert!((vg.cdf(1.3) + vg.cdf(-1.3) - 1.0).abs() < 1e-14);
        assert!((1.0 - vg.cdf(150.0)) < 1e-9);
    }

    #[test]
    fn one_dimensional_density() {
        let vg = VarianceGammaLaw::new(vec![1.0]).unwrap();
        let exact = bessel_k(0.0, 1.0).unwrap() / PI;
        assert!(rel(vg.density(1.0).unwrap(), exact) < 1e-13);
        assert!(matches!(vg.density(0.0), Err(VgError::Divergent)));
        // the contour route inverts the same law independently
        for &s in &[0.01, 1.0, -3.0, 30.0] {
            assert!(
                rel(vg.density(s).unwrap(), vg.density_by_contour(s)) < 1e-10,
                "s={s}"
            );
        }
    }

    #[test]
    fn isotropic_closed_form_matches_contour() {
        for n in [3usize, 4, 5, 8] {
            let vg = VarianceGammaLaw::isotropic(n, 0.7).unwrap();
            for &s in &[0.0, 1e-7, 0.3, 2.0, -9.0, 28.0] {
                let a = vg.density(s).unwrap();
                let b = vg.density_by_contour(s);
                assert!(rel(a, b) < 1e-10, "n={n} s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn two_dim_angular_form_matches_contour() {
        for &(l1, l2) in &[(1.0, 2.0), (0.05, 3.0), (1.0, 1.0 + 1e-9), (2.0, 2.3)] {
            let vg = VarianceGammaLaw::new(vec![l1, l2]).unwrap();
            for k in -8..=40 {
                let s = k as f64 * l2;
                let a = vg.density(s).unwrap();
                let b = vg.density_by_contour(s);
                assert!(rel(a, b) < 1e-10, "λ=({l1},{l2}) s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn two_dim_params() {
        let p = TwoDimVGParams::from_lambdas(1.0, 2.0);
        assert!((p.epsilon - 0.6).abs() < 1e-15);
        assert!((p.theta - (0.625f64).sqrt()).abs() < 1e-15);
        assert!(VarianceGammaLaw::new(vec![1.0])
            .unwrap()
            .two_dim_params()
            .is_none());
    }

    #[test]
    fn ldp_rate_examples() {
        let vg = VarianceGammaLaw::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(vg.ldp_rate(0.0), 0.0);
        assert_eq!(vg.ldp_rate(4.0), 2.0);
        assert_eq!(vg.ldp_rate(-4.0), 2.0);
    }

    #[test]
    fn density_profile_is_even() {
        let vg = VarianceGammaLaw::new(vec![0.5, 1.0, 1.5]).unwrap();
        assert_eq!(vg.density_profile(&[1.0]).unwrap().len(), 1);
        let p = vg.density_profile(&[-2.0, -0.5, 0.5, 2.0]).unwrap();
        assert!(rel(p[0].1, p[3].1) < 1e-13 && rel(p[1].1, p[2].1) < 1e-13);
    }

    #[test]
    fn sampling_edge_cases() {
        let vg = VarianceGammaLaw::new(vec![1.0, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(vg.sample(&mut rng, 0).is_empty());
        let xs = vg.sample(&mut rng, 200_000);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let sd = vg.variance().sqrt();
        assert!(mean.abs() < 4.0 * sd / (xs.len() as f64).sqrt());
    }

    #[test]
    fn gamma_and_sphere() {
        assert!((ln_gamma_half(1) - 0.5 * PI.ln()).abs() < 1e-15);
        assert!(ln_gamma_half(2).abs() < 1e-15);
        assert!((ln_gamma_half(7) - (3.323350970447843f64).ln()).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
    }
}
