//! Inversion of the product characteristic function on a uniform α-grid.
//!
//! The leading large-α behaviour of `χ(α) = Π(1 + α²λ_j²)^{−1/2}` is removed
//! with `g(α) = (Πλ_j)^{−1} (α² + θ²)^{−n/2}`, `θ² = mean(λ_j^{−2})`, whose
//! cosine transform is a Bessel function. The remainder decays like
//! `α^{−n−4}` and is summed with the trapezoidal rule, spacing chosen so the
//! aliased copies sit `120 λ_n` apart.

use std::f64::consts::PI;

use super::{ln_gamma_half, Result, VarianceGammaLaw, VgError};
use crate::specfun::bessel_k_scaled;

#[derive(Debug, Clone)]
pub struct FourierInversion {
    n: usize,
    log_prefactor: f64,
    theta: f64,
    step: f64,
    remainder: Vec<f64>,
}

impl FourierInversion {
    /// Needs `n ≥ 2` (for `n = 1` the characteristic function is not integrable).
    pub fn new(law: &VarianceGammaLaw) -> Result<Self> {
        let n = law.dim();
        if n < 2 {
            return Err(VgError::Divergent);
        }
        let lambdas = law.lambdas();
        let log_prefactor = -lambdas.iter().map(|l| l.ln()).sum::<f64>();
        let theta = (lambdas.iter().map(|l| l.powi(-2)).sum::<f64>() / n as f64).sqrt();
        let step = 2.0 * PI / (120.0 * law.lambda_max());
        let cutoff = 200.0 / law.lambda_min();
        let count = (cutoff / step).ceil() as usize;
        let remainder = (0..=count)
            .map(|k| {
                let a = k as f64 * step;
                let g = (log_prefactor - 0.5 * n as f64 * (a * a + theta * theta).ln()).exp();
                law.char_fn(a) - g
            })
            .collect();
        Ok(Self {
            n,
            log_prefactor,
            theta,
            step,
            remainder,
        })
    }

    pub fn density(&self, s: f64) -> f64 {
        let mut sum = 0.5 * self.remainder[0];
        for (k, r) in self.remainder.iter().enumerate().skip(1) {
            sum += r * (k as f64 * self.step * s).cos();
        }
        self.leading_transform(s) + self.step / PI * sum
    }

    /// `(1/π) ∫₀^∞ g(α) cos(αs) dα`.
    fn leading_transform(&self, s: f64) -> f64 {
        let n = self.n;
        let nu = 0.5 * (n as f64 - 1.0);
        let x = self.theta * s.abs();
        let base = self.log_prefactor - 0.5 * PI.ln() - ln_gamma_half(n);
        if x < 1e-6 && n % 2 == 1 || x == 0.0 {
            // ∫₀^∞ (α² + θ²)^{−n/2} dα = θ^{1−n} √π Γ(ν)/(2Γ(n/2))
            let log_int = (1.0 - n as f64) * self.theta.ln() + 0.5 * PI.ln() + ln_gamma_half(n - 1)
                - 2f64.ln()
                - ln_gamma_half(n);
            return (self.log_prefactor - PI.ln() + log_int).exp();
        }
        let log_k = bessel_k_scaled(nu, x).expect("x > 0").ln() - x;
        (base + nu * (s.abs() / (2.0 * self.theta)).ln() + log_k).exp()
    }
}
