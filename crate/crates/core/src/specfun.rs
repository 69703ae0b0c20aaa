//! Modified Bessel functions of the second kind, `K_ν(x)` for real `ν ≥ 0`, `x > 0`.
//!
//! Three evaluation paths are provided, each used where it is cheapest and
//! most accurate:
//!
//! * the integral `K_ν(x) = ∫₀^∞ exp(−x cosh t) cosh(νt) dt`, summed with the
//!   trapezoidal rule (spectrally accurate for this even, doubly-exponentially
//!   decaying integrand) with step halving until stable;
//! * the closed form for half-integer order via upward recurrence from
//!   `K_{1/2}` and `K_{3/2}`;
//! * the large-argument expansion `√(π/2x) e^{−x} Σ a_k(ν) x^{−k}`.
//!
//! The `_scaled` variants return `e^x K_ν(x)`, which never underflows and is
//! what density evaluations in the far tail rely on.

use std::f64::consts::PI;

use thiserror::Error;

/// Largest order for which accuracy is guaranteed.
pub const MAX_ORDER: f64 = 50.0;
/// Beyond this argument `K_ν` is reported as zero with the underflow flag set.
pub const UNDERFLOW_ARG: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("Bessel K requires x > 0 (got {0}); x = 0 is a branch point")]
    NonPositiveArgument(f64),
    #[error("Bessel order must be finite and >= 0 (got {0})")]
    InvalidOrder(f64),
    #[error("asymptotic expansion needs x >= {min} for order {nu} (got {x})")]
    AsymptoticDomain { nu: f64, x: f64, min: f64 },
}

pub type Result<T> = std::result::Result<T, SpecFunError>;

/// A validated Bessel order `ν ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if nu.is_finite() && nu >= 0.0 {
            Ok(Self(nu))
        } else {
            Err(SpecFunError::InvalidOrder(nu))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `Some(m)` when `ν = m + 1/2`.
    pub fn half_integer(self) -> Option<u32> {
        let m = self.0 - 0.5;
        (m >= 0.0 && m.fract() == 0.0 && m <= 1000.0).then_some(m as u32)
    }
}

/// Result of [`bessel_k_eval`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselK {
    pub value: f64,
    /// Set when `x > 700` and the value was flushed to zero.
    pub underflow: bool,
}

fn check_arg(x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(SpecFunError::NonPositiveArgument(x))
    }
}

/// `K_ν(x)`.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    bessel_k_eval(nu, x).map(|k| k.value)
}

pub fn bessel_k_eval(nu: f64, x: f64) -> Result<BesselK> {
    BesselOrder::new(nu)?;
    check_arg(x)?;
    if x > UNDERFLOW_ARG {
        return Ok(BesselK {
            value: 0.0,
            underflow: true,
        });
    }
    Ok(BesselK {
        value: bessel_k_scaled(nu, x)? * (-x).exp(),
        underflow: false,
    })
}

/// `e^x K_ν(x)`, routed to the half-integer, asymptotic or integral path.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    let order = BesselOrder::new(nu)?;
    check_arg(x)?;
    if let Some(m) = order.half_integer() {
        return Ok(half_integer_scaled(m, x));
    }
    if x > 20.0 + nu * nu {
        return Ok(asymptotic_scaled(nu, x, None));
    }
    Ok(integral_scaled(nu, x))
}

/// `e^x K_ν(x)` straight from the integral representation.
pub fn bessel_k_integral_scaled(nu: f64, x: f64) -> Result<f64> {
    BesselOrder::new(nu)?;
    check_arg(x)?;
    Ok(integral_scaled(nu, x))
}

fn integral_scaled(nu: f64, x: f64) -> f64 {
    // e^x K_ν(x) = ∫₀^∞ exp(−2x sinh²(t/2)) cosh(νt) dt
    let g = |t: f64| {
        let sh = (0.5 * t).sinh();
        let expo = -2.0 * x * sh * sh;
        0.5 * ((expo + nu * t).exp() + (expo - nu * t).exp())
    };
    // the log-integrand peaks where x sinh t = ν
    let peak = (nu / x).asinh();
    let tail_sum = |h: f64, offset: f64| -> f64 {
        let mut sum = 0.0;
        let mut k = 0usize;
        loop {
            let t = offset + k as f64 * h;
            let v = g(t);
            sum += v;
            if t > peak && v <= 1e-18 * sum {
                break;
            }
            k += 1;
            if k > 1_000_000 {
                break;
            }
        }
        sum
    };
    let mut h = 0.5f64.min(1.0 / x.sqrt());
    let mut estimate = h * (0.5 * g(0.0) + tail_sum(h, h));
    for _ in 0..20 {
        let refined = 0.5 * estimate + 0.5 * h * tail_sum(h, 0.5 * h);
        h *= 0.5;
        let done = (refined - estimate).abs() <= 1e-15 * refined.abs();
        estimate = refined;
        if done {
            break;
        }
    }
    estimate
}

/// `a_k(ν) = (4ν²−1²)(4ν²−3²)…(4ν²−(2k−1)²) / (k! 8^k)`, `a_0 = 1`.
pub fn asymptotic_coefficient(nu: f64, k: u32) -> f64 {
    let mu = 4.0 * nu * nu;
    (1..=k).fold(1.0, |acc, j| {
        let odd = (2 * j - 1) as f64;
        acc * (mu - odd * odd) / (8.0 * j as f64)
    })
}

/// `√(π/2x) e^{−x} Σ_{k<terms} a_k(ν) x^{−k}`, valid for `x ≥ 10 max(1, ν²)`.
pub fn bessel_k_asymptotic(nu: f64, x: f64, terms: u32) -> Result<f64> {
    BesselOrder::new(nu)?;
    check_arg(x)?;
    let min = 10.0 * nu.powi(2).max(1.0);
    if x < min {
        return Err(SpecFunError::AsymptoticDomain { nu, x, min });
    }
    Ok(asymptotic_scaled(nu, x, Some(terms)) * (-x).exp())
}

/// Scaled asymptotic sum. With `terms = None` the series is cut at its
/// smallest term or once terms drop below 1e-17 of the sum.
fn asymptotic_scaled(nu: f64, x: f64, terms: Option<u32>) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut sum = 1.0f64;
    let mut term = 1.0f64;
    let limit = terms.unwrap_or(200);
    for k in 1..limit {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (8.0 * k as f64 * x);
        if terms.is_none() && (next.abs() >= term.abs() || next.abs() < 1e-17 * sum.abs()) {
            if next.abs() < term.abs() {
                sum += next;
            }
            break;
        }
        term = next;
        sum += term;
    }
    (PI / (2.0 * x)).sqrt() * sum
}

/// `K_{m+1/2}(x)`.
pub fn bessel_k_half_integer(m: u32, x: f64) -> Result<f64> {
    check_arg(x)?;
    if x > UNDERFLOW_ARG {
        return Ok(0.0);
    }
    Ok(half_integer_scaled(m, x) * (-x).exp())
}

/// `e^x K_{m+1/2}(x)` by upward recurrence `K_{ν+1} = K_{ν−1} + (2ν/x) K_ν`.
fn half_integer_scaled(m: u32, x: f64) -> f64 {
    let k_half = (PI / (2.0 * x)).sqrt();
    if m == 0 {
        return k_half;
    }
    let mut prev = k_half;
    let mut cur = k_half * (1.0 + 1.0 / x);
    for j in 1..m {
        let nu = j as f64 + 0.5;
        let next = prev + 2.0 * nu / x * cur;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn half_order_closed_forms() {
        // K_{1/2}(1) = √(π/2) e^{-1}
        let k = bessel_k(0.5, 1.0).unwrap();
        assert!(rel(k, 0.461_068_504_447_894_0) < 1e-14);
        assert!(rel(bessel_k(1.5, 1.0).unwrap(), 0.922_137_008_895_788) < 1e-14);
        assert!(
            rel(
                bessel_k_half_integer(0, 2.0).unwrap(),
                0.119_937_771_968_061_4
            ) < 1e-14
        );
    }

    #[test]
    fn reference_values() {
        // 30-digit arbitrary-precision reference values
        let cases = [
            (0.0, 1.0, 0.421_024_438_240_708_333_34),
            (0.0, 1e-6, 13.931_442_073_626_419_459),
            (1.0, 2.5, 0.073_890_816_347_747_063_649),
            (2.3, 0.01, 114_365.299_661_120_981_77),
            (0.0, 25.0, 3.464_161_562_213_114_355_4e-12),
            (2.5, 0.3, 75.152_140_164_374_890_497),
            (7.7, 3.0, 44.016_644_483_544_980_485),
            (1.0, 100.0, 4.679_853_735_636_909_286_6e-45),
            (0.7, 21.0, 2.085_409_260_670_245_863_1e-10),
            (50.0, 60.0, 5.038_929_808_517_651_432_1e-19),
        ];
        for (nu, x, expected) in cases {
            let k = bessel_k(nu, x).unwrap();
            assert!(
                rel(k, expected) < 1e-10,
                "K_{nu}({x}) = {k}, expected {expected}"
            );
        }
    }

    #[test]
    fn integral_matches_half_integer_path() {
        for &x in &[1e-3, 0.1, 1.0, 5.0, 30.0, 200.0] {
            for m in 0..4u32 {
                let nu = m as f64 + 0.5;
                let integral = bessel_k_integral_scaled(nu, x).unwrap();
                let closed = half_integer_scaled(m, x);
                assert!(
                    rel(integral, closed) < 1e-12,
                    "nu={nu} x={x}: {integral} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn small_argument_log_behaviour() {
        // K_0(x) + ln(x/2) + γ → 0 as x → 0 (next term is O(x² ln x))
        let euler = 0.577_215_664_901_532_9;
        for &x in &[1e-6, 1e-4] {
            let k0 = bessel_k(0.0, x).unwrap();
            let lead = -(x / 2.0).ln() - euler;
            assert!((k0 - lead).abs() < 10.0 * x * x * (1.0 - x.ln()), "x={x}");
        }
    }

    #[test]
    fn asymptotic_coefficients() {
        assert_eq!(asymptotic_coefficient(0.3, 0), 1.0);
        assert_eq!(asymptotic_coefficient(0.0, 1), -1.0 / 8.0);
        // 4ν² − 1 = 0 kills every k ≥ 1 for ν = 1/2
        for k in 1..6 {
            assert_eq!(asymptotic_coefficient(0.5, k), 0.0);
        }
        let exact = bessel_k(0.5, 12.0).unwrap();
        assert!(rel(bessel_k_asymptotic(0.5, 12.0, 4).unwrap(), exact) < 1e-15);
    }

    #[test]
    fn k0_at_50_six_terms() {
        let quad = bessel_k_integral_scaled(0.0, 50.0).unwrap() * (-50f64).exp();
        let asym = bessel_k_asymptotic(0.0, 50.0, 6).unwrap();
        assert!(rel(asym, quad) < 1e-10);
    }

    #[test]
    fn errors_and_underflow() {
        assert_eq!(
            bessel_k(1.0, 0.0),
            Err(SpecFunError::NonPositiveArgument(0.0))
        );
        assert!(bessel_k(-1.0, 1.0).is_err());
        assert!(matches!(
            bessel_k_asymptotic(2.0, 20.0, 3),
            Err(SpecFunError::AsymptoticDomain { .. })
        ));
        let far = bessel_k_eval(0.0, 800.0).unwrap();
        assert!(far.underflow && far.value == 0.0);
        assert!(!bessel_k_eval(0.0, 600.0).unwrap().underflow);
    }

    #[test]
    fn recurrence_holds() {
        for &nu in &[0.3, 1.0, 2.2, 7.7] {
            for &x in &[0.05, 0.8, 3.0, 17.0, 45.0] {
                let lhs = bessel_k(nu + 1.0, x).unwrap();
                let rhs = bessel_k((nu - 1.0f64).abs(), x).unwrap()
                    + 2.0 * nu / x * bessel_k(nu, x).unwrap();
                assert!(rel(lhs, rhs) < 1e-9, "nu={nu} x={x}");
            }
        }
    }
}
