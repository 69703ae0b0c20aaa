mod common;

use harmonet::networks::{rc_eigenvalues, rc_limit_law, RCCircuitSpec};
use harmonet::quadrature::adaptive_gl;
use harmonet::statlab::tail_slope_density;
use harmonet::vargamma::{FourierInversion, VarianceGammaLaw};
use proptest::prelude::*;

fn lambdas(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    n.prop_flat_map(|n| prop::collection::vec(0.2f64..5.0, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn density_is_even(ls in lambdas(2..=5), s in 0.01f64..30.0) {
        let law = VarianceGammaLaw::new(ls).unwrap();
        let (p, m) = (law.density(s).unwrap(), law.density(-s).unwrap());
        prop_assert!((p - m).abs() <= 1e-12 * p);
    }

    #[test]
    fn cdf_is_monotone_with_centre_half(ls in lambdas(1..=5)) {
        let law = VarianceGammaLaw::new(ls).unwrap();
        prop_assert!((law.cdf(0.0) - 0.5).abs() < 1e-12);
        let lmax = law.lambda_max();
        let vals: Vec<f64> = (-50..=50).map(|k| law.cdf(0.4 * k as f64 * lmax)).collect();
        prop_assert!(vals.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(vals.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn cdf_symmetry(ls in lambdas(2..=4), s in 0.0f64..20.0) {
        let law = VarianceGammaLaw::new(ls).unwrap();
        prop_assert!((law.cdf(s) + law.cdf(-s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contour_matches_fourier(ls in lambdas(2..=6), u in 0.05f64..20.0) {
        let law = VarianceGammaLaw::new(ls).unwrap();
        let s = u * law.lambda_max();
        let inv = FourierInversion::new(&law).unwrap();
        let scale = law.lambda_max();
        prop_assert!((law.density_by_contour(s) - inv.density(s)).abs() * scale < 1e-9);
    }

    #[test]
    fn char_fn_bounds(ls in lambdas(1..=6), alpha in -50.0f64..50.0) {
        let law = VarianceGammaLaw::new(ls).unwrap();
        let c = law.char_fn(alpha);
        prop_assert!(c > 0.0 && c <= 1.0);
        prop_assert_eq!(law.char_fn(0.0), 1.0);
    }

    #[test]
    fn cdf_is_integral_of_density(ls in lambdas(3..=5), u in 0.1f64..8.0) {
        let law = VarianceGammaLaw::new(ls).unwrap();
        let s = u * law.lambda_max();
        let mass = adaptive_gl(&|x: f64| law.density(x).unwrap(), 0.0, s, 1e-12, 1e-15);
        prop_assert!((law.cdf(s) - 0.5 - mass).abs() < 1e-9);
    }

    #[test]
    fn ldp_rate_is_scaled_abs(ls in lambdas(1..=5), theta in -10.0f64..10.0) {
        let law = VarianceGammaLaw::new(ls).unwrap();
        prop_assert!((law.ldp_rate(theta) - theta.abs() / law.lambda_max()).abs() < 1e-15);
    }
}

#[test]
fn sample_variance_matches() {
    let law = VarianceGammaLaw::new(vec![0.5, 1.0, 2.0]).unwrap();
    let xs = law.sample(&mut common::rng(4), 400_000);
    let var = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
    assert!((var / law.variance() - 1.0).abs() < 0.02, "{var}");
}

#[test]
fn isotropic_three_dim_peak() {
    // f(0) = (1/π) ∫₀^∞ (1+α²λ²)^{-3/2} dα = 1/(πλ)
    let lambda = 1.7;
    let law = VarianceGammaLaw::isotropic(3, lambda).unwrap();
    let f0 = law.density(0.0).unwrap();
    let integral = adaptive_gl(
        &|u: f64| {
            let a = u / (1.0 - u);
            (1.0 + a * a * lambda * lambda).powf(-1.5) / (1.0 - u).powi(2)
        },
        0.0,
        1.0,
        1e-13,
        1e-16,
    );
    assert!((f0 - integral / std::f64::consts::PI).abs() < 1e-10 * f0);
    assert!((f0 - 1.0 / (std::f64::consts::PI * lambda)).abs() < 1e-12 * f0);
}

#[test]
fn equilibrium_tail_slope_is_exact() {
    let spec = RCCircuitSpec::experimental(296.0, 296.0);
    let law = rc_limit_law(&spec).unwrap();
    let kt = spec.k_b * 296.0;
    let grid: Vec<(f64, f64)> = (0..=200)
        .map(|k| kt * (2.0 + 0.1 * k as f64))
        .map(|s| (s, law.density(s).unwrap()))
        .collect();
    let slope = tail_slope_density(&grid).unwrap();
    assert!((slope * kt + 1.0).abs() < 1e-8);
}

#[test]
fn nonequilibrium_tail_slope() {
    let spec = RCCircuitSpec::experimental(88.0, 296.0);
    let law = rc_limit_law(&spec).unwrap();
    let lp = rc_eigenvalues(&spec).unwrap().lambda_plus;
    let grid: Vec<(f64, f64)> = (0..=400)
        .map(|k| lp * (10.0 + 0.05 * k as f64))
        .map(|s| (s, law.density(s).unwrap()))
        .collect();
    // ln f ≈ const − s/λ₊ − ½ ln s on this window
    let log_s: Vec<(f64, f64)> = grid.iter().map(|(s, _)| (*s, *s)).collect();
    let prefactor_slope = tail_slope_density(&log_s).unwrap();
    let predicted = -1.0 / lp - 0.5 * prefactor_slope;
    let raw = tail_slope_density(&grid).unwrap();
    assert!(
        (raw / predicted - 1.0).abs() < 2e-3,
        "{} vs {}",
        raw * lp,
        predicted * lp
    );
    let compensated: Vec<(f64, f64)> = grid.iter().map(|(s, f)| (*s, f * s.sqrt())).collect();
    let slope = tail_slope_density(&compensated).unwrap();
    assert!((slope * lp + 1.0).abs() < 1e-3, "{}", slope * lp);
}

#[test]
fn one_dimensional_law_is_bessel() {
    let law = VarianceGammaLaw::new(vec![2.0]).unwrap();
    let mass = 2.0
        * adaptive_gl(
            &|v: f64| {
                let s = v.exp();
                law.density(s).unwrap() * s
            },
            (1e-14f64).ln(),
            (200.0f64).ln(),
            1e-11,
            1e-15,
        );
    assert!((mass - 1.0).abs() < 1e-8);
    assert!(law.density(0.0).is_err());
}
