use rayon::prelude::*;
use serde::Serialize;

use super::{worker_chunks, worker_rng, Result, StatError, MIN_LDP_HITS};
use crate::ou::{LinearSDEModel, PairSampler, QuadraticObservable};

/// One time of an LDP scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdpEntry {
    pub t: f64,
    pub hits: u64,
    pub count: u64,
    /// `(1/t) ln(hits/count)`; `−∞` when there are no hits.
    pub estimate: f64,
    /// Wilson 95% interval of the probability, mapped through `(1/t) ln`.
    pub lower: f64,
    pub upper: f64,
    /// No hits: only the Wilson upper bound carries information.
    pub lower_bound_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LDPEstimate {
    pub window: (f64, f64),
    pub entries: Vec<LdpEntry>,
    /// `−inf_{θ∈O} |θ|/λ_n`.
    pub theoretical: f64,
    pub lambda_max: f64,
    /// Set when the largest time has fewer than the advisory number of hits.
    pub advisory: Option<String>,
}

impl LDPEstimate {
    pub fn t_list(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.t).collect()
    }

    /// Entry at the largest time with at least `min_hits` hits.
    pub fn last_reliable(&self, min_hits: u64) -> Option<&LdpEntry> {
        self.entries.iter().rev().find(|e| e.hits >= min_hits)
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(hits: u64, count: u64, z: f64) -> (f64, f64) {
    let n = count as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// `−inf_{θ∈(a,b)} |θ|/λ`.
pub fn theoretical_ldp_limit(window: (f64, f64), lambda_max: f64) -> f64 {
    let (a, b) = window;
    if a >= 0.0 {
        -a / lambda_max
    } else if b <= 0.0 {
        b / lambda_max
    } else {
        0.0
    }
}

/// Empirical `(1/t) ln P(Q_t ∈ tO)` for each `t`, from `count` exact draws
/// per time. Each time uses its own seed offset so entries are independent.
pub fn ldp_scan(
    model: &LinearSDEModel,
    obs: &QuadraticObservable,
    window: (f64, f64),
    t_list: &[f64],
    count: u64,
    seed: u64,
    workers: usize,
) -> Result<LDPEstimate> {
    let (a, b) = window;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(StatError::InvalidWindow(a, b));
    }
    if workers == 0 {
        return Err(StatError::NoWorkers);
    }
    if count == 0 {
        return Err(StatError::Empty);
    }
    if t_list.iter().any(|t| !(*t > 0.0)) || t_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(StatError::InvalidWindow(
            t_list.first().copied().unwrap_or(f64::NAN),
            t_list.last().copied().unwrap_or(f64::NAN),
        ));
    }
    let lambda_max = model.limit_law(obs)?.lambda_max();
    let n = model.dim();

    let mut entries = Vec::with_capacity(t_list.len());
    for (k, &t) in t_list.iter().enumerate() {
        let sampler = PairSampler::new(model, t)?;
        let seed_t = seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let (lo, hi) = (a * t, b * t);
        let hits: u64 = worker_chunks(count as usize, workers)
            .into_par_iter()
            .enumerate()
            .map(|(w, chunk)| {
                let mut rng = worker_rng(seed_t, w);
                let (mut x0, mut xt, mut scratch) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
                let mut hits = 0u64;
                for _ in 0..chunk {
                    sampler.draw_into(&mut rng, &mut x0, &mut xt, &mut scratch);
                    let q = obs.increment(&x0, &xt);
                    hits += u64::from(q > lo && q < hi);
                }
                hits
            })
            .sum();
        let (p_lo, p_hi) = wilson_interval(hits, count, 1.96);
        entries.push(LdpEntry {
            t,
            hits,
            count,
            estimate: (hits as f64 / count as f64).ln() / t,
            lower: p_lo.ln() / t,
            upper: p_hi.ln() / t,
            lower_bound_only: hits == 0,
        });
    }

    let advisory = entries.last().filter(|e| e.hits < MIN_LDP_HITS).map(|e| {
        format!(
            "only {} hits at t = {}; increase count for a reliable estimate",
            e.hits, e.t
        )
    });
    Ok(LDPEstimate {
        window,
        entries,
        theoretical: theoretical_ldp_limit(window, lambda_max),
        lambda_max,
        advisory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ou::sanity_model;

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 100, 1.96);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036994).abs() < 1e-5);
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!((lo - 0.40383).abs() < 1e-4 && (hi - 0.59617).abs() < 1e-4);
    }

    #[test]
    fn theoretical_limits() {
        assert_eq!(theoretical_ldp_limit((1.0, 2.0), 2.0), -0.5);
        assert_eq!(theoretical_ldp_limit((-3.0, -1.0), 2.0), -0.5);
        assert_eq!(theoretical_ldp_limit((-1.0, 2.0), 2.0), 0.0);
    }

    #[test]
    fn zero_hits_are_flagged() {
        let (model, obs) = sanity_model(&[1.0, 1.0]).unwrap();
        let est = ldp_scan(&model, &obs, (50.0, 60.0), &[1.0, 2.0], 1000, 3, 2).unwrap();
        assert!(est
            .entries
            .iter()
            .all(|e| e.lower_bound_only && e.estimate == f64::NEG_INFINITY));
        assert!(est.advisory.is_some());
        assert!(ldp_scan(&model, &obs, (2.0, 1.0), &[1.0], 10, 3, 2).is_err());
        assert!(ldp_scan(&model, &obs, (1.0, 2.0), &[2.0, 1.0], 10, 3, 2).is_err());
    }

    #[test]
    fn window_around_zero_tends_to_zero() {
        let (model, obs) = sanity_model(&[1.0, 1.0]).unwrap();
        let est = ldp_scan(&model, &obs, (-1.0, 1.0), &[2.0, 8.0], 20_000, 9, 4).unwrap();
        let last = est.entries.last().unwrap();
        assert!(last.estimate <= 0.0 && last.estimate > -0.05);
        assert_eq!(est.theoretical, 0.0);
    }
}
