//! Monte Carlo statistics of `Q_t`: sampling, KS distances to the limit law,
//! large-deviation scans and tail slopes.
//!
//! Parallel sampling splits the work over `workers` independent ChaCha8
//! streams derived from one seed (stream index = worker index), so a run is
//! reproducible bit for bit given `(seed, workers)`.

mod ldp;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ou::{LinearSDEModel, OuError, PairSampler, QuadraticObservable};
use crate::vargamma::{VarianceGammaLaw, VgError};

pub use ldp::{ldp_scan, theoretical_ldp_limit, wilson_interval, LDPEstimate, LdpEntry};

/// Hits at the largest time below which an LDP scan carries an advisory.
pub const MIN_LDP_HITS: u64 = 30;
/// Minimum number of points for a tail-slope fit.
pub const MIN_TAIL_POINTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatError {
    #[error("sample is empty")]
    Empty,
    #[error("tail window holds {found} points; at least {needed} are needed")]
    TooFewTailPoints { found: usize, needed: usize },
    #[error("invalid window ({0}, {1})")]
    InvalidWindow(f64, f64),
    #[error("histogram needs at least one bin and a nonempty range")]
    InvalidBins,
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error(transparent)]
    Ou(#[from] OuError),
    #[error(transparent)]
    Vg(#[from] VgError),
}

pub type Result<T> = std::result::Result<T, StatError>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalSample {
    pub values: Vec<f64>,
    pub t: f64,
    pub seed: u64,
    pub workers: usize,
}

impl EmpiricalSample {
    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        let n = self.values.len() as f64;
        (self.values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    }

    /// `|mean| ≤ z · sd / √n`.
    pub fn passes_zero_mean(&self, z: f64) -> bool {
        self.mean().abs() <= z * self.std_dev() / (self.count() as f64).sqrt()
    }
}

/// Stream for one worker.
pub fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64);
    rng
}

/// Sizes of the per-worker chunks of `count` draws.
pub fn worker_chunks(count: usize, workers: usize) -> Vec<usize> {
    (0..workers)
        .map(|w| count / workers + usize::from(w < count % workers))
        .collect()
}

/// Runs `job(rng, chunk)` on every worker and concatenates in worker order.
pub fn parallel_draws<T: Send>(
    count: usize,
    seed: u64,
    workers: usize,
    job: impl Fn(&mut ChaCha8Rng, usize) -> Vec<T> + Sync,
) -> Result<Vec<T>> {
    if workers == 0 {
        return Err(StatError::NoWorkers);
    }
    let parts: Vec<Vec<T>> = worker_chunks(count, workers)
        .into_par_iter()
        .enumerate()
        .map(|(w, chunk)| job(&mut worker_rng(seed, w), chunk))
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

/// `count` exact draws of `X_t·L X_t − X_0·L X_0` under the stationary law.
pub fn sample_qt(
    model: &LinearSDEModel,
    obs: &QuadraticObservable,
    t: f64,
    count: usize,
    seed: u64,
    workers: usize,
) -> Result<EmpiricalSample> {
    let sampler = PairSampler::new(model, t)?;
    model.limit_law(obs)?;
    let n = model.dim();
    let values = parallel_draws(count, seed, workers, |rng, chunk| {
        let (mut x0, mut xt, mut scratch) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        (0..chunk)
            .map(|_| {
                sampler.draw_into(rng, &mut x0, &mut xt, &mut scratch);
                obs.increment(&x0, &xt)
            })
            .collect()
    })?;
    Ok(EmpiricalSample {
        values,
        t,
        seed,
        workers,
    })
}

/// Draws from the limit law itself (`t = ∞`).
pub fn sample_vg(
    law: &VarianceGammaLaw,
    count: usize,
    seed: u64,
    workers: usize,
) -> Result<EmpiricalSample> {
    let values = parallel_draws(count, seed, workers, |rng, chunk| law.sample(rng, chunk))?;
    Ok(EmpiricalSample {
        values,
        t: f64::INFINITY,
        seed,
        workers,
    })
}

/// `sup_s |F_n(s) − F(s)|`.
pub fn ks_distance(values: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if values.is_empty() {
        return Err(StatError::Empty);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// KS distance to a variance-gamma law, through a tabulated CDF.
pub fn ks_distance_vg(sample: &EmpiricalSample, law: &VarianceGammaLaw) -> Result<f64> {
    let table = law.cdf_table(60.0, 3000);
    ks_distance(&sample.values, |s| table.eval(s))
}

/// Survival function of the asymptotic Kolmogorov distribution,
/// `P(√n D_n > c) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²c²}`.
pub fn kolmogorov_survival(c: f64) -> f64 {
    if c <= 0.0 {
        return 1.0;
    }
    if c < 0.3 {
        // the alternating series converges slowly here; the CDF is below 1e-8
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * c * c).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `c_α / √n` with `P(√n D_n > c_α) = α` asymptotically.
pub fn ks_critical_value(alpha: f64, n: usize) -> f64 {
    let (mut lo, mut hi) = (0.3, 5.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_survival(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / (n as f64).sqrt()
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Least-squares slope of `ln f(s)` against `s` over the given `(s, f)` points.
pub fn tail_slope_density(points: &[(f64, f64)]) -> Result<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, f)| *f > 0.0 && f.is_finite())
        .map(|&(s, f)| (s, f.ln()))
        .collect();
    if logs.len() < MIN_TAIL_POINTS {
        return Err(StatError::TooFewTailPoints {
            found: logs.len(),
            needed: MIN_TAIL_POINTS,
        });
    }
    Ok(least_squares_slope(&logs))
}

/// Least-squares slope of the log empirical survival function `ln P(Q > s)`
/// against `s`, over the sample points in `[lo, hi]` (upper tail).
pub fn tail_slope_sample(values: &[f64], lo: f64, hi: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(StatError::InvalidWindow(lo, hi));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let points: Vec<(f64, f64)> = sorted
        .iter()
        .enumerate()
        .filter(|(_, &x)| x >= lo && x <= hi)
        .map(|(i, &x)| (x, ((n - i as f64 - 0.5) / n).ln()))
        .collect();
    if points.len() < MIN_TAIL_POINTS {
        return Err(StatError::TooFewTailPoints {
            found: points.len(),
            needed: MIN_TAIL_POINTS,
        });
    }
    Ok(least_squares_slope(&points))
}

/// Bin centres and densities, normalized over the values inside `range`.
pub fn histogram(values: &[f64], bins: usize, range: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = range;
    if bins == 0 || !(lo < hi) {
        return Err(StatError::InvalidBins);
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut inside = 0usize;
    for &x in values {
        if x >= lo && x <= hi {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
            inside += 1;
        }
    }
    if inside == 0 {
        return Err(StatError::Empty);
    }
    Ok(counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            (
                lo + (k as f64 + 0.5) * width,
                c as f64 / (inside as f64 * width),
            )
        })
        .collect())
}
