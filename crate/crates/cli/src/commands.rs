use harmonet::networks::{
    kinetic_observable, rc_eigenvalues, schur_theta, total_energy_observable, RCEigenvalues,
};
use harmonet::statlab::{histogram, ks_distance_vg, ldp_scan, sample_qt, EmpiricalSample};
use harmonet::vargamma::{VarianceGammaLaw, VgError};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Grid, Problem, RunConfig, Units};
use crate::output::{list, num, Csv, OutDir};
use crate::CliError;

fn problem(config: &RunConfig) -> Result<Problem, CliError> {
    config
        .spec
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("`{}` needs --spec", config.command)))?
        .resolve()
}

fn out_dir(config: &RunConfig) -> Result<OutDir, CliError> {
    let dir = config
        .out
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("`{}` needs --out", config.command)))?;
    OutDir::create(dir)
}

fn energy_unit(config: &RunConfig, problem: &Problem) -> Result<f64, CliError> {
    match config.units {
        Units::Si => Ok(1.0),
        Units::Reduced => problem.reduced_unit(),
    }
}

fn default_grid(law: &VarianceGammaLaw, unit: f64) -> Grid {
    let half = 10.0 * law.lambda_max() / unit;
    Grid {
        lo: -half,
        hi: half,
        points: 401,
    }
}

/// Density table in output units; points where the density diverges are
/// skipped and counted.
fn density_csv(law: &VarianceGammaLaw, grid: &Grid, unit: f64) -> Result<Csv, CliError> {
    let mut csv = Csv::new(&["s", "f"]);
    let scaled: Vec<f64> = law.lambdas().iter().map(|l| l / unit).collect();
    csv.meta("lambdas", list(&scaled))
        .meta("energy_unit", num(unit));
    if let Some(p) = law.two_dim_params() {
        csv.meta("epsilon", num(p.epsilon))
            .meta("theta", num(p.theta * unit));
    }
    let mut skipped = 0;
    let mut rows = Vec::new();
    for s in grid.values() {
        match law.density(s * unit) {
            Ok(f) => rows.push(vec![num(s), num(f * unit)]),
            Err(VgError::Divergent) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    csv.meta("skipped_divergent", skipped);
    for r in rows {
        csv.row(r);
    }
    Ok(csv)
}

/// Histogram of the sample next to the bin-averaged limit density.
fn histogram_csv(
    sample: &EmpiricalSample,
    law: &VarianceGammaLaw,
    grid: &Grid,
    unit: f64,
) -> Result<Csv, CliError> {
    let bins = grid.points - 1;
    let scaled: Vec<f64> = sample.values.iter().map(|q| q / unit).collect();
    let h = histogram(&scaled, bins, (grid.lo, grid.hi))?;
    let width = (grid.hi - grid.lo) / bins as f64;
    let mass = law.cdf(grid.hi * unit) - law.cdf(grid.lo * unit);
    let mut csv = Csv::new(&["center", "empirical", "limit"]);
    csv.meta("t", num(sample.t))
        .meta("count", sample.count())
        .meta("seed", sample.seed)
        .meta("workers", sample.workers)
        .meta("energy_unit", num(unit));
    for (c, d) in h {
        let p = law.cdf((c + 0.5 * width) * unit) - law.cdf((c - 0.5 * width) * unit);
        csv.row(vec![num(c), num(d), num(p / (mass * width))]);
    }
    Ok(csv)
}

#[derive(Serialize)]
struct MonteCarlo {
    t: f64,
    count: usize,
    seed: u64,
    workers: usize,
    mean: f64,
    std_dev: f64,
    zero_mean_4sigma: bool,
    ks_to_limit: f64,
}

fn monte_carlo(
    config: &RunConfig,
    problem: &Problem,
    t: f64,
) -> Result<(EmpiricalSample, MonteCarlo), CliError> {
    let sample = sample_qt(
        problem.model(),
        problem.observable(),
        t,
        config.count,
        config.seed,
        config.workers,
    )?;
    let law = problem.limit_law()?;
    let summary = MonteCarlo {
        t,
        count: sample.count(),
        seed: sample.seed,
        workers: sample.workers,
        mean: sample.mean(),
        std_dev: sample.std_dev(),
        zero_mean_4sigma: sample.passes_zero_mean(4.0),
        ks_to_limit: ks_distance_vg(&sample, &law)?,
    };
    Ok((sample, summary))
}

fn law_summary(law: &VarianceGammaLaw) -> Value {
    json!({
        "lambdas": law.lambdas(),
        "lambda_max": law.lambda_max(),
        "rate_slope": 1.0 / law.lambda_max(),
    })
}

pub fn vg_density(config: &RunConfig) -> Result<(), CliError> {
    let problem = problem(config)?;
    let mut out = out_dir(config)?;
    let law = problem.limit_law()?;
    let unit = energy_unit(config, &problem)?;
    let grid = config.grid.unwrap_or_else(|| default_grid(&law, unit));
    let mut csv = density_csv(&law, &grid, unit)?;
    csv.meta("source", problem.kind());
    out.csv("density.csv", &csv)?;
    out.manifest(config)
}

#[derive(Serialize)]
struct RcReport {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    m_stat: Vec<Vec<f64>>,
    spectral_abscissa: f64,
    mixing_time: f64,
    controllable: bool,
    lyapunov_residual: f64,
    closed_form: RCEigenvalues,
    numeric_lambdas: Vec<f64>,
    monte_carlo: Option<MonteCarlo>,
}

/// Report in SI units; curves in units of `k_B T2` unless `--units si`.
pub fn rc(config: &RunConfig) -> Result<(), CliError> {
    let problem = problem(config)?;
    let Problem::Rc { spec, model, .. } = &problem else {
        return Err(CliError::Config("`rc` needs an `rc_circuit` spec".into()));
    };
    let mut out = out_dir(config)?;
    let law = problem.limit_law()?;
    let unit = match config.units {
        Units::Si => 1.0,
        Units::Reduced => spec.k_b * spec.t2,
    };
    let grid = config.grid.unwrap_or_else(|| default_grid(&law, unit));
    out.csv("density.csv", &density_csv(&law, &grid, unit)?)?;

    let mut mc = None;
    if let Some(t) = config.t {
        let (sample, summary) = monte_carlo(config, &problem, t)?;
        let hist_grid = Grid {
            points: grid.points.min(61),
            ..grid
        };
        out.csv(
            "histogram.csv",
            &histogram_csv(&sample, &law, &hist_grid, unit)?,
        )?;
        mc = Some(summary);
    }
    let report = RcReport {
        a: model.a().to_rows(),
        b: model.b().to_rows(),
        m_stat: model.m_stat().matrix().to_rows(),
        spectral_abscissa: model.spectral_abscissa(),
        mixing_time: model.mixing_time(),
        controllable: model.is_controllable(),
        lyapunov_residual: model.lyapunov_residual(),
        closed_form: rc_eigenvalues(spec)?,
        numeric_lambdas: law.lambdas().to_vec(),
        monte_carlo: mc,
    };
    out.json("report.json", &report)?;
    out.manifest(config)
}

pub fn network(config: &RunConfig) -> Result<(), CliError> {
    let problem = problem(config)?;
    let Problem::Network {
        spec,
        sel,
        choice,
        model,
        ..
    } = &problem
    else {
        return Err(CliError::Config("`network` needs a `network` spec".into()));
    };
    let mut out = out_dir(config)?;
    let kinetic = model.limit_law(&kinetic_observable(spec, sel)?)?;
    let total = model.limit_law(&total_energy_observable(spec, sel)?)?;
    let theta = schur_theta(spec, sel)?;
    let mut report = json!({
        "vertices": spec.vertices(),
        "subnetwork": sel.vertices(),
        "observable": choice,
        "equilibrium": spec.is_equilibrium(),
        "spectral_abscissa": model.spectral_abscissa(),
        "mixing_time": model.mixing_time(),
        "warning": model.warning(),
        "schur_theta": theta,
        "kinetic": law_summary(&kinetic),
        "total": law_summary(&total),
    });
    if spec.is_equilibrium() {
        let kt = spec.k_b * spec.temperatures[0];
        report["equilibrium_prediction"] = json!({
            "k_b_t": kt,
            "total_lambda_max": kt / (1.0 - theta),
        });
    }

    let law = problem.limit_law()?;
    let unit = energy_unit(config, &problem)?;
    let grid = config.grid.unwrap_or_else(|| default_grid(&law, unit));
    out.csv("density.csv", &density_csv(&law, &grid, unit)?)?;
    if let Some(t) = config.t {
        let (sample, summary) = monte_carlo(config, &problem, t)?;
        let hist_grid = Grid {
            points: grid.points.min(61),
            ..grid
        };
        out.csv(
            "histogram.csv",
            &histogram_csv(&sample, &law, &hist_grid, unit)?,
        )?;
        report["monte_carlo"] = serde_json::to_value(summary).expect("plain data");
    }
    out.json("report.json", &report)?;
    out.manifest(config)
}

pub fn ldp(config: &RunConfig) -> Result<(), CliError> {
    let problem = problem(config)?;
    let window = config
        .window
        .ok_or_else(|| CliError::Config("`ldp` needs --window a,b".into()))?;
    let t_list = config
        .t_list
        .as_ref()
        .ok_or_else(|| CliError::Config("`ldp` needs --t-list".into()))?;
    let mut out = out_dir(config)?;
    let unit = energy_unit(config, &problem)?;
    let est = ldp_scan(
        problem.model(),
        problem.observable(),
        (window.0 * unit, window.1 * unit),
        t_list,
        config.count as u64,
        config.seed,
        config.workers,
    )?;
    let mut csv = Csv::new(&[
        "t",
        "hits",
        "count",
        "estimate",
        "lower",
        "upper",
        "lower_bound_only",
        "theoretical",
    ]);
    csv.meta("window", format!("{},{}", num(window.0), num(window.1)))
        .meta("energy_unit", num(unit))
        .meta("lambda_max", num(est.lambda_max / unit))
        .meta("seed", config.seed)
        .meta("workers", config.workers);
    if let Some(a) = &est.advisory {
        csv.meta("advisory", a);
    }
    for e in &est.entries {
        csv.row(vec![
            num(e.t),
            e.hits.to_string(),
            e.count.to_string(),
            num(e.estimate),
            num(e.lower),
            num(e.upper),
            e.lower_bound_only.to_string(),
            num(est.theoretical),
        ]);
    }
    out.csv("ldp.csv", &csv)?;
    out.manifest(config)
}
