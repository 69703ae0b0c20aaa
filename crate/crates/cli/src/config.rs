//! Spec documents and the resolved run configuration.

use std::path::{Path, PathBuf};

use harmonet::linalg::{psd_factor, Matrix, SymMatrix};
use harmonet::networks::{
    kinetic_observable, langevin_model, rc_heat_observable, rc_model, total_energy_observable,
    NetworkSpec, RCCircuitSpec, SubnetworkSelection, BOLTZMANN,
};
use harmonet::ou::{
    build_model, sanity_model, LinearSDEModel, ObservableKind, QuadraticObservable,
};
use harmonet::vargamma::{make_vg, VarianceGammaLaw};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Si,
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableChoice {
    #[default]
    Kinetic,
    Total,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub units: Units,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rc_circuit: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vg: Option<VgSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub spec: Value,
    pub subnetwork: Vec<usize>,
    #[serde(default)]
    pub observable: ObservableChoice,
}

/// Either the eigenvalues directly or the pair `(L, M)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VgSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<Vec<f64>>>,
}

/// The system a spec describes, with everything needed to sample `Q_t`.
pub enum Problem {
    Vg {
        law: VarianceGammaLaw,
        model: LinearSDEModel,
        obs: QuadraticObservable,
    },
    Rc {
        spec: RCCircuitSpec,
        model: LinearSDEModel,
        obs: QuadraticObservable,
    },
    Network {
        spec: NetworkSpec,
        sel: SubnetworkSelection,
        choice: ObservableChoice,
        model: LinearSDEModel,
        obs: QuadraticObservable,
    },
}

impl Problem {
    pub fn model(&self) -> &LinearSDEModel {
        match self {
            Problem::Vg { model, .. }
            | Problem::Rc { model, .. }
            | Problem::Network { model, .. } => model,
        }
    }

    pub fn observable(&self) -> &QuadraticObservable {
        match self {
            Problem::Vg { obs, .. } | Problem::Rc { obs, .. } | Problem::Network { obs, .. } => obs,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Vg { .. } => "vg",
            Problem::Rc { .. } => "rc_circuit",
            Problem::Network { .. } => "network",
        }
    }

    pub fn limit_law(&self) -> Result<VarianceGammaLaw, CliError> {
        match self {
            Problem::Vg { law, .. } => Ok(law.clone()),
            _ => Ok(self.model().limit_law(self.observable())?),
        }
    }

    /// Energy unit of the reduced mode: `k_B T2` for circuits, `k_B max T`
    /// for networks and `λ_max` for bare laws.
    pub fn reduced_unit(&self) -> Result<f64, CliError> {
        Ok(match self {
            Problem::Vg { law, .. } => law.lambda_max(),
            Problem::Rc { spec, .. } => spec.k_b * spec.t2,
            Problem::Network { spec, .. } => {
                spec.k_b * spec.temperatures.iter().fold(0.0f64, |a, b| a.max(*b))
            }
        })
    }
}

fn matrix(rows: &[Vec<f64>], name: &str) -> Result<Matrix, CliError> {
    Matrix::from_rows(rows).map_err(|e| CliError::Config(format!("vg.{name}: {e}")))
}

/// Fills in `k_b = 1` for reduced-unit documents that leave it out.
fn with_kb(mut v: Value, units: Units) -> Value {
    if let Value::Object(map) = &mut v {
        if !map.contains_key("k_b") {
            let kb = match units {
                Units::Si => BOLTZMANN,
                Units::Reduced => 1.0,
            };
            map.insert("k_b".into(), Value::from(kb));
        }
    }
    v
}

fn parse_section<T: serde::de::DeserializeOwned>(v: Value, name: &str) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Config(format!("{name}: {e}")))
}

impl SpecDocument {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn resolve(&self) -> Result<Problem, CliError> {
        let present = [
            self.network.is_some(),
            self.rc_circuit.is_some(),
            self.vg.is_some(),
        ];
        if present.iter().filter(|p| **p).count() != 1 {
            return Err(CliError::Config(
                "the spec needs exactly one of `network`, `rc_circuit`, `vg`".into(),
            ));
        }
        if let Some(rc) = &self.rc_circuit {
            let spec: RCCircuitSpec = parse_section(with_kb(rc.clone(), self.units), "rc_circuit")?;
            spec.validate()?;
            return Ok(Problem::Rc {
                model: rc_model(&spec)?,
                obs: rc_heat_observable(&spec)?,
                spec,
            });
        }
        if let Some(net) = &self.network {
            let spec: NetworkSpec =
                parse_section(with_kb(net.spec.clone(), self.units), "network.spec")?;
            spec.validate()?;
            let sel = SubnetworkSelection::new(&spec, net.subnetwork.clone())?;
            let obs = match net.observable {
                ObservableChoice::Kinetic => kinetic_observable(&spec, &sel)?,
                ObservableChoice::Total => total_energy_observable(&spec, &sel)?,
            };
            return Ok(Problem::Network {
                model: langevin_model(&spec)?,
                obs,
                choice: net.observable,
                spec,
                sel,
            });
        }
        let vg = self.vg.as_ref().expect("checked above");
        match (&vg.lambdas, &vg.l, &vg.m) {
            (Some(lambdas), None, None) => {
                let law = VarianceGammaLaw::new(lambdas.clone())?;
                let (model, obs) = sanity_model(law.lambdas())?;
                Ok(Problem::Vg { law, model, obs })
            }
            (None, Some(l), Some(m)) => {
                let l = SymMatrix::new(matrix(l, "l")?)
                    .map_err(|e| CliError::Config(format!("vg.l: {e}")))?;
                let m = SymMatrix::new(matrix(m, "m")?)
                    .map_err(|e| CliError::Config(format!("vg.m: {e}")))?;
                l.require_positive()
                    .map_err(|e| CliError::Config(format!("vg.l: {e}")))?;
                m.require_positive()
                    .map_err(|e| CliError::Config(format!("vg.m: {e}")))?;
                let law = make_vg(&l, &m)?;
                // any dynamics with stationary covariance M will do
                let n = m.dim();
                let b = psd_factor(&m, 0.0)?.scale(2f64.sqrt());
                let model = build_model(Matrix::identity(n).scale(-1.0), b)?;
                let obs = QuadraticObservable::new((0..n).collect(), l, ObservableKind::Custom)?;
                Ok(Problem::Vg { law, model, obs })
            }
            _ => Err(CliError::Config(
                "vg needs either `lambdas` or both `l` and `m`".into(),
            )),
        }
    }
}

/// Uniform grid `lo:hi:n` in output units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("grid must look like lo:hi:n (got {s})"));
        };
        let lo: f64 = lo.parse().map_err(|e| format!("grid lo: {e}"))?;
        let hi: f64 = hi.parse().map_err(|e| format!("grid hi: {e}"))?;
        let points: usize = n.parse().map_err(|e| format!("grid n: {e}"))?;
        if !(lo < hi) || points < 2 || !lo.is_finite() || !hi.is_finite() {
            return Err(format!("grid needs lo < hi and n >= 2 (got {s})"));
        }
        Ok(Grid { lo, hi, points })
    }
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| self.lo + k as f64 * step)
            .collect()
    }
}

/// An open interval `a,b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window(pub f64, pub f64);

impl std::str::FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("window must look like a,b (got {s})"))?;
        let a: f64 = a.trim().parse().map_err(|e| format!("window a: {e}"))?;
        let b: f64 = b.trim().parse().map_err(|e| format!("window b: {e}"))?;
        if !(a < b) {
            return Err(format!("window needs a < b (got {s})"));
        }
        Ok(Window(a, b))
    }
}

/// Everything a run used, echoed into `manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub spec_path: Option<PathBuf>,
    pub spec: Option<SpecDocument>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub count: usize,
    pub t: Option<f64>,
    pub t_list: Option<Vec<f64>>,
    pub grid: Option<Grid>,
    pub window: Option<Window>,
    pub units: Units,
    pub workers: usize,
    pub tol_scale: f64,
    pub version: &'static str,
}
