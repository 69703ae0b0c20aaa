//! Stationary linear SDEs `dZ = AZ dt + B dW`.
//!
//! The stationary covariance solves `AM + MAᵀ + BBᵀ = 0`, the lagged
//! covariance is `Δ(t) = ⟨Z_t Z_0ᵀ⟩ = e^{tA} M`, and all sampling is exact:
//! given `Z_0`, `Z_t = e^{tA} Z_0 + ξ` with `ξ ~ N(0, M − e^{tA} M e^{tAᵀ})`.

mod finite_time;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{
    expm, is_controllable, solve_lyapunov, spectral_abscissa, ControllabilityCertificate,
    LinalgError, Matrix, SymMatrix,
};
use crate::vargamma::{make_vg, VarianceGammaLaw, VgError};

pub use finite_time::{finite_time_qt_charfn, finite_time_qt_law, FiniteTimeQtLaw};

/// Negative eigenvalues of conditional covariances down to this fraction of
/// `‖M‖_max` are treated as rounding and clamped.
pub const PSD_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OuError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Vg(#[from] VgError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("time must be finite and >= 0 (got {0})")]
    InvalidTime(f64),
    #[error("time grid must be strictly increasing (entry {index})")]
    NonAscendingGrid { index: usize },
    #[error("stationary covariance is singular; the pair (A, B) is not controllable")]
    Degenerate,
    #[error("conditional covariance has eigenvalue {min_eigenvalue:e}, below -{PSD_CLAMP:e}·‖M‖")]
    Conditioning { min_eigenvalue: f64 },
    #[error("observable index {index} is outside the state dimension {dim}")]
    ObservableIndex { index: usize, dim: usize },
}

pub type Result<T> = std::result::Result<T, OuError>;

#[derive(Debug, Clone, Serialize)]
pub struct LinearSDEModel {
    a: Matrix,
    b: Matrix,
    m_stat: SymMatrix,
    abscissa: f64,
    controllability: ControllabilityCertificate,
}

/// Validates the drift, solves for the stationary covariance and records the
/// stability and controllability certificates. Uncontrollable pairs are
/// accepted; see [`LinearSDEModel::warning`].
pub fn build_model(a: Matrix, b: Matrix) -> Result<LinearSDEModel> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        }
        .into());
    }
    if b.rows() != a.rows() {
        return Err(OuError::Shape(format!(
            "A is {0}x{0} but B has {1} rows",
            a.rows(),
            b.rows()
        )));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(LinalgError::NonFinite.into());
    }
    let abscissa = spectral_abscissa(&a)?;
    if abscissa >= 0.0 {
        return Err(LinalgError::Unstable { abscissa }.into());
    }
    let q = SymMatrix::symmetrized(&(&b * &b.transpose()));
    let m_stat = solve_lyapunov(&a, &q)?;
    let controllability = is_controllable(&a, &b)?;
    Ok(LinearSDEModel {
        a,
        b,
        m_stat,
        abscissa,
        controllability,
    })
}

/// Like [`build_model`], but the stationary covariance is solved for in the
/// coordinates `y = T x`, where the caller supplies `a_y = T a T⁻¹`,
/// `b_y = T b` and `T⁻¹`; then `M = T⁻¹ M_y T⁻ᵀ`. Useful when `b bᵀ` loses
/// accuracy in floating point but `b_y` is exact (e.g. diagonal).
pub fn build_model_via(
    a: Matrix,
    b: Matrix,
    a_y: &Matrix,
    b_y: &Matrix,
    t_inv: &Matrix,
) -> Result<LinearSDEModel> {
    let model = build_model(a, b)?;
    let q_y = SymMatrix::symmetrized(&(b_y * &b_y.transpose()));
    let m_y = solve_lyapunov(a_y, &q_y)?;
    let m_stat = m_y.congruence(&t_inv.transpose());
    let residual = lyapunov_residual_of(&model.a, &m_stat, &model.b);
    let tolerance = 1e-10 * (&model.b * &model.b.transpose()).max_abs();
    if residual > tolerance {
        return Err(LinalgError::Residual {
            residual,
            tolerance,
        }
        .into());
    }
    Ok(LinearSDEModel { m_stat, ..model })
}

fn lyapunov_residual_of(a: &Matrix, m: &SymMatrix, b: &Matrix) -> f64 {
    let am = a * m.matrix();
    let bb = b * &b.transpose();
    (&(&am + &am.transpose()) + &bb).max_abs()
}

/// Model and observable whose limit law has the given eigenvalues:
/// `A = −I`, `B = √2 I` (so `M = I`) and `L = diag(λ_j / 2)`.
pub fn sanity_model(lambdas: &[f64]) -> Result<(LinearSDEModel, QuadraticObservable)> {
    let n = lambdas.len();
    let model = build_model(
        Matrix::identity(n).scale(-1.0),
        Matrix::identity(n).scale(2f64.sqrt()),
    )?;
    let l = SymMatrix::from_diag(&lambdas.iter().map(|x| 0.5 * x).collect::<Vec<_>>());
    let obs = QuadraticObservable::new((0..n).collect(), l, ObservableKind::Custom)?;
    Ok((model, obs))
}

impl LinearSDEModel {
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn m_stat(&self) -> &SymMatrix {
        &self.m_stat
    }

    pub fn spectral_abscissa(&self) -> f64 {
        self.abscissa
    }

    pub fn controllability(&self) -> &ControllabilityCertificate {
        &self.controllability
    }

    pub fn is_controllable(&self) -> bool {
        self.controllability.controllable
    }

    /// `1 / |spectral abscissa|`.
    pub fn mixing_time(&self) -> f64 {
        1.0 / self.abscissa.abs()
    }

    pub fn warning(&self) -> Option<String> {
        (!self.controllability.controllable).then(|| {
            format!(
                "(A, B) is not controllable (Krylov rank {} < {}); the stationary covariance is only semidefinite",
                self.controllability.rank, self.controllability.dim
            )
        })
    }

    /// `‖AM + MAᵀ + BBᵀ‖_max`.
    pub fn lyapunov_residual(&self) -> f64 {
        lyapunov_residual_of(&self.a, &self.m_stat, &self.b)
    }

    /// Variance-gamma limit of `Q_t` for the observable.
    pub fn limit_law(&self, obs: &QuadraticObservable) -> Result<VarianceGammaLaw> {
        obs.check_dim(self.dim())?;
        Ok(make_vg(obs.l(), &self.m_stat.principal(obs.support()))?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagCovariance {
    pub t: f64,
    /// `⟨Z_t Z_0ᵀ⟩ = e^{tA} M`.
    pub delta: Matrix,
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(OuError::InvalidTime(t))
    }
}

pub fn lag_cov(model: &LinearSDEModel, t: f64) -> Result<LagCovariance> {
    check_time(t)?;
    let prop = expm(&model.a.scale(t))?;
    Ok(LagCovariance {
        t,
        delta: &prop * model.m_stat.matrix(),
    })
}

/// Symmetric factor of `M − P M Pᵀ` for the propagator `P = e^{hA}`.
fn step_factor(model: &LinearSDEModel, prop: &Matrix) -> Result<Matrix> {
    let m = model.m_stat.matrix();
    let pmp = &(prop * m) * &prop.transpose();
    let cond = SymMatrix::symmetrized(&(m - &pmp));
    let min = cond.eigen().values.first().copied().unwrap_or(0.0);
    if min < -PSD_CLAMP * m.max_abs() {
        return Err(OuError::Conditioning {
            min_eigenvalue: min,
        });
    }
    Ok(cond.map_spectrum(|x| x.max(0.0).sqrt()).into_matrix())
}

fn stationary_factor(model: &LinearSDEModel) -> Matrix {
    model
        .m_stat
        .map_spectrum(|x| x.max(0.0).sqrt())
        .into_matrix()
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
}

fn mul_add(m: &Matrix, x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o += m.row(i).iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// Exact sampler of `(Z_0, Z_t)` under the stationary law.
#[derive(Debug, Clone)]
pub struct PairSampler {
    t: f64,
    stationary: Matrix,
    propagator: Matrix,
    conditional: Matrix,
}

impl PairSampler {
    pub fn new(model: &LinearSDEModel, t: f64) -> Result<Self> {
        check_time(t)?;
        if !model.is_controllable() {
            return Err(OuError::Degenerate);
        }
        let propagator = expm(&model.a.scale(t))?;
        let conditional = step_factor(model, &propagator)?;
        Ok(Self {
            t,
            stationary: stationary_factor(model),
            propagator,
            conditional,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.propagator.rows()
    }

    /// Fills `x0` and `xt`; `scratch` must have the state dimension.
    pub fn draw_into<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        x0: &mut [f64],
        xt: &mut [f64],
        scratch: &mut [f64],
    ) {
        gaussian(rng, scratch);
        x0.fill(0.0);
        mul_add(&self.stationary, scratch, x0);
        xt.fill(0.0);
        mul_add(&self.propagator, x0, xt);
        gaussian(rng, scratch);
        mul_add(&self.conditional, scratch, xt);
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        let (mut x0, mut xt, mut scratch) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        self.draw_into(rng, &mut x0, &mut xt, &mut scratch);
        (x0, xt)
    }
}

pub fn sample_stationary_pair<R: Rng + ?Sized>(
    model: &LinearSDEModel,
    t: f64,
    rng: &mut R,
    count: usize,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let sampler = PairSampler::new(model, t)?;
    Ok((0..count).map(|_| sampler.draw(rng)).collect())
}

/// Exact skeleton of a stationary path on an increasing time grid.
pub fn sample_path<R: Rng + ?Sized>(
    model: &LinearSDEModel,
    t_grid: &[f64],
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    for (i, &t) in t_grid.iter().enumerate() {
        check_time(t)?;
        if i > 0 && t <= t_grid[i - 1] {
            return Err(OuError::NonAscendingGrid { index: i });
        }
    }
    if !model.is_controllable() {
        return Err(OuError::Degenerate);
    }
    let n = model.dim();
    let mut path = Vec::with_capacity(t_grid.len());
    if t_grid.is_empty() {
        return Ok(path);
    }
    let mut scratch = vec![0.0; n];
    let mut state = vec![0.0; n];
    gaussian(rng, &mut scratch);
    mul_add(&stationary_factor(model), &scratch, &mut state);
    path.push(state.clone());

    let mut cached: Option<(f64, Matrix, Matrix)> = None;
    for w in t_grid.windows(2) {
        let h = w[1] - w[0];
        let reuse = matches!(&cached, Some((hc, _, _)) if (hc - h).abs() <= 1e-12 * h);
        if !reuse {
            let prop = expm(&model.a.scale(h))?;
            let factor = step_factor(model, &prop)?;
            cached = Some((h, prop, factor));
        }
        let (_, prop, factor) = cached.as_ref().expect("step cached");
        let mut next = vec![0.0; n];
        mul_add(prop, &state, &mut next);
        gaussian(rng, &mut scratch);
        mul_add(factor, &scratch, &mut next);
        state = next;
        path.push(state.clone());
    }
    Ok(path)
}

/// Which physical quantity an observable represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableKind {
    Kinetic,
    Total,
    RcHeat,
    Custom,
}

/// `x ↦ x_S · L x_S` for a support `S` of state indices and `L > 0` on it.
#[derive(Debug, Clone, Serialize)]
pub struct QuadraticObservable {
    support: Vec<usize>,
    l: SymMatrix,
    kind: ObservableKind,
}

impl QuadraticObservable {
    pub fn new(support: Vec<usize>, l: SymMatrix, kind: ObservableKind) -> Result<Self> {
        if support.len() != l.dim() || support.is_empty() {
            return Err(OuError::Shape(format!(
                "support has {} indices but L is {1}x{1}",
                support.len(),
                l.dim()
            )));
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != support.len() {
            return Err(OuError::Shape("support indices must be distinct".into()));
        }
        l.require_positive()?;
        Ok(Self { support, l, kind })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn l(&self) -> &SymMatrix {
        &self.l
    }

    pub fn kind(&self) -> ObservableKind {
        self.kind
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self.support.iter().find(|&&i| i >= dim) {
            Some(&index) => Err(OuError::ObservableIndex { index, dim }),
            None => Ok(()),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let l = self.l.matrix();
        let mut acc = 0.0;
        for (a, &i) in self.support.iter().enumerate() {
            let row: f64 = self
                .support
                .iter()
                .enumerate()
                .map(|(b, &j)| l[(a, b)] * x[j])
                .sum();
            acc += x[i] * row;
        }
        acc
    }

    /// `x_t·L x_t − x_0·L x_0`.
    pub fn increment(&self, x0: &[f64], xt: &[f64]) -> f64 {
        self.evaluate(xt) - self.evaluate(x0)
    }

    /// `L` embedded in the full state space.
    pub fn full_matrix(&self, dim: usize) -> Matrix {
        let mut out = Matrix::zeros(dim, dim);
        for (a, &i) in self.support.iter().enumerate() {
            for (b, &j) in self.support.iter().enumerate() {
                out[(i, j)] = self.l[(a, b)];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar() -> LinearSDEModel {
        build_model(
            Matrix::from_diag(&[-1.0]),
            Matrix::from_diag(&[2f64.sqrt()]),
        )
        .unwrap()
    }

    #[test]
    fn scalar_model() {
        let m = scalar();
        assert!((m.m_stat()[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(m.is_controllable() && m.warning().is_none());
        assert!((lag_cov(&m, 1.0).unwrap().delta[(0, 0)] - (-1.0f64).exp()).abs() < 1e-14);
        assert_eq!(lag_cov(&m, 0.0).unwrap().delta, *m.m_stat().matrix());
    }

    #[test]
    fn single_oscillator() {
        // m = ω = γ = k_BT = 1, state (p, q)
        let a = Matrix::from_rows(&[vec![-1.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![2f64.sqrt()], vec![0.0]]).unwrap();
        let m = build_model(a, b).unwrap();
        assert!((m.m_stat().matrix() - &Matrix::identity(2)).max_abs() < 1e-13);
        assert!(m.lyapunov_residual() < 1e-14);
    }

    #[test]
    fn rejects_unstable_and_flags_uncontrollable() {
        let err = build_model(Matrix::from_diag(&[0.1]), Matrix::identity(1)).unwrap_err();
        assert!(matches!(err, OuError::Linalg(LinalgError::Unstable { .. })));
        let b = Matrix::from_row_slice(2, 1, &[1.0, 0.0]).unwrap();
        let m = build_model(Matrix::from_diag(&[-1.0, -2.0]), b).unwrap();
        assert!(m.warning().is_some());
        assert!(matches!(
            PairSampler::new(&m, 1.0),
            Err(OuError::Degenerate)
        ));
    }

    #[test]
    fn pair_at_zero_lag_is_identical() {
        let (model, _) = sanity_model(&[1.0, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (x0, xt) in sample_stationary_pair(&model, 0.0, &mut rng, 10).unwrap() {
            assert_eq!(x0, xt);
        }
    }

    #[test]
    fn scalar_pair_correlation() {
        let m = scalar();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let pairs = sample_stationary_pair(&m, 0.5, &mut rng, n).unwrap();
        let c = pairs.iter().map(|(a, b)| a[0] * b[0]).sum::<f64>() / n as f64;
        // var(x0 xt) = 1 + ρ² for unit normals with correlation ρ
        let rho = (-0.5f64).exp();
        assert!((c - rho).abs() < 4.0 * ((1.0 + rho * rho) / n as f64).sqrt());
    }

    #[test]
    fn path_increment_variance() {
        let m = scalar();
        let h = 2f64.ln();
        let grid: Vec<f64> = (0..40_001).map(|k| k as f64 * h).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let path = sample_path(&m, &grid, &mut rng).unwrap();
        // Z_{k+1} − Z_k/2 is the innovation, variance 3/4
        let n = (path.len() - 1) as f64;
        let v = path
            .windows(2)
            .map(|w| (w[1][0] - 0.5 * w[0][0]).powi(2))
            .sum::<f64>()
            / n;
        assert!((v - 0.75).abs() < 4.0 * 0.75 * (2.0 / n).sqrt());
        assert_eq!(sample_path(&m, &[0.0], &mut rng).unwrap().len(), 1);
        assert!(matches!(
            sample_path(&m, &[0.0, 1.0, 1.0], &mut rng),
            Err(OuError::NonAscendingGrid { index: 2 })
        ));
    }

    #[test]
    fn observable_embedding() {
        let l =
            SymMatrix::new(Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap()).unwrap();
        let obs = QuadraticObservable::new(vec![2, 0], l, ObservableKind::Custom).unwrap();
        let x = [1.0, 5.0, 3.0];
        // x_S = (3, 1)
        assert!((obs.evaluate(&x) - (2.0 * 9.0 + 2.0 * 0.5 * 3.0 + 1.0)).abs() < 1e-14);
        let full = obs.full_matrix(3);
        let direct: f64 = (0..3)
            .map(|i| (0..3).map(|j| x[i] * full[(i, j)] * x[j]).sum::<f64>())
            .sum();
        assert!((direct - obs.evaluate(&x)).abs() < 1e-13);
        assert!(QuadraticObservable::new(
            vec![0, 0],
            SymMatrix::identity(2),
            ObservableKind::Custom
        )
        .is_err());
    }

    #[test]
    fn sanity_model_limit() {
        let (model, obs) = sanity_model(&[0.5, 1.5, 3.0]).unwrap();
        let law = model.limit_law(&obs).unwrap();
        for (a, b) in law.lambdas().iter().zip([0.5, 1.5, 3.0]) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
