//! Echo state network with one shared reservoir.
//!
//! All three fields are concatenated into a single input vector, driven through
//! one leaky-integrator tanh reservoir and read out by a linear map trained
//! with ridge regression:
//!
//! ```text
//! x[t+1] = (1 - a) x[t] + a tanh(W x[t] + W_in u[t])
//! y[t]   = W_out x[t] + b
//! W_out  = Y X^T (X X^T + lambda I)^-1
//! ```

use ndarray::{Array1, Array2, ArrayView2};
use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::nrmse_pooled;
use crate::error::{Error, Result};
use crate::linalg::{self, dot, matvec, matvec_into, matvec_many, Cholesky};
use crate::rd_model::Trajectory;

/// Reservoir and readout hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsnConfig {
    #[serde(rename = "UNITS")]
    pub units: usize,
    #[serde(rename = "LEAK_RATE")]
    pub leak_rate: f64,
    #[serde(rename = "SPECTRAL_RADIUS")]
    pub spectral_radius: f64,
    #[serde(rename = "RIDGE")]
    pub ridge: f64,
    #[serde(rename = "WARM_UP")]
    pub warm_up: usize,
    #[serde(rename = "INPUT_SCALING")]
    pub input_scaling: f64,
    #[serde(rename = "RC_DENSITY")]
    pub recurrent_density: f64,
    #[serde(rename = "ESN_SEED")]
    pub seed: u64,
    /// Fit an output bias alongside `W_out`.
    #[serde(rename = "USE_BIAS")]
    pub use_bias: bool,
    /// Min-max scale each field block to [-1, 1] before training.
    #[serde(rename = "NORMALIZE_INPUTS")]
    pub normalize_inputs: bool,
}

impl Default for EsnConfig {
    fn default() -> Self {
        EsnConfig {
            units: 343,
            leak_rate: 2e-4,
            spectral_radius: 0.9,
            ridge: 1e-7,
            warm_up: 50,
            input_scaling: 1.0,
            recurrent_density: 0.1,
            seed: 42,
            use_bias: false,
            normalize_inputs: false,
        }
    }
}

impl EsnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.units < 1 {
            return Err(Error::Config("UNITS must be at least 1".into()));
        }
        if !(self.leak_rate >= 0.0 && self.leak_rate <= 1.0) {
            return Err(Error::Config(format!(
                "LEAK_RATE must lie in [0, 1], got {}",
                self.leak_rate
            )));
        }
        if !(self.spectral_radius > 0.0 && self.spectral_radius.is_finite()) {
            return Err(Error::Config("SPECTRAL_RADIUS must be positive".into()));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::Config("RIDGE must be >= 0".into()));
        }
        if !(self.input_scaling > 0.0 && self.input_scaling.is_finite()) {
            return Err(Error::Config("INPUT_SCALING must be positive".into()));
        }
        if !(self.recurrent_density > 0.0 && self.recurrent_density <= 1.0) {
            return Err(Error::Config("RC_DENSITY must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Fixed random recurrent and input weights plus the running state.
#[derive(Debug, Clone, PartialEq)]
pub struct Reservoir {
    /// `N x N`, rescaled to the configured spectral radius.
    pub w: Array2<f64>,
    /// `N x D`, row-major.
    pub w_in: Array2<f64>,
    pub x: Array1<f64>,
    pub config: EsnConfig,
}

/// Trained linear readout `y = W_out x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Readout {
    /// `D_out x N`, row-major.
    pub w_out: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Attempts at drawing a recurrent matrix with nonzero spectral radius.
const MAX_DRAWS: u64 = 5;
/// RNG stream used for `W_in`; recurrent draws use streams `1..=MAX_DRAWS`.
const INPUT_STREAM: u64 = 0;

fn draw_recurrent(cfg: &EsnConfig, stream: u64) -> Array2<f64> {
    let n = cfg.units;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let unit = Uniform::new(-1.0, 1.0).expect("valid bounds");
    let mut w = Array2::zeros((n, n));
    for v in w.iter_mut() {
        let keep = cfg.recurrent_density >= 1.0 || rng.random::<f64>() < cfg.recurrent_density;
        let val = unit.sample(&mut rng);
        if keep {
            *v = val;
        }
    }
    w
}

/// Draws and rescales the reservoir weights for inputs of dimension `input_dim`.
pub fn build_reservoir(cfg: &EsnConfig, input_dim: usize) -> Result<Reservoir> {
    cfg.validate()?;
    if input_dim < 1 {
        return Err(Error::Config("input dimension must be at least 1".into()));
    }
    let mut w = None;
    for attempt in 1..=MAX_DRAWS {
        let mut candidate = draw_recurrent(cfg, attempt);
        let rho = linalg::spectral_radius(candidate.view());
        if rho > 0.0 && rho.is_finite() {
            candidate *= cfg.spectral_radius / rho;
            w = Some(candidate);
            break;
        }
    }
    let w = w.ok_or_else(|| {
        Error::Reservoir(format!(
            "{MAX_DRAWS} recurrent draws all had zero spectral radius; raise RC_DENSITY or UNITS"
        ))
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(INPUT_STREAM);
    let s = cfg.input_scaling;
    let dist = Uniform::new(-s, s).expect("valid bounds");
    let w_in = Array2::from_shape_simple_fn((cfg.units, input_dim), || dist.sample(&mut rng));

    Ok(Reservoir {
        w,
        w_in,
        x: Array1::zeros(cfg.units),
        config: *cfg,
    })
}

impl Reservoir {
    pub fn units(&self) -> usize {
        self.w.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_in.ncols()
    }

    pub fn reset(&mut self) {
        self.x.fill(0.0);
    }

    /// Leaky state update given a precomputed `W_in u`.
    fn advance(&mut self, drive: &[f64]) {
        let a = self.config.leak_rate;
        let x = self.x.as_slice().expect("contiguous state");
        let mut pre = matvec(self.w.view(), x);
        for (p, d) in pre.iter_mut().zip(drive) {
            *p += d;
        }
        for (xi, p) in self.x.iter_mut().zip(pre) {
            *xi = (1.0 - a) * *xi + a * p.tanh();
        }
    }

    /// `x <- (1 - a) x + a tanh(W x + W_in u)`; returns the new state.
    pub fn update(&mut self, u: &[f64]) -> Result<&Array1<f64>> {
        if u.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "input has length {}, reservoir expects {}",
                u.len(),
                self.input_dim()
            )));
        }
        let mut drive = vec![0.0; self.units()];
        matvec_into(self.w_in.view(), u, &mut drive);
        self.advance(&drive);
        Ok(&self.x)
    }
}

/// Drives the reservoir from a zero state over `inputs`, dropping the first
/// `warm_up` states. Columns of the result are the kept states in order; the
/// reservoir is left at the state after the last input.
pub fn collect_states(r: &mut Reservoir, inputs: &[&[f64]], warm_up: usize) -> Result<Array2<f64>> {
    if inputs.len() <= warm_up {
        return Err(Error::Config(format!(
            "{} inputs do not exceed the warm-up of {warm_up} steps",
            inputs.len()
        )));
    }
    for u in inputs {
        if u.len() != r.input_dim() {
            return Err(Error::Dimension(format!(
                "input has length {}, reservoir expects {}",
                u.len(),
                r.input_dim()
            )));
        }
    }
    r.reset();
    let n = r.units();
    let kept = inputs.len() - warm_up;
    let mut states = Array2::zeros((n, kept));
    // Bounded batches keep the W_in products cache friendly without holding
    // every drive vector at once.
    const BATCH: usize = 64;
    let mut t = 0;
    for chunk in inputs.chunks(BATCH) {
        let drives = matvec_many(r.w_in.view(), chunk);
        for drive in drives {
            r.advance(&drive);
            if t >= warm_up {
                states.column_mut(t - warm_up).assign(&r.x);
            }
            t += 1;
        }
    }
    Ok(states)
}

/// Ridge readout from an `N x T` state matrix and `D_out x T` targets.
pub fn fit_ridge(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, lambda: f64) -> Result<Readout> {
    if x.ncols() != y.ncols() {
        return Err(Error::Dimension(format!(
            "{} state columns but {} target columns",
            x.ncols(),
            y.ncols()
        )));
    }
    let y = y.as_standard_layout();
    let rows: Vec<&[f64]> = y
        .outer_iter()
        .map(|r| r.to_slice().expect("standard layout"))
        .collect();
    fit_ridge_rows(x, |d| rows[d], y.nrows(), lambda)
}

/// Ridge readout with targets given as `T` column vectors of length `D_out`.
pub fn fit_ridge_columns(
    x: ArrayView2<'_, f64>,
    targets: &[&[f64]],
    lambda: f64,
) -> Result<Readout> {
    if x.ncols() != targets.len() {
        return Err(Error::Dimension(format!(
            "{} state columns but {} targets",
            x.ncols(),
            targets.len()
        )));
    }
    let d_out = targets.first().map_or(0, |t| t.len());
    if targets.iter().any(|t| t.len() != d_out) {
        return Err(Error::Dimension("targets differ in length".into()));
    }
    // Transpose in row blocks so each readout row sees a contiguous series.
    const BLOCK: usize = 256;
    let t_len = targets.len();
    let mut cache_start = usize::MAX;
    let mut cache: Vec<f64> = Vec::new();
    fit_ridge_rows_mut(
        x,
        |d, buf: &mut Vec<f64>| {
            let start = d - d % BLOCK;
            if start != cache_start {
                let len = BLOCK.min(d_out - start);
                cache.clear();
                cache.resize(len * t_len, 0.0);
                for (t, col) in targets.iter().enumerate() {
                    for k in 0..len {
                        cache[k * t_len + t] = col[start + k];
                    }
                }
                cache_start = start;
            }
            let k = d - start;
            buf.clear();
            buf.extend_from_slice(&cache[k * t_len..(k + 1) * t_len]);
        },
        d_out,
        lambda,
    )
}

fn fit_ridge_rows<'a>(
    x: ArrayView2<'_, f64>,
    target_row: impl Fn(usize) -> &'a [f64],
    d_out: usize,
    lambda: f64,
) -> Result<Readout> {
    fit_ridge_rows_mut(
        x,
        |d, buf: &mut Vec<f64>| {
            buf.clear();
            buf.extend_from_slice(target_row(d));
        },
        d_out,
        lambda,
    )
}

/// Solves `(X X^T + lambda I) Z = X` by Cholesky, then forms each readout row
/// as `W_out[d, :] = Z Y[d, :]^T`, which equals `Y X^T (X X^T + lambda I)^-1`
/// because the system matrix is symmetric.
fn fit_ridge_rows_mut(
    x: ArrayView2<'_, f64>,
    mut target_row: impl FnMut(usize, &mut Vec<f64>),
    d_out: usize,
    lambda: f64,
) -> Result<Readout> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!(
            "ridge coefficient must be >= 0, got {lambda}"
        )));
    }
    let (n, t) = x.dim();
    if t < 1 {
        return Err(Error::Config("ridge fit needs at least one sample".into()));
    }
    linalg_check_finite(x)?;
    let mut a = linalg::gram(x);
    for i in 0..n {
        a[[i, i]] += lambda;
    }
    let ch = Cholesky::factor(a.view())?;
    let z = ch.solve_matrix(x.as_standard_layout().view());
    let z = z.as_standard_layout();

    let mut w_out = Array2::zeros((d_out, n));
    let mut buf = Vec::with_capacity(t);
    for d in 0..d_out {
        target_row(d, &mut buf);
        let mut out_row = w_out.row_mut(d);
        for i in 0..n {
            let zi = z.row(i);
            out_row[i] = dot(zi.as_slice().expect("standard layout"), &buf);
        }
    }
    Ok(Readout {
        w_out,
        bias: Array1::zeros(d_out),
    })
}

fn linalg_check_finite(x: ArrayView2<'_, f64>) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            what: "reservoir state matrix",
            index,
        }),
        None => Ok(()),
    }
}

impl Readout {
    pub fn output_dim(&self) -> usize {
        self.w_out.nrows()
    }

    pub fn units(&self) -> usize {
        self.w_out.ncols()
    }
}

/// `y = W_out x + b`.
pub fn predict_one(ro: &Readout, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != ro.units() {
        return Err(Error::Dimension(format!(
            "state has length {}, readout expects {}",
            x.len(),
            ro.units()
        )));
    }
    let mut y = matvec(ro.w_out.view(), x);
    for (yi, b) in y.iter_mut().zip(ro.bias.iter()) {
        *yi += b;
    }
    Ok(y)
}

/// Closed-loop prediction: feed `seed_input`, then each prediction back in.
///
/// The reservoir is not modified; the rollout runs on a copy of its state.
pub fn run_autoregressive(
    r: &Reservoir,
    ro: &Readout,
    seed_input: &[f64],
    n_steps: usize,
) -> Result<Vec<Vec<f64>>> {
    if ro.units() != r.units() {
        return Err(Error::Dimension(
            "readout and reservoir sizes differ".into(),
        ));
    }
    if ro.output_dim() != r.input_dim() {
        return Err(Error::Dimension(
            "closed-loop rollout needs output dimension == input dimension".into(),
        ));
    }
    let mut res = r.clone();
    let mut out = Vec::with_capacity(n_steps);
    let mut u = seed_input.to_vec();
    for step in 1..=n_steps {
        res.update(&u)?;
        let y = predict_one(ro, res.x.as_slice().expect("contiguous state"))?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step });
        }
        out.push(y.clone());
        u = y;
    }
    Ok(out)
}

/// Per-field affine map of a flattened `[C, V, H]` vector onto [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldScaler {
    pub block_len: usize,
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl FieldScaler {
    pub fn fit(states: &[&[f64]], block_len: usize) -> Self {
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for s in states {
            for (i, &v) in s.iter().enumerate() {
                let b = i / block_len;
                min[b] = min[b].min(v);
                max[b] = max[b].max(v);
            }
        }
        FieldScaler {
            block_len,
            min,
            max,
        }
    }

    fn half_range(&self, b: usize) -> f64 {
        let r = 0.5 * (self.max[b] - self.min[b]);
        if r > 0.0 {
            r
        } else {
            1.0
        }
    }

    fn mid(&self, b: usize) -> f64 {
        0.5 * (self.max[b] + self.min[b])
    }

    pub fn forward(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(i, &x)| {
                let b = i / self.block_len;
                (x - self.mid(b)) / self.half_range(b)
            })
            .collect()
    }

    pub fn inverse(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(i, &x)| {
                let b = i / self.block_len;
                x * self.half_range(b) + self.mid(b)
            })
            .collect()
    }
}

/// A trained surrogate: reservoir, readout and optional input scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    pub reservoir: Reservoir,
    pub readout: Readout,
    pub scaler: Option<FieldScaler>,
}

/// Teacher-forced fit quality on the post-washout training window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub samples: usize,
    /// Pooled one-step NRMSE over every component and kept step.
    pub nrmse: f64,
}

/// Trains a one-step-ahead surrogate on a contiguous trajectory.
///
/// Inputs are states `0..T-1`, targets states `1..T`. The reservoir is left
/// at its state after the last training input, ready for a rollout seeded
/// with the final trajectory state.
pub fn train_surrogate(traj: &Trajectory, cfg: &EsnConfig) -> Result<(Surrogate, FitReport)> {
    cfg.validate()?;
    if !traj.is_contiguous() {
        return Err(Error::Config(
            "training needs a trajectory recorded at every step".into(),
        ));
    }
    if traj.len() < cfg.warm_up + 2 {
        return Err(Error::Config(format!(
            "trajectory has {} states; WARM_UP = {} needs at least {}",
            traj.len(),
            cfg.warm_up,
            cfg.warm_up + 2
        )));
    }
    let dim = traj.state_dim();
    let scaler = cfg.normalize_inputs.then(|| {
        let refs: Vec<&[f64]> = traj.states.iter().map(|s| s.as_slice()).collect();
        FieldScaler::fit(&refs, dim / 3)
    });
    let scaled: Option<Vec<Vec<f64>>> = scaler
        .as_ref()
        .map(|s| traj.states.iter().map(|v| s.forward(v)).collect());
    let series: Vec<&[f64]> = match &scaled {
        Some(v) => v.iter().map(|x| x.as_slice()).collect(),
        None => traj.states.iter().map(|x| x.as_slice()).collect(),
    };

    let t = series.len() - 1;
    let inputs = &series[..t];
    let targets = &series[1 + cfg.warm_up..];

    let mut reservoir = build_reservoir(cfg, dim)?;
    let states = collect_states(&mut reservoir, inputs, cfg.warm_up)?;
    let readout = if cfg.use_bias {
        fit_with_bias(states.view(), targets, cfg.ridge)?
    } else {
        fit_ridge_columns(states.view(), targets, cfg.ridge)?
    };

    let mut sq = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut count = 0usize;
    for (k, target) in targets.iter().enumerate() {
        let col = states.column(k).to_vec();
        let pred = predict_one(&readout, &col)?;
        let (pred, truth) = match &scaler {
            Some(s) => (s.inverse(&pred), traj.states[1 + cfg.warm_up + k].clone()),
            None => (pred, target.to_vec()),
        };
        for (p, y) in pred.iter().zip(&truth) {
            sq += (p - y) * (p - y);
            lo = lo.min(*y);
            hi = hi.max(*y);
        }
        count += truth.len();
    }
    let fit = FitReport {
        samples: targets.len(),
        nrmse: nrmse_pooled(sq, count, lo, hi).value,
    };
    Ok((
        Surrogate {
            reservoir,
            readout,
            scaler,
        },
        fit,
    ))
}

fn fit_with_bias(states: ArrayView2<'_, f64>, targets: &[&[f64]], lambda: f64) -> Result<Readout> {
    let (n, t) = states.dim();
    let mut aug = Array2::ones((n + 1, t));
    aug.slice_mut(ndarray::s![..n, ..]).assign(&states);
    let full = fit_ridge_columns(aug.view(), targets, lambda)?;
    let w_out = full.w_out.slice(ndarray::s![.., ..n]).to_owned();
    let bias = full.w_out.column(n).to_owned();
    Ok(Readout { w_out, bias })
}

impl Surrogate {
    /// Closed-loop rollout in physical units.
    pub fn rollout(&self, seed_input: &[f64], n_steps: usize) -> Result<Vec<Vec<f64>>> {
        match &self.scaler {
            None => run_autoregressive(&self.reservoir, &self.readout, seed_input, n_steps),
            Some(s) => {
                let out = run_autoregressive(
                    &self.reservoir,
                    &self.readout,
                    &s.forward(seed_input),
                    n_steps,
                )?;
                Ok(out.iter().map(|v| s.inverse(v)).collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDims;
    use ndarray::{array, Array};

    fn random(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
    }

    fn tiny(units: usize) -> EsnConfig {
        EsnConfig {
            units,
            leak_rate: 1.0,
            spectral_radius: 0.9,
            ridge: 0.0,
            warm_up: 0,
            input_scaling: 1.0,
            recurrent_density: 1.0,
            seed: 7,
            use_bias: false,
            normalize_inputs: false,
        }
    }

    #[test]
    fn single_unit_reservoir() {
        let r = build_reservoir(&tiny(1), 3).unwrap();
        assert_eq!(r.w.dim(), (1, 1));
        assert!((r.w[[0, 0]].abs() - 0.9).abs() < 1e-15);
        assert!(r.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn build_is_deterministic() {
        let cfg = EsnConfig {
            units: 40,
            ..EsnConfig::default()
        };
        let a = build_reservoir(&cfg, 17).unwrap();
        let b = build_reservoir(&cfg, 17).unwrap();
        assert_eq!(a, b);
        let c = build_reservoir(&EsnConfig { seed: 43, ..cfg }, 17).unwrap();
        assert_ne!(a.w, c.w);
    }

    #[test]
    fn build_rescales_radius() {
        for rho in [0.5, 0.9, 1.4] {
            let cfg = EsnConfig {
                units: 80,
                spectral_radius: rho,
                ..EsnConfig::default()
            };
            let r = build_reservoir(&cfg, 5).unwrap();
            let got = linalg::spectral_radius(r.w.view());
            assert!((got - rho).abs() / rho < 1e-10);
        }
    }

    #[test]
    fn degenerate_draws_are_reported() {
        // A 1x1 matrix with density 1e-9 is almost surely zero in every draw.
        let cfg = EsnConfig {
            units: 1,
            recurrent_density: 1e-9,
            ..tiny(1)
        };
        assert!(matches!(build_reservoir(&cfg, 2), Err(Error::Reservoir(_))));
    }

    #[test]
    fn update_limits() {
        let mut r = build_reservoir(&tiny(4), 3).unwrap();
        r.w.fill(0.0);
        r.w_in.fill(0.0);
        r.x.fill(0.3);
        r.update(&[1.0, 2.0, 3.0]).unwrap();
        assert!(r.x.iter().all(|&v| v == 0.0));

        let mut frozen = build_reservoir(
            &EsnConfig {
                leak_rate: 0.0,
                ..tiny(4)
            },
            3,
        )
        .unwrap();
        frozen.x.assign(&array![0.1, -0.2, 0.3, 0.4]);
        frozen.update(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(frozen.x, array![0.1, -0.2, 0.3, 0.4]);
        assert!(frozen.update(&[1.0]).is_err());
    }

    #[test]
    fn update_two_unit_hand_case() {
        let mut r = build_reservoir(
            &EsnConfig {
                leak_rate: 0.25,
                ..tiny(2)
            },
            2,
        )
        .unwrap();
        r.w = array![[0.5, -0.25], [0.1, 0.3]];
        r.w_in = array![[1.0, 0.0], [-0.5, 2.0]];
        r.x = array![0.2, -0.4];
        r.update(&[0.3, 0.1]).unwrap();
        // pre0 = 0.5*0.2 - 0.25*(-0.4) + 0.3 = 0.5
        // pre1 = 0.1*0.2 + 0.3*(-0.4) - 0.15 + 0.2 = -0.05
        let e0 = 0.75 * 0.2 + 0.25 * 0.5f64.tanh();
        let e1 = 0.75 * -0.4 + 0.25 * (-0.05f64).tanh();
        assert!((r.x[0] - e0).abs() < 1e-15);
        assert!((r.x[1] - e1).abs() < 1e-15);
    }

    #[test]
    fn washout_column_counts() {
        let cfg = EsnConfig {
            units: 5,
            ..tiny(5)
        };
        let inputs: Vec<Vec<f64>> = (0..10).map(|t| vec![t as f64 * 0.1, 1.0]).collect();
        let refs: Vec<&[f64]> = inputs.iter().map(|v| v.as_slice()).collect();
        for warm in [0, 3, 9] {
            let mut r = build_reservoir(&cfg, 2).unwrap();
            let x = collect_states(&mut r, &refs, warm).unwrap();
            assert_eq!(x.ncols(), 10 - warm);
        }
        let mut r = build_reservoir(&cfg, 2).unwrap();
        assert!(matches!(
            collect_states(&mut r, &refs, 10),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn collect_states_matches_repeated_update() {
        let cfg = EsnConfig {
            units: 6,
            leak_rate: 0.3,
            ..tiny(6)
        };
        let inputs: Vec<Vec<f64>> = (0..70)
            .map(|t| vec![(t as f64).sin(), (t as f64 * 0.3).cos(), 0.5])
            .collect();
        let refs: Vec<&[f64]> = inputs.iter().map(|v| v.as_slice()).collect();
        let mut a = build_reservoir(&cfg, 3).unwrap();
        let x = collect_states(&mut a, &refs, 5).unwrap();
        let mut b = build_reservoir(&cfg, 3).unwrap();
        for (t, u) in refs.iter().enumerate() {
            b.update(u).unwrap();
            if t >= 5 {
                assert_eq!(x.column(t - 5), b.x);
            }
        }
        assert_eq!(a.x, b.x);
    }

    #[test]
    fn ridge_identity_states() {
        let x = Array2::eye(4);
        let y = random(3, 4, 1);
        let ro = fit_ridge(x.view(), y.view(), 0.0).unwrap();
        for (p, q) in ro.w_out.iter().zip(y.iter()) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn ridge_recovers_linear_map() {
        let a = random(3, 4, 2);
        let x = random(4, 10, 3);
        let y = a.dot(&x);
        let ro = fit_ridge(x.view(), y.view(), 0.0).unwrap();
        for (p, q) in ro.w_out.iter().zip(a.iter()) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn ridge_norm_shrinks_with_lambda() {
        let x = random(6, 20, 4);
        let y = random(2, 20, 5);
        let norms: Vec<f64> = [1e-11, 1e-7, 1e-3, 1.0]
            .iter()
            .map(|&l| {
                let ro = fit_ridge(x.view(), y.view(), l).unwrap();
                ro.w_out.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .collect();
        for w in norms.windows(2) {
            assert!(w[1] < w[0], "{norms:?}");
        }
    }

    #[test]
    fn ridge_singular_without_regularisation() {
        let x = random(5, 3, 6);
        let y = random(2, 3, 7);
        assert!(matches!(
            fit_ridge(x.view(), y.view(), 0.0),
            Err(Error::SingularSystem { .. })
        ));
        assert!(fit_ridge(x.view(), y.view(), 1e-6).is_ok());
    }

    #[test]
    fn columns_and_matrix_routes_agree() {
        let x = random(7, 30, 8);
        let y = random(600, 30, 9);
        let a = fit_ridge(x.view(), y.view(), 1e-5).unwrap();
        let cols: Vec<Vec<f64>> = (0..30).map(|t| y.column(t).to_vec()).collect();
        let refs: Vec<&[f64]> = cols.iter().map(|v| v.as_slice()).collect();
        let b = fit_ridge_columns(x.view(), &refs, 1e-5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn predict_one_cases() {
        let zero = Readout {
            w_out: Array2::zeros((2, 3)),
            bias: Array1::zeros(2),
        };
        assert_eq!(
            predict_one(&zero, &[1.0, 2.0, 3.0]).unwrap(),
            vec![0.0, 0.0]
        );
        let id = Readout {
            w_out: Array2::eye(3),
            bias: Array1::zeros(3),
        };
        assert_eq!(
            predict_one(&id, &[1.0, -2.0, 3.0]).unwrap(),
            vec![1.0, -2.0, 3.0]
        );
        let hand = Readout {
            w_out: array![[1.0, 2.0], [-3.0, 0.5]],
            bias: array![0.25, -1.0],
        };
        assert_eq!(predict_one(&hand, &[2.0, 4.0]).unwrap(), vec![10.25, -5.0]);
        assert!(predict_one(&hand, &[1.0]).is_err());
    }

    fn constant_trajectory(len: usize) -> Trajectory {
        let dims = GridDims::cube(3, 1.0).unwrap();
        let mut traj = Trajectory::new(dims, 0.01);
        let v: Vec<f64> = (0..81).map(|i| 0.1 + 0.01 * (i % 7) as f64).collect();
        for t in 0..len {
            traj.push(t as u64, v.clone()).unwrap();
        }
        traj
    }

    #[test]
    fn constant_trajectory_is_a_fixed_point() {
        let traj = constant_trajectory(80);
        let cfg = EsnConfig {
            units: 30,
            leak_rate: 0.5,
            spectral_radius: 0.5,
            ridge: 1e-10,
            warm_up: 20,
            recurrent_density: 0.3,
            ..EsnConfig::default()
        };
        let (model, fit) = train_surrogate(&traj, &cfg).unwrap();
        assert!(fit.nrmse.is_finite());
        let target = &traj.states[0];
        let x = model.reservoir.x.to_vec();
        let one = predict_one(&model.readout, &x).unwrap();
        for (p, q) in one.iter().zip(target) {
            assert!((p - q).abs() < 1e-8);
        }
        let roll = model.rollout(target, 50).unwrap();
        assert_eq!(roll.len(), 50);
        for y in &roll {
            for (p, q) in y.iter().zip(target) {
                assert!((p - q).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn training_preconditions() {
        let traj = constant_trajectory(10);
        let cfg = EsnConfig {
            units: 5,
            warm_up: 9,
            ..EsnConfig::default()
        };
        assert!(matches!(
            train_surrogate(&traj, &cfg),
            Err(Error::Config(_))
        ));
        let cfg = EsnConfig {
            units: 5,
            warm_up: 20,
            ..EsnConfig::default()
        };
        assert!(matches!(
            train_surrogate(&traj, &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn rollout_edge_cases() {
        let traj = constant_trajectory(30);
        let cfg = EsnConfig {
            units: 8,
            warm_up: 5,
            leak_rate: 0.5,
            ridge: 1e-8,
            ..EsnConfig::default()
        };
        let (model, _) = train_surrogate(&traj, &cfg).unwrap();
        assert!(model.rollout(&traj.states[0], 0).unwrap().is_empty());

        let mut bad = model.readout.clone();
        bad.w_out.fill(f64::MAX);
        match run_autoregressive(&model.reservoir, &bad, &traj.states[0], 5) {
            Err(Error::Divergence { step }) => assert!(step >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn fading_memory_for_contracting_reservoir() {
        let cfg = EsnConfig {
            units: 100,
            leak_rate: 1.0,
            spectral_radius: 0.5,
            recurrent_density: 0.1,
            ..EsnConfig::default()
        };
        let mut a = build_reservoir(&cfg, 2).unwrap();
        let mut b = a.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        b.x = Array::from_shape_fn(100, |_| rng.random_range(-1.0..1.0));
        let d0 = (&a.x - &b.x).mapv(|v| v * v).sum().sqrt();
        for t in 0..100 {
            let u = [(t as f64 * 0.2).sin(), 0.5];
            a.update(&u).unwrap();
            b.update(&u).unwrap();
        }
        let d1 = (&a.x - &b.x).mapv(|v| v * v).sum().sqrt();
        assert!(d1 * 10.0 <= d0, "{d0} -> {d1}");
    }

    #[test]
    fn bias_fit_recovers_affine_map() {
        let x = random(4, 40, 11);
        let a = random(3, 4, 12);
        let b = array![0.5, -1.0, 2.0];
        let y = a.dot(&x) + b.view().insert_axis(ndarray::Axis(1));
        let cols: Vec<Vec<f64>> = (0..40).map(|t| y.column(t).to_vec()).collect();
        let refs: Vec<&[f64]> = cols.iter().map(|v| v.as_slice()).collect();
        let ro = fit_with_bias(x.view(), &refs, 0.0).unwrap();
        for (p, q) in ro.w_out.iter().zip(a.iter()) {
            assert!((p - q).abs() < 1e-9);
        }
        for (p, q) in ro.bias.iter().zip(b.iter()) {
            assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn scaler_round_trips() {
        let a = vec![0.0, 1.0, 5.0, 7.0, -2.0, -2.0];
        let b = vec![2.0, 3.0, 6.0, 9.0, -2.0, -2.0];
        let s = FieldScaler::fit(&[&a, &b], 2);
        let f = s.forward(&a);
        assert_eq!(f[0], -1.0);
        assert_eq!(f[2], -1.0);
        assert_eq!(f[4], 0.0);
        let back = s.inverse(&f);
        for (p, q) in back.iter().zip(&a) {
            assert!((p - q).abs() < 1e-15);
        }
    }
}
