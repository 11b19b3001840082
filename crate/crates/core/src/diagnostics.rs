//! Prediction error, spatial entropy and finite-time Lyapunov exponents.

use std::fmt::Write as _;

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field3, GridDims};
use crate::rd_model::{euler_step, FieldKind, ModelParams, SystemState};

/// An NRMSE value. `normalized` is false when the reference was constant and
/// the plain RMSE is reported instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nrmse {
    pub value: f64,
    pub normalized: bool,
}

/// RMSE divided by the range of the reference series.
pub fn nrmse(pred: &[f64], truth: &[f64]) -> Result<Nrmse> {
    if pred.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "prediction has {} samples, reference has {}",
            pred.len(),
            truth.len()
        )));
    }
    if truth.len() < 2 {
        return Err(Error::Config("NRMSE needs at least two samples".into()));
    }
    let mut sq = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (p, t) in pred.iter().zip(truth) {
        sq += (p - t) * (p - t);
        lo = lo.min(*t);
        hi = hi.max(*t);
    }
    Ok(nrmse_pooled(sq, truth.len(), lo, hi))
}

/// NRMSE from an accumulated squared-residual sum and the reference range.
pub fn nrmse_pooled(sum_sq: f64, count: usize, lo: f64, hi: f64) -> Nrmse {
    let rmse = (sum_sq / count.max(1) as f64).sqrt();
    let range = hi - lo;
    if range > 0.0 {
        Nrmse {
            value: rmse / range,
            normalized: true,
        }
    } else {
        Nrmse {
            value: rmse,
            normalized: false,
        }
    }
}

/// Default histogram resolution for [`spatial_entropy`].
pub const DEFAULT_ENTROPY_BINS: usize = 64;

/// Shannon entropy (bits) of the histogram of a field's values, using
/// `n_bins` equal-width bins over `[min, max]`.
pub fn spatial_entropy(f: &Field3, n_bins: usize) -> Result<f64> {
    entropy_of(f.values(), n_bins)
}

pub(crate) fn entropy_of(values: &[f64], n_bins: usize) -> Result<f64> {
    if n_bins < 2 {
        return Err(Error::Config(format!("need at least 2 bins, got {n_bins}")));
    }
    if values.is_empty() {
        return Ok(0.0);
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let width = hi - lo;
    if width.is_nan() || width <= 0.0 {
        return Ok(0.0);
    }
    let mut counts = vec![0usize; n_bins];
    for &v in values {
        let b = (((v - lo) / width) * n_bins as f64).floor() as usize;
        counts[b.min(n_bins - 1)] += 1;
    }
    let total = values.len() as f64;
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>();
    Ok(h)
}

/// Which part of the state receives the initial perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerturbBlock {
    All,
    Field(FieldKind),
}

/// Settings for the two-trajectory (Benettin) exponent estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovOptions {
    /// Steps over which growth is accumulated.
    pub horizon: u64,
    /// Perturbation norm; `None` means `1e-8 * ||state||`.
    pub eps: Option<f64>,
    pub renorm_every: u64,
    pub seed: u64,
    pub block: PerturbBlock,
    /// Steps co-integrated before `horizon` starts, letting the perturbation
    /// turn towards the dominant direction. Their growth is discarded.
    pub align_steps: u64,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        LyapunovOptions {
            horizon: 50,
            eps: None,
            renorm_every: 10,
            seed: 0,
            block: PerturbBlock::All,
            align_steps: 0,
        }
    }
}

/// Local exponent over one renormalisation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovWindow {
    pub start_step: u64,
    pub end_step: u64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovRun {
    /// Mean growth rate per unit time over the horizon.
    pub exponent: f64,
    pub windows: Vec<LyapunovWindow>,
    pub final_state: SystemState,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest finite-time Lyapunov exponent from `s` over `horizon` steps.
pub fn lyapunov_estimate(
    s: &SystemState,
    p: &ModelParams,
    horizon: u64,
    eps: f64,
    renorm_every: u64,
    seed: u64,
) -> Result<f64> {
    let opts = LyapunovOptions {
        horizon,
        eps: Some(eps),
        renorm_every,
        seed,
        block: PerturbBlock::All,
        align_steps: 0,
    };
    Ok(lyapunov_series(s, p, &opts)?.exponent)
}

/// Benettin estimate with per-interval exponents.
///
/// A seeded random perturbation of norm `eps` is added to a copy of the state
/// and both copies are stepped together. Every `renorm_every` steps the
/// separation is measured, `ln(|delta| / eps)` is recorded and the separation
/// is scaled back to `eps`. The exponent is the sum of logs over
/// `horizon * dt`.
pub fn lyapunov_series(
    s: &SystemState,
    p: &ModelParams,
    opts: &LyapunovOptions,
) -> Result<LyapunovRun> {
    if opts.renorm_every < 1 || opts.horizon < opts.renorm_every {
        return Err(Error::Config(format!(
            "need horizon >= renorm_every >= 1, got horizon {} and renorm_every {}",
            opts.horizon, opts.renorm_every
        )));
    }
    p.validate()?;
    let dims = s.dims();
    let n = dims.len();
    let reference_flat = s.flatten();
    let eps = match opts.eps {
        Some(e) => e,
        None => {
            let scale = norm(&reference_flat);
            if scale > 0.0 {
                1e-8 * scale
            } else {
                1e-8
            }
        }
    };
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Config(format!(
            "perturbation size must be positive, got {eps}"
        )));
    }

    let range = match opts.block {
        PerturbBlock::All => 0..3 * n,
        PerturbBlock::Field(f) => f.block() * n..(f.block() + 1) * n,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let unit = Uniform::new_inclusive(-1.0, 1.0).expect("valid bounds");
    let mut dir = vec![0.0; 3 * n];
    for v in &mut dir[range] {
        *v = unit.sample(&mut rng);
    }
    let dn = norm(&dir);
    if dn == 0.0 {
        return Err(Error::DegeneratePerturbation { step: 0 });
    }

    let mut reference = s.clone();
    let mut perturbed = perturb(&reference, &dir, eps / dn)?;
    let mut delta = separation(&reference, &perturbed);
    if norm(&delta) == 0.0 {
        return Err(Error::DegeneratePerturbation { step: 0 });
    }

    let total = opts.align_steps + opts.horizon;
    let mut log_sum = 0.0;
    let mut windows = Vec::new();
    let mut window_start = s.t + opts.align_steps;
    let mut since = 0u64;
    for k in 1..=total {
        reference = euler_step(&reference, p)?;
        perturbed = euler_step(&perturbed, p)?;
        since += 1;
        let counting = k > opts.align_steps;
        let at_boundary = if counting {
            since == opts.renorm_every || k == total
        } else {
            since == opts.renorm_every || k == opts.align_steps
        };
        if !at_boundary {
            continue;
        }
        delta = separation(&reference, &perturbed);
        let d = norm(&delta);
        if d == 0.0 || !d.is_finite() {
            return Err(Error::DegeneratePerturbation { step: k as usize });
        }
        if counting {
            let growth = (d / eps).ln();
            log_sum += growth;
            windows.push(LyapunovWindow {
                start_step: window_start,
                end_step: reference.t,
                exponent: growth / (since as f64 * p.dt),
            });
            window_start = reference.t;
        }
        perturbed = perturb(&reference, &delta, eps / d)?;
        since = 0;
    }
    Ok(LyapunovRun {
        exponent: log_sum / (opts.horizon as f64 * p.dt),
        windows,
        final_state: reference,
    })
}

fn separation(a: &SystemState, b: &SystemState) -> Vec<f64> {
    let fa = a.flatten();
    let fb = b.flatten();
    fb.iter().zip(&fa).map(|(y, x)| y - x).collect()
}

fn perturb(s: &SystemState, dir: &[f64], scale: f64) -> Result<SystemState> {
    let flat: Vec<f64> = s
        .flatten()
        .iter()
        .zip(dir)
        .map(|(x, d)| x + scale * d)
        .collect();
    SystemState::from_flat(s.dims(), &flat, s.t)
}

/// A grid location used for pointwise comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EvalPoint {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl EvalPoint {
    pub const fn new(x: usize, y: usize, z: usize) -> Self {
        EvalPoint { x, y, z }
    }

    /// Offset of this point's `field` value inside a flattened state.
    pub fn flat_index(&self, dims: &GridDims, field: FieldKind) -> usize {
        field.block() * dims.len() + dims.idx(self.x, self.y, self.z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub point: usize,
    pub field: FieldKind,
    pub nrmse: Nrmse,
}

/// Per-point and pooled NRMSE for one evaluation window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub points: Vec<EvalPoint>,
    /// Point-major, fields in C, V, H order.
    pub entries: Vec<PointError>,
    pub total: Nrmse,
    pub first_step: u64,
    pub last_step: u64,
}

/// Compares predicted and reference state sequences at the given points.
///
/// `first_step` labels the first vector of both sequences. The total is the
/// RMSE over every residual (points x fields x steps) divided by the range of
/// all reference values entering it.
pub fn evaluate_rollout(
    pred: &[Vec<f64>],
    truth: &[Vec<f64>],
    points: &[EvalPoint],
    dims: &GridDims,
    first_step: u64,
) -> Result<EvalReport> {
    if pred.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predicted steps vs {} reference steps",
            pred.len(),
            truth.len()
        )));
    }
    let dim = 3 * dims.len();
    if let Some(bad) = pred.iter().chain(truth).find(|v| v.len() != dim) {
        return Err(Error::Dimension(format!(
            "state vector of length {}, grid needs {dim}",
            bad.len()
        )));
    }
    for p in points {
        if !dims.contains(p.x, p.y, p.z) {
            return Err(Error::IndexOutOfRange(format!(
                "evaluation point [{}, {}, {}] outside {}x{}x{}",
                p.x, p.y, p.z, dims.nx, dims.ny, dims.nz
            )));
        }
    }
    let mut entries = Vec::with_capacity(points.len() * 3);
    let mut sq = 0.0;
    let mut count = 0usize;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (pi, p) in points.iter().enumerate() {
        for field in FieldKind::ALL {
            let i = p.flat_index(dims, field);
            let ps: Vec<f64> = pred.iter().map(|v| v[i]).collect();
            let ts: Vec<f64> = truth.iter().map(|v| v[i]).collect();
            entries.push(PointError {
                point: pi,
                field,
                nrmse: nrmse(&ps, &ts)?,
            });
            for (a, b) in ps.iter().zip(&ts) {
                sq += (a - b) * (a - b);
                lo = lo.min(*b);
                hi = hi.max(*b);
            }
            count += ts.len();
        }
    }
    Ok(EvalReport {
        points: points.to_vec(),
        entries,
        total: nrmse_pooled(sq, count, lo, hi),
        first_step,
        last_step: first_step + pred.len().saturating_sub(1) as u64,
    })
}

impl EvalReport {
    pub fn get(&self, point: usize, field: FieldKind) -> Option<&PointError> {
        self.entries
            .iter()
            .find(|e| e.point == point && e.field == field)
    }

    /// `point,x,y,z,field,nrmse,normalized` rows plus a closing total row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("point,x,y,z,field,nrmse,normalized\n");
        for e in &self.entries {
            let p = self.points[e.point];
            let _ = writeln!(
                s,
                "{},{},{},{},{},{:e},{}",
                e.point,
                p.x,
                p.y,
                p.z,
                e.field.name(),
                e.nrmse.value,
                e.nrmse.normalized
            );
        }
        let _ = writeln!(
            s,
            "total,,,,all,{:e},{}",
            self.total.value, self.total.normalized
        );
        s
    }

    /// One row per point with C, V, H columns, then the total.
    pub fn to_table(&self) -> String {
        let mut s = format!(
            "NRMSE over steps {}..={}, {} points\n{:>14} {:>10} {:>10} {:>10}\n",
            self.first_step,
            self.last_step,
            self.points.len(),
            "point",
            "C",
            "V",
            "H"
        );
        for (i, p) in self.points.iter().enumerate() {
            let cell = |f| {
                self.get(i, f)
                    .map(|e| format!("{:.2e}", e.nrmse.value))
                    .unwrap_or_default()
            };
            let _ = writeln!(
                s,
                "{:>14} {:>10} {:>10} {:>10}",
                format!("[{},{},{}]", p.x, p.y, p.z),
                cell(FieldKind::C),
                cell(FieldKind::V),
                cell(FieldKind::H)
            );
        }
        let _ = writeln!(s, "total NRMSE: {:.2e}", self.total.value);
        s
    }
}

/// Entropy of each field block of a flattened state.
pub fn state_entropy(flat: &[f64], dims: &GridDims, n_bins: usize) -> Result<[f64; 3]> {
    let n = dims.len();
    if flat.len() != 3 * n {
        return Err(Error::Dimension(format!(
            "state vector has length {}, expected {}",
            flat.len(),
            3 * n
        )));
    }
    Ok([
        entropy_of(&flat[..n], n_bins)?,
        entropy_of(&flat[n..2 * n], n_bins)?,
        entropy_of(&flat[2 * n..], n_bins)?,
    ])
}
