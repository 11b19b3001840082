//! The three-field electrophysiology reaction-diffusion system.
//!
//! ```text
//! dc/dt = D_c lap(c) + sigma v sin(c) - gamma c h
//! dv/dt = D_v lap(v) + sigma sin(chi c v) - kappa h
//! dh/dt = D_h lap(h) + delta c - eta h
//! ```
//!
//! integrated with a fully explicit Euler step on a regular grid.

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{check_finite, laplacian_into, Field3, GridDims};

/// Diffusion coefficients, reaction constants, time step and grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "D_c")]
    pub d_c: f64,
    #[serde(rename = "D_v")]
    pub d_v: f64,
    #[serde(rename = "D_h")]
    pub d_h: f64,
    pub gamma: f64,
    pub delta: f64,
    pub eta: f64,
    pub kappa: f64,
    pub sigma: f64,
    pub chi: f64,
    pub dt: f64,
    pub dims: GridDims,
}

impl ModelParams {
    /// Largest diffusion number `dt * D * 6 / d^2` over the three fields.
    pub fn diffusion_number(&self) -> f64 {
        let dmax = self.d_c.max(self.d_v).max(self.d_h);
        self.dt * dmax * 6.0 / (self.dims.d * self.dims.d)
    }

    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        let all = [
            self.d_c, self.d_v, self.d_h, self.gamma, self.delta, self.eta, self.kappa, self.sigma,
            self.chi, self.dt,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("model parameters must be finite".into()));
        }
        if self.dt <= 0.0 {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.d_c < 0.0 || self.d_v < 0.0 || self.d_h < 0.0 {
            return Err(Error::Config("diffusion coefficients must be >= 0".into()));
        }
        let r = self.diffusion_number();
        if r >= 1.0 {
            return Err(Error::Config(format!(
                "explicit diffusion is unstable: dt * max(D) * 6 / d^2 = {r} >= 1"
            )));
        }
        Ok(())
    }
}

/// Local reaction terms `(f, g, k)` for one cell.
#[inline]
pub fn reaction_terms(c: f64, v: f64, h: f64, p: &ModelParams) -> (f64, f64, f64) {
    let f = p.sigma * v * c.sin() - p.gamma * c * h;
    let g = p.sigma * (p.chi * c * v).sin() - p.kappa * h;
    let k = p.delta * c - p.eta * h;
    (f, g, k)
}

/// The triple `(c, v, h)` at integer time step `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub c: Field3,
    pub v: Field3,
    pub h: Field3,
    pub t: u64,
}

impl SystemState {
    pub fn new(c: Field3, v: Field3, h: Field3, t: u64) -> Result<Self> {
        if c.dims() != v.dims() || c.dims() != h.dims() {
            return Err(Error::Dimension("c, v and h must share grid dims".into()));
        }
        c.check_finite()?;
        v.check_finite()?;
        h.check_finite()?;
        Ok(SystemState { c, v, h, t })
    }

    pub fn zeros(dims: GridDims) -> Self {
        SystemState {
            c: Field3::zeros(dims),
            v: Field3::zeros(dims),
            h: Field3::zeros(dims),
            t: 0,
        }
    }

    pub fn dims(&self) -> GridDims {
        self.c.dims()
    }

    /// Concatenation `[C, V, H]`, each block in canonical grid order.
    pub fn flatten(&self) -> Vec<f64> {
        let n = self.dims().len();
        let mut out = Vec::with_capacity(3 * n);
        out.extend_from_slice(self.c.values());
        out.extend_from_slice(self.v.values());
        out.extend_from_slice(self.h.values());
        out
    }

    /// Inverse of [`SystemState::flatten`].
    pub fn from_flat(dims: GridDims, flat: &[f64], t: u64) -> Result<Self> {
        let n = dims.len();
        if flat.len() != 3 * n {
            return Err(Error::Dimension(format!(
                "state vector has length {}, expected 3 * {n}",
                flat.len()
            )));
        }
        Self::new(
            Field3::from_values(dims, flat[..n].to_vec())?,
            Field3::from_values(dims, flat[n..2 * n].to_vec())?,
            Field3::from_values(dims, flat[2 * n..].to_vec())?,
            t,
        )
    }

    pub fn field(&self, which: FieldKind) -> &Field3 {
        match which {
            FieldKind::C => &self.c,
            FieldKind::V => &self.v,
            FieldKind::H => &self.h,
        }
    }
}

/// Which of the three model fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FieldKind {
    C,
    V,
    H,
}

impl FieldKind {
    pub const ALL: [FieldKind; 3] = [FieldKind::C, FieldKind::V, FieldKind::H];

    /// Position of this field's block in a flattened state vector.
    pub fn block(self) -> usize {
        match self {
            FieldKind::C => 0,
            FieldKind::V => 1,
            FieldKind::H => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldKind::C => "C",
            FieldKind::V => "V",
            FieldKind::H => "H",
        }
    }

    pub fn lower(self) -> &'static str {
        match self {
            FieldKind::C => "c",
            FieldKind::V => "v",
            FieldKind::H => "h",
        }
    }
}

impl std::str::FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C" | "c" => Ok(FieldKind::C),
            "V" | "v" => Ok(FieldKind::V),
            "H" | "h" => Ok(FieldKind::H),
            other => Err(Error::Config(format!("unknown field {other:?}"))),
        }
    }
}

/// One explicit Euler step; every term is evaluated on the input state.
pub fn euler_step(s: &SystemState, p: &ModelParams) -> Result<SystemState> {
    p.validate()?;
    let dims = s.dims();
    if dims != p.dims {
        return Err(Error::Dimension(
            "state grid differs from the parameter grid".into(),
        ));
    }
    let n = dims.len();
    let mut lap_c = vec![0.0; n];
    let mut lap_v = vec![0.0; n];
    let mut lap_h = vec![0.0; n];
    laplacian_into(dims, s.c.values(), &mut lap_c);
    laplacian_into(dims, s.v.values(), &mut lap_v);
    laplacian_into(dims, s.h.values(), &mut lap_h);

    let (c, v, h) = (s.c.values(), s.v.values(), s.h.values());
    let mut c1 = vec![0.0; n];
    let mut v1 = vec![0.0; n];
    let mut h1 = vec![0.0; n];
    let dt = p.dt;
    for i in 0..n {
        let (f, g, k) = reaction_terms(c[i], v[i], h[i], p);
        c1[i] = c[i] + dt * (p.d_c * lap_c[i] + f);
        v1[i] = v[i] + dt * (p.d_v * lap_v[i] + g);
        h1[i] = h[i] + dt * (p.d_h * lap_h[i] + k);
    }

    let step = s.t + 1;
    for (field, values) in [("c", &c1), ("v", &v1), ("h", &h1)] {
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::IntegrationBlowUp { step, field, index });
        }
    }
    Ok(SystemState {
        c: Field3::from_values(dims, c1)?,
        v: Field3::from_values(dims, v1)?,
        h: Field3::from_values(dims, h1)?,
        t: step,
    })
}

/// Default initial-condition baseline `(c0, v0, h0)`.
pub const DEFAULT_BASELINE: (f64, f64, f64) = (0.1, 0.1, 0.1);
/// Default half-width of the uniform noise added to the baseline.
pub const DEFAULT_AMPLITUDE: f64 = 0.05;

/// Seeded uniform noise around a baseline; the c block is drawn first, then v, then h.
pub fn init_state(
    dims: GridDims,
    seed: u64,
    baseline: (f64, f64, f64),
    amplitude: f64,
) -> Result<SystemState> {
    dims.validate()?;
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::Config(format!(
            "noise amplitude must be finite and >= 0, got {amplitude}"
        )));
    }
    let n = dims.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = if amplitude > 0.0 {
        Some(Uniform::new_inclusive(-amplitude, amplitude).expect("valid bounds"))
    } else {
        None
    };
    let mut draw = |base: f64| -> Result<Field3> {
        let values = (0..n)
            .map(|_| match &noise {
                Some(u) => base + u.sample(&mut rng),
                None => base,
            })
            .collect();
        Field3::from_values(dims, values)
    };
    let c = draw(baseline.0)?;
    let v = draw(baseline.1)?;
    let h = draw(baseline.2)?;
    SystemState::new(c, v, h, 0)
}

/// Flattened `[C, V, H]` vectors recorded along a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dims: GridDims,
    pub dt: f64,
    /// Time step of each recorded vector, strictly increasing.
    pub steps: Vec<u64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(dims: GridDims, dt: f64) -> Self {
        Trajectory {
            dims,
            dt,
            steps: Vec::new(),
            states: Vec::new(),
        }
    }

    pub fn push(&mut self, step: u64, state: Vec<f64>) -> Result<()> {
        if state.len() != 3 * self.dims.len() {
            return Err(Error::Dimension(format!(
                "state vector has length {}, trajectory expects {}",
                state.len(),
                3 * self.dims.len()
            )));
        }
        if let Some(&last) = self.steps.last() {
            if step <= last {
                return Err(Error::Dimension(format!(
                    "step {step} recorded after step {last}"
                )));
            }
        }
        check_finite("trajectory state", &state)?;
        self.steps.push(step);
        self.states.push(state);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_dim(&self) -> usize {
        3 * self.dims.len()
    }

    /// True when the recorded steps are consecutive integers.
    pub fn is_contiguous(&self) -> bool {
        self.steps.windows(2).all(|w| w[1] == w[0] + 1)
    }

    /// Position of `step` in the recording, if present.
    pub fn position(&self, step: u64) -> Option<usize> {
        self.steps.binary_search(&step).ok()
    }

    /// Sub-trajectory covering steps `start..=end`.
    pub fn window(&self, start: u64, end: u64) -> Result<Trajectory> {
        let (Some(i), Some(j)) = (self.position(start), self.position(end)) else {
            return Err(Error::Config(format!(
                "trajectory does not cover steps {start}..={end}"
            )));
        };
        Ok(Trajectory {
            dims: self.dims,
            dt: self.dt,
            steps: self.steps[i..=j].to_vec(),
            states: self.states[i..=j].to_vec(),
        })
    }
}

/// Runs `steps` Euler steps from `s0`, handing every `record_every`-th state
/// (plus the initial and the final one) to `sink`. Returns the final state.
pub fn simulate_each(
    s0: &SystemState,
    p: &ModelParams,
    steps: u64,
    record_every: u64,
    mut sink: impl FnMut(&SystemState) -> Result<()>,
) -> Result<SystemState> {
    if steps < 1 {
        return Err(Error::Config("simulation needs at least one step".into()));
    }
    if record_every < 1 {
        return Err(Error::Config("record_every must be at least 1".into()));
    }
    p.validate()?;
    sink(s0)?;
    let mut state = s0.clone();
    for k in 1..=steps {
        state = euler_step(&state, p)?;
        if k % record_every == 0 || k == steps {
            sink(&state)?;
        }
    }
    Ok(state)
}

/// Runs `steps` Euler steps and records the flattened state on the given cadence.
pub fn simulate(
    s0: &SystemState,
    p: &ModelParams,
    steps: u64,
    record_every: u64,
) -> Result<Trajectory> {
    let mut traj = Trajectory::new(s0.dims(), p.dt);
    simulate_each(s0, p, steps, record_every, |s| traj.push(s.t, s.flatten()))?;
    Ok(traj)
}
