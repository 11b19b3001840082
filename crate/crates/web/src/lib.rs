//! Browser bindings: an interactive simulation with a live z-slice, an ESN
//! forecast at a probe cell, and entropy / Lyapunov readouts.
//!
//! The exported methods are thin wrappers over plain Rust ones so the logic
//! can be exercised by native tests.

use rdesn::diagnostics::{lyapunov_series, nrmse, state_entropy, LyapunovOptions};
use rdesn::esn::train_surrogate;
use rdesn::grid::{slice_z, GridDims};
use rdesn::io::colormap;
use rdesn::rd_model::{
    euler_step, init_state, simulate, FieldKind, ModelParams, SystemState, DEFAULT_AMPLITUDE,
    DEFAULT_BASELINE,
};
use rdesn::{Error, ModelVersion, PerturbBlock};
use wasm_bindgen::prelude::*;

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

fn preset(version: u32, n: usize) -> Result<ModelParams, Error> {
    let v = ModelVersion::from_number(version)
        .ok_or_else(|| Error::Config(format!("unknown model version {version}")))?;
    let mut p = v.model_params();
    p.dims = GridDims::cube(n, 1.0)?;
    Ok(p)
}

fn parse_field(name: &str) -> Result<FieldKind, Error> {
    name.parse()
}

/// A running simulation the page steps and paints.
#[wasm_bindgen]
pub struct Simulation {
    params: ModelParams,
    state: SystemState,
}

impl Simulation {
    pub fn create(version: u32, n: usize, seed: u64) -> Result<Simulation, Error> {
        let params = preset(version, n)?;
        let state = init_state(params.dims, seed, DEFAULT_BASELINE, DEFAULT_AMPLITUDE)?;
        Ok(Simulation { params, state })
    }

    pub fn set_parameters(&mut self, chi: f64, d_c: f64, d_v: f64, d_h: f64) -> Result<(), Error> {
        let mut p = self.params;
        p.chi = chi;
        p.d_c = d_c;
        p.d_v = d_v;
        p.d_h = d_h;
        p.validate()?;
        self.params = p;
        Ok(())
    }

    pub fn run(&mut self, steps: u32) -> Result<(), Error> {
        for _ in 0..steps {
            self.state = euler_step(&self.state, &self.params)?;
        }
        Ok(())
    }

    /// RGBA pixels (x across, y down) of one field on plane `z`, colour
    /// scaled to the plane's own range.
    pub fn rgba(&self, field: &str, z: usize) -> Result<Vec<u8>, Error> {
        let plane = slice_z(self.state.field(parse_field(field)?), z)?;
        let (lo, hi) = plane
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        let span = if hi > lo { hi - lo } else { 1.0 };
        let (nx, ny) = plane.dim();
        let mut out = Vec::with_capacity(nx * ny * 4);
        for y in 0..ny {
            for x in 0..nx {
                let [r, g, b] = colormap((plane[[x, y]] - lo) / span);
                out.extend_from_slice(&[r, g, b, 255]);
            }
        }
        Ok(out)
    }

    pub fn exponent(&self, horizon: u32) -> Result<f64, Error> {
        let run = lyapunov_series(
            &self.state,
            &self.params,
            &LyapunovOptions {
                horizon: horizon as u64,
                renorm_every: 10.min(horizon as u64).max(1),
                block: PerturbBlock::All,
                ..LyapunovOptions::default()
            },
        )?;
        Ok(run.exponent)
    }
}

#[wasm_bindgen]
impl Simulation {
    #[wasm_bindgen(constructor)]
    pub fn new(version: u32, n: usize, seed: u64) -> Result<Simulation, JsError> {
        Simulation::create(version, n, seed).map_err(js)
    }

    /// Changes `chi` and the diffusion coefficients; rejected if unstable.
    #[wasm_bindgen(js_name = setParameters)]
    pub fn set_parameters_js(
        &mut self,
        chi: f64,
        d_c: f64,
        d_v: f64,
        d_h: f64,
    ) -> Result<(), JsError> {
        self.set_parameters(chi, d_c, d_v, d_h).map_err(js)
    }

    pub fn step(&mut self, steps: u32) -> Result<(), JsError> {
        self.run(steps).map_err(js)
    }

    #[wasm_bindgen(getter)]
    pub fn time(&self) -> u64 {
        self.state.t
    }

    #[wasm_bindgen(getter)]
    pub fn size(&self) -> usize {
        self.params.dims.nx
    }

    #[wasm_bindgen(js_name = sliceRgba)]
    pub fn slice_rgba(&self, field: &str, z: usize) -> Result<Vec<u8>, JsError> {
        self.rgba(field, z).map_err(js)
    }

    /// Spatial entropy (bits) of C, V and H.
    pub fn entropy(&self) -> Result<Vec<f64>, JsError> {
        let dims = self.params.dims;
        state_entropy(&self.state.flatten(), &dims, 64)
            .map(|e| e.to_vec())
            .map_err(js)
    }

    /// Largest finite-time Lyapunov exponent over the next `horizon` steps.
    pub fn lyapunov(&self, horizon: u32) -> Result<f64, JsError> {
        self.exponent(horizon).map_err(js)
    }
}

/// Truth and ESN prediction at one probe cell over the rollout.
#[wasm_bindgen]
pub struct Forecast {
    truth: Vec<f64>,
    pred: Vec<f64>,
    nrmse: f64,
    fit_nrmse: f64,
}

#[wasm_bindgen]
impl Forecast {
    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn pred(&self) -> Vec<f64> {
        self.pred.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn nrmse(&self) -> f64 {
        self.nrmse
    }
    #[wasm_bindgen(getter, js_name = fitNrmse)]
    pub fn fit_nrmse(&self) -> f64 {
        self.fit_nrmse
    }
}

/// Simulates `train + rollout` steps on an `n^3` grid, trains an ESN of
/// `units` on the first part and forecasts the rest.
#[allow(clippy::too_many_arguments)]
pub fn run_forecast(
    version: u32,
    n: usize,
    train: u32,
    rollout: u32,
    units: usize,
    seed: u64,
    field: &str,
    probe: [usize; 3],
) -> Result<Forecast, Error> {
    let p = preset(version, n)?;
    let v = ModelVersion::from_number(version).expect("checked by preset");
    let field = parse_field(field)?;
    let [x, y, z] = probe;
    if !p.dims.contains(x, y, z) {
        return Err(Error::IndexOutOfRange(format!("probe ({x},{y},{z})")));
    }
    let mut cfg = v.esn_config();
    cfg.units = units;
    cfg.seed = seed;
    cfg.warm_up = cfg.warm_up.min(train as usize / 2);
    let s0 = init_state(p.dims, seed, DEFAULT_BASELINE, DEFAULT_AMPLITUDE)?;
    let traj = simulate(&s0, &p, (train + rollout) as u64, 1)?;
    let (model, fit) = train_surrogate(&traj.window(0, train as u64)?, &cfg)?;
    let pred = model.rollout(&traj.states[train as usize], rollout as usize)?;
    let idx = field.block() * p.dims.len() + p.dims.idx(x, y, z);
    let truth: Vec<f64> = traj.states[train as usize + 1..]
        .iter()
        .map(|s| s[idx])
        .collect();
    let pred: Vec<f64> = pred.iter().map(|s| s[idx]).collect();
    let score = nrmse(&pred, &truth)?;
    Ok(Forecast {
        truth,
        pred,
        nrmse: score.value,
        fit_nrmse: fit.nrmse,
    })
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn forecast(
    version: u32,
    n: usize,
    train: u32,
    rollout: u32,
    units: usize,
    seed: u64,
    field: &str,
    x: usize,
    y: usize,
    z: usize,
) -> Result<Forecast, JsError> {
    run_forecast(version, n, train, rollout, units, seed, field, [x, y, z]).map_err(js)
}
