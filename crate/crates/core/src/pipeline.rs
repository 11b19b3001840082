//! The simulate -> train -> predict -> evaluate pipeline behind the CLI.
//!
//! A run lives in one output directory:
//!
//! ```text
//! out/config.toml      effective configuration
//! out/truth/           numerical solution, one snapshot per field and step
//! out/model/           trained surrogate
//! out/pred/            autoregressive rollout
//! out/eval/            NRMSE table, entropy and Lyapunov series, plane maps
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diagnostics::{
    evaluate_rollout, lyapunov_series, state_entropy, EvalPoint, EvalReport, LyapunovOptions,
    PerturbBlock, DEFAULT_ENTROPY_BINS,
};
use crate::error::{Error, Result};
use crate::esn::{train_surrogate, EsnConfig, FitReport};
use crate::grid::{slice_z, Field3, GridDims};
use crate::io::{self, TrajectoryWriter};
use crate::presets::{ModelVersion, EVAL_PLANE_Z};
use crate::rd_model::{
    init_state, simulate_each, FieldKind, ModelParams, SystemState, DEFAULT_AMPLITUDE,
    DEFAULT_BASELINE,
};

/// Everything one pipeline run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub version: Option<ModelVersion>,
    pub params: ModelParams,
    pub esn: EsnConfig,
    /// `(start, end)`; training uses states `start..=end`, the rollout starts at `end`.
    pub training_slot: (u64, u64),
    pub rollout_steps: u64,
    /// Simulated steps; at least `training_slot.1 + rollout_steps`.
    pub sim_steps: u64,
    pub points: Vec<EvalPoint>,
    pub seed: u64,
    pub baseline: (f64, f64, f64),
    pub amplitude: f64,
    pub entropy_bins: usize,
    pub lyap_renorm_every: u64,
    /// Steps before the rollout start used to align the perturbation.
    pub lyap_align_steps: u64,
    pub plane_z: usize,
    /// Steps at which truth and prediction planes are exported; empty means
    /// first, middle and last step of the rollout.
    pub plane_steps: Vec<u64>,
}

impl RunConfig {
    pub fn preset(version: ModelVersion) -> Self {
        let training_slot = version.training_slot();
        let rollout_steps = version.rollout_steps();
        let params = version.model_params();
        // Roughly one unit of model time for the perturbation to align.
        let align = ((1.0 / params.dt).round() as u64).min(training_slot.1);
        RunConfig {
            version: Some(version),
            params,
            esn: version.esn_config(),
            training_slot,
            rollout_steps,
            sim_steps: training_slot.1 + rollout_steps,
            points: version.eval_points(),
            seed: 1,
            baseline: DEFAULT_BASELINE,
            amplitude: DEFAULT_AMPLITUDE,
            entropy_bins: DEFAULT_ENTROPY_BINS,
            lyap_renorm_every: 10,
            lyap_align_steps: align,
            plane_z: EVAL_PLANE_Z,
            plane_steps: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.esn.validate()?;
        let (start, end) = self.training_slot;
        if end <= start {
            return Err(Error::Config(format!(
                "training slot ({start}, {end}) is empty"
            )));
        }
        if self.esn.warm_up as u64 >= end - start {
            return Err(Error::Config(format!(
                "WARM_UP = {} leaves no training samples in slot ({start}, {end})",
                self.esn.warm_up
            )));
        }
        if self.sim_steps < end {
            return Err(Error::Config(format!(
                "SIM_STEPS = {} does not cover the training slot end {end}",
                self.sim_steps
            )));
        }
        let dims = self.params.dims;
        for p in &self.points {
            if !dims.contains(p.x, p.y, p.z) {
                return Err(Error::Config(format!(
                    "evaluation point [{}, {}, {}] lies outside the grid",
                    p.x, p.y, p.z
                )));
            }
        }
        if self.plane_z >= dims.nz {
            return Err(Error::Config(format!(
                "PLANE_Z = {} outside the grid",
                self.plane_z
            )));
        }
        if self.entropy_bins < 2 {
            return Err(Error::Config("ENTROPY_BINS must be at least 2".into()));
        }
        if self.lyap_renorm_every < 1 {
            return Err(Error::Config("LYAP_RENORM_EVERY must be at least 1".into()));
        }
        Ok(())
    }

    pub fn rollout_start(&self) -> u64 {
        self.training_slot.1
    }

    /// Steps `start+1 ..= start+rollout` that the prediction covers.
    pub fn rollout_range(&self) -> (u64, u64) {
        let s = self.rollout_start();
        (s + 1, s + self.rollout_steps)
    }

    /// Applies `KEY = value` overrides from a flat TOML document.
    pub fn apply_overrides(&mut self, text: &str, base_dir: Option<&Path>) -> Result<()> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(format!("config parse error: {e}")))?;
        if let Some(v) = table.get("version") {
            let n = as_u64("version", v)?;
            let version = ModelVersion::from_number(n as u32)
                .ok_or_else(|| Error::Config(format!("unknown model version {n}")))?;
            *self = RunConfig::preset(version);
        }
        for (key, value) in &table {
            self.set(key, value, base_dir)?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, v: &toml::Value, base_dir: Option<&Path>) -> Result<()> {
        let p = &mut self.params;
        let e = &mut self.esn;
        match key {
            "version" => {}
            "nx" => p.dims.nx = as_usize(key, v)?,
            "ny" => p.dims.ny = as_usize(key, v)?,
            "nz" => p.dims.nz = as_usize(key, v)?,
            "d" | "dx" => p.dims.d = as_f64(key, v)?,
            "dt" => p.dt = as_f64(key, v)?,
            "D_c" => p.d_c = as_f64(key, v)?,
            "D_v" => p.d_v = as_f64(key, v)?,
            "D_h" => p.d_h = as_f64(key, v)?,
            "gamma" => p.gamma = as_f64(key, v)?,
            "delta" => p.delta = as_f64(key, v)?,
            "eta" => p.eta = as_f64(key, v)?,
            "kappa" => p.kappa = as_f64(key, v)?,
            "sigma" => p.sigma = as_f64(key, v)?,
            "chi" => p.chi = as_f64(key, v)?,
            "UNITS" => e.units = as_usize(key, v)?,
            "LEAK_RATE" => e.leak_rate = as_f64(key, v)?,
            "SPECTRAL_RADIUS" => e.spectral_radius = as_f64(key, v)?,
            "WARM_UP" => e.warm_up = as_usize(key, v)?,
            "RIDGE" => e.ridge = as_f64(key, v)?,
            "INPUT_SCALING" => e.input_scaling = as_f64(key, v)?,
            "RC_DENSITY" => e.recurrent_density = as_f64(key, v)?,
            "ESN_SEED" => e.seed = as_u64(key, v)?,
            "USE_BIAS" => e.use_bias = as_bool(key, v)?,
            "NORMALIZE_INPUTS" => e.normalize_inputs = as_bool(key, v)?,
            "TRAIN_START" => self.training_slot.0 = as_u64(key, v)?,
            "TRAIN_END" => self.training_slot.1 = as_u64(key, v)?,
            "ROLLOUT_STEPS" => self.rollout_steps = as_u64(key, v)?,
            "SIM_STEPS" => self.sim_steps = as_u64(key, v)?,
            "SEED" => self.seed = as_u64(key, v)?,
            "BASELINE_C" => self.baseline.0 = as_f64(key, v)?,
            "BASELINE_V" => self.baseline.1 = as_f64(key, v)?,
            "BASELINE_H" => self.baseline.2 = as_f64(key, v)?,
            "AMPLITUDE" => self.amplitude = as_f64(key, v)?,
            "ENTROPY_BINS" => self.entropy_bins = as_usize(key, v)?,
            "LYAP_RENORM_EVERY" => self.lyap_renorm_every = as_u64(key, v)?,
            "LYAP_ALIGN_STEPS" => self.lyap_align_steps = as_u64(key, v)?,
            "PLANE_Z" => self.plane_z = as_usize(key, v)?,
            "PLANE_STEPS" => {
                let arr = v
                    .as_array()
                    .ok_or_else(|| Error::Config("PLANE_STEPS must be an array".into()))?;
                self.plane_steps = arr.iter().map(|x| as_u64(key, x)).collect::<Result<_>>()?;
            }
            "POINTS" => {
                let s = v
                    .as_str()
                    .ok_or_else(|| Error::Config("POINTS must be a string".into()))?;
                self.points = parse_points(s)?;
            }
            "POINTS_FILE" => {
                let s = v
                    .as_str()
                    .ok_or_else(|| Error::Config("POINTS_FILE must be a path string".into()))?;
                let path = match base_dir {
                    Some(b) => b.join(s),
                    None => PathBuf::from(s),
                };
                self.points = load_points(&path)?;
            }
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Flat TOML text of every effective setting; feeding it back through
    /// [`RunConfig::apply_overrides`] reproduces this configuration.
    pub fn to_config_text(&self) -> String {
        let p = &self.params;
        let e = &self.esn;
        let mut s = String::new();
        if let Some(v) = self.version {
            let _ = writeln!(s, "# preset: model version {}", v.number());
        }
        let _ = writeln!(s, "# grid and time step");
        let _ = writeln!(
            s,
            "nx = {}\nny = {}\nnz = {}",
            p.dims.nx, p.dims.ny, p.dims.nz
        );
        let _ = writeln!(s, "dx = {:?}\ndt = {:?}", p.dims.d, p.dt);
        let _ = writeln!(s, "# model parameters");
        for (k, v) in [
            ("D_c", p.d_c),
            ("D_v", p.d_v),
            ("D_h", p.d_h),
            ("gamma", p.gamma),
            ("delta", p.delta),
            ("eta", p.eta),
            ("kappa", p.kappa),
            ("sigma", p.sigma),
            ("chi", p.chi),
        ] {
            let _ = writeln!(s, "{k} = {v:?}");
        }
        let _ = writeln!(s, "# echo state network");
        let _ = writeln!(s, "UNITS = {}", e.units);
        let _ = writeln!(s, "LEAK_RATE = {:?}", e.leak_rate);
        let _ = writeln!(s, "SPECTRAL_RADIUS = {:?}", e.spectral_radius);
        let _ = writeln!(s, "WARM_UP = {}", e.warm_up);
        let _ = writeln!(s, "RIDGE = {:?}", e.ridge);
        let _ = writeln!(s, "INPUT_SCALING = {:?}", e.input_scaling);
        let _ = writeln!(s, "RC_DENSITY = {:?}", e.recurrent_density);
        let _ = writeln!(s, "ESN_SEED = {}", e.seed);
        let _ = writeln!(s, "USE_BIAS = {}", e.use_bias);
        let _ = writeln!(s, "NORMALIZE_INPUTS = {}", e.normalize_inputs);
        let _ = writeln!(s, "# run");
        let _ = writeln!(s, "TRAIN_START = {}", self.training_slot.0);
        let _ = writeln!(s, "TRAIN_END = {}", self.training_slot.1);
        let _ = writeln!(s, "ROLLOUT_STEPS = {}", self.rollout_steps);
        let _ = writeln!(s, "SIM_STEPS = {}", self.sim_steps);
        let _ = writeln!(s, "SEED = {}", self.seed);
        let _ = writeln!(s, "BASELINE_C = {:?}", self.baseline.0);
        let _ = writeln!(s, "BASELINE_V = {:?}", self.baseline.1);
        let _ = writeln!(s, "BASELINE_H = {:?}", self.baseline.2);
        let _ = writeln!(s, "AMPLITUDE = {:?}", self.amplitude);
        let _ = writeln!(s, "# diagnostics");
        let _ = writeln!(s, "ENTROPY_BINS = {}", self.entropy_bins);
        let _ = writeln!(s, "LYAP_RENORM_EVERY = {}", self.lyap_renorm_every);
        let _ = writeln!(s, "LYAP_ALIGN_STEPS = {}", self.lyap_align_steps);
        let _ = writeln!(s, "PLANE_Z = {}", self.plane_z);
        let steps: Vec<String> = self.plane_steps.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "PLANE_STEPS = [{}]", steps.join(", "));
        let _ = writeln!(s, "POINTS = \"{}\"", format_points(&self.points));
        s
    }
}

fn as_f64(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::Config(format!("{key} must be a number"))),
    }
}

fn as_u64(key: &str, v: &toml::Value) -> Result<u64> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(Error::Config(format!(
            "{key} must be a non-negative integer"
        ))),
    }
}

fn as_usize(key: &str, v: &toml::Value) -> Result<usize> {
    as_u64(key, v).map(|x| x as usize)
}

fn as_bool(key: &str, v: &toml::Value) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| Error::Config(format!("{key} must be true or false")))
}

/// `"x,y,z; x,y,z; ..."`.
pub fn parse_points(s: &str) -> Result<Vec<EvalPoint>> {
    s.split([';', '\n'])
        .map(str::trim)
        .filter(|t| !t.is_empty() && !t.starts_with('#'))
        .map(|t| {
            let parts: Vec<&str> = t.split(',').map(str::trim).collect();
            let nums: Vec<usize> = parts
                .iter()
                .map(|p| p.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Config(format!("bad evaluation point {t:?}")))?;
            match nums[..] {
                [x, y, z] => Ok(EvalPoint::new(x, y, z)),
                _ => Err(Error::Config(format!("evaluation point {t:?} needs x,y,z"))),
            }
        })
        .collect()
}

pub fn format_points(points: &[EvalPoint]) -> String {
    points
        .iter()
        .map(|p| format!("{},{},{}", p.x, p.y, p.z))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Points file: one `x,y,z` per line, `#` comments allowed.
pub fn load_points(path: &Path) -> Result<Vec<EvalPoint>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_points(&text)
}

/// Sub-directories of a run.
#[derive(Debug, Clone)]
pub struct RunLayout {
    pub root: PathBuf,
}

impl RunLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunLayout { root: root.into() }
    }
    pub fn config(&self) -> PathBuf {
        self.root.join("config.toml")
    }
    pub fn truth(&self) -> PathBuf {
        self.root.join("truth")
    }
    pub fn model(&self) -> PathBuf {
        self.root.join("model")
    }
    pub fn pred(&self) -> PathBuf {
        self.root.join("pred")
    }
    pub fn eval(&self) -> PathBuf {
        self.root.join("eval")
    }
}

fn initial_state(cfg: &RunConfig) -> Result<SystemState> {
    init_state(cfg.params.dims, cfg.seed, cfg.baseline, cfg.amplitude)
}

fn write_config(cfg: &RunConfig, layout: &RunLayout) -> Result<()> {
    io::write_text(&layout.config(), &cfg.to_config_text())
}

/// Simulates `cfg.sim_steps` steps and writes every step under `truth/`.
pub fn cmd_simulate(cfg: &RunConfig, layout: &RunLayout) -> Result<io::RunManifest> {
    cfg.validate()?;
    write_config(cfg, layout)?;
    let s0 = initial_state(cfg)?;
    let mut writer = TrajectoryWriter::create(&layout.truth(), cfg.params.dims)?;
    simulate_each(&s0, &cfg.params, cfg.sim_steps, 1, |s| {
        writer.write_state(s)
    })?;
    writer.finish("simulation", cfg.params, None, cfg.seed, cfg.sim_steps, 1)
}

#[derive(Debug, Clone, Serialize)]
struct FitSummary {
    train_start: u64,
    train_end: u64,
    warm_up: usize,
    samples: usize,
    fit_nrmse: f64,
}

/// Trains on the training slot of `truth/` and writes `model/`.
pub fn cmd_train(cfg: &RunConfig, layout: &RunLayout) -> Result<FitReport> {
    cfg.validate()?;
    let (start, end) = cfg.training_slot;
    let traj = io::load_trajectory(&layout.truth(), start, end)?;
    let expected = (end - start + 1) as usize;
    if traj.len() != expected || !traj.is_contiguous() {
        let missing = (start..=end)
            .find(|s| traj.position(*s).is_none())
            .unwrap_or(end);
        return Err(Error::Inventory(
            layout
                .truth()
                .join(io::snapshot_name(FieldKind::C, missing)),
        ));
    }
    let (model, fit) = train_surrogate(&traj, &cfg.esn)?;
    drop(traj);
    io::save_model(&layout.model(), &model)?;
    let summary = FitSummary {
        train_start: start,
        train_end: end,
        warm_up: cfg.esn.warm_up,
        samples: fit.samples,
        fit_nrmse: fit.nrmse,
    };
    io::write_text(
        &layout.model().join("fit.json"),
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    Ok(fit)
}

/// Rolls the trained model out from the training-slot end into `pred/`.
pub fn cmd_predict(cfg: &RunConfig, layout: &RunLayout) -> Result<io::RunManifest> {
    cfg.validate()?;
    let model = io::load_model(&layout.model())?;
    let truth_manifest = io::load_run_manifest(&layout.truth())?;
    let start = cfg.rollout_start();
    let seed_input = io::load_step(&layout.truth(), &truth_manifest, start)?;
    let preds = model.rollout(&seed_input, cfg.rollout_steps as usize)?;
    let mut writer = TrajectoryWriter::create(&layout.pred(), cfg.params.dims)?;
    for (k, y) in preds.iter().enumerate() {
        writer.write_flat(start + 1 + k as u64, y)?;
    }
    writer.finish(
        "prediction",
        cfg.params,
        Some(cfg.esn),
        cfg.seed,
        cfg.rollout_steps,
        1,
    )
}

/// Everything `cmd_evaluate` produced.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: EvalReport,
    pub lyapunov: Vec<(PerturbBlock, f64)>,
    pub files: Vec<PathBuf>,
}

fn block_name(b: PerturbBlock) -> &'static str {
    match b {
        PerturbBlock::All => "all",
        PerturbBlock::Field(f) => f.name(),
    }
}

/// Entropy rows `step,source,C,V,H`.
fn entropy_rows(
    out: &mut String,
    source: &str,
    steps: &[u64],
    states: &[Vec<f64>],
    dims: &GridDims,
    bins: usize,
) -> Result<()> {
    for (step, state) in steps.iter().zip(states) {
        let [c, v, h] = state_entropy(state, dims, bins)?;
        let _ = writeln!(out, "{step},{source},{c:e},{v:e},{h:e}");
    }
    Ok(())
}

/// Scores `pred/` against `truth/` and writes the reports under `eval/`.
pub fn cmd_evaluate(cfg: &RunConfig, layout: &RunLayout, render: bool) -> Result<Evaluation> {
    cfg.validate()?;
    let dims = cfg.params.dims;
    let pred_manifest = io::load_run_manifest(&layout.pred())?;
    let (first, last) = cfg.rollout_range();
    if cfg.rollout_steps == 0 || pred_manifest.recorded_steps.is_empty() {
        return Err(Error::Config("no predicted steps to evaluate".into()));
    }
    let pred = io::load_trajectory(&layout.pred(), first, last)?;
    let truth = io::load_trajectory(&layout.truth(), first, last)?;
    if pred.steps != truth.steps || pred.len() as u64 != cfg.rollout_steps {
        return Err(Error::Config(format!(
            "prediction and reference do not both cover steps {first}..={last}"
        )));
    }
    let eval_dir = layout.eval();
    let mut files = Vec::new();

    let report = evaluate_rollout(&pred.states, &truth.states, &cfg.points, &dims, first)?;
    let nrmse_path = eval_dir.join("nrmse.csv");
    io::write_text(&nrmse_path, &report.to_csv())?;
    files.push(nrmse_path);
    let table_path = eval_dir.join("nrmse.txt");
    io::write_text(&table_path, &report.to_table())?;
    files.push(table_path);

    let mut entropy = String::from("step,source,C,V,H\n");
    entropy_rows(
        &mut entropy,
        "truth",
        &truth.steps,
        &truth.states,
        &dims,
        cfg.entropy_bins,
    )?;
    entropy_rows(
        &mut entropy,
        "pred",
        &pred.steps,
        &pred.states,
        &dims,
        cfg.entropy_bins,
    )?;
    let entropy_path = eval_dir.join("entropy.csv");
    io::write_text(&entropy_path, &entropy)?;
    files.push(entropy_path);

    // Finite-time exponents over the rollout window of the numerical solution.
    let truth_manifest = io::load_run_manifest(&layout.truth())?;
    let start = cfg.rollout_start();
    let align = cfg.lyap_align_steps.min(start);
    let origin = start - align;
    let s0 = SystemState::from_flat(
        dims,
        &io::load_step(&layout.truth(), &truth_manifest, origin)?,
        origin,
    )?;
    let mut lyap_csv = String::from("block,start_step,end_step,exponent\n");
    let mut lyapunov = Vec::new();
    let renorm = cfg.lyap_renorm_every.min(cfg.rollout_steps).max(1);
    let blocks = [
        PerturbBlock::All,
        PerturbBlock::Field(FieldKind::C),
        PerturbBlock::Field(FieldKind::V),
        PerturbBlock::Field(FieldKind::H),
    ];
    for block in blocks {
        let run = lyapunov_series(
            &s0,
            &cfg.params,
            &LyapunovOptions {
                horizon: cfg.rollout_steps,
                eps: None,
                renorm_every: renorm,
                seed: cfg.seed,
                block,
                align_steps: align,
            },
        )?;
        for w in &run.windows {
            let _ = writeln!(
                lyap_csv,
                "{},{},{},{:e}",
                block_name(block),
                w.start_step,
                w.end_step,
                w.exponent
            );
        }
        let _ = writeln!(
            lyap_csv,
            "{},{},{},{:e}",
            block_name(block),
            start,
            last,
            run.exponent
        );
        lyapunov.push((block, run.exponent));
    }
    let lyap_path = eval_dir.join("lyapunov.csv");
    io::write_text(&lyap_path, &lyap_csv)?;
    files.push(lyap_path);

    let plane_steps: Vec<u64> = if cfg.plane_steps.is_empty() {
        let mut v = vec![first, first + (last - first) / 2, last];
        v.dedup();
        v
    } else {
        cfg.plane_steps.clone()
    };
    let planes = eval_dir.join("planes");
    let n = dims.len();
    for step in plane_steps {
        let (Some(ip), Some(it)) = (pred.position(step), truth.position(step)) else {
            return Err(Error::Config(format!(
                "plane step {step} lies outside the rollout window {first}..={last}"
            )));
        };
        for (source, state) in [("truth", &truth.states[it]), ("pred", &pred.states[ip])] {
            for field in FieldKind::ALL {
                let b = field.block();
                let f = Field3::from_values(dims, state[b * n..(b + 1) * n].to_vec())?;
                let plane = slice_z(&f, cfg.plane_z)?;
                let stem = format!("{source}_{}_{step:06}", field.lower());
                let csv = planes.join(format!("{stem}.csv"));
                io::write_text(&csv, &io::plane_to_csv(&plane))?;
                files.push(csv);
                if render {
                    let png = planes.join(format!("{stem}.png"));
                    io::render_plane_png(&png, &plane, 8)?;
                    files.push(png);
                }
            }
        }
    }
    Ok(Evaluation {
        report,
        lyapunov,
        files,
    })
}

/// Outcome of a full pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineSummary {
    pub fit: FitReport,
    pub evaluation: Evaluation,
}

/// simulate, train, predict and evaluate in one go.
pub fn cmd_report(cfg: &RunConfig, layout: &RunLayout, render: bool) -> Result<PipelineSummary> {
    if cfg.rollout_steps == 0 {
        return Err(Error::Config(
            "ROLLOUT_STEPS must be positive for a report".into(),
        ));
    }
    cmd_simulate(cfg, layout)?;
    let fit = cmd_train(cfg, layout)?;
    cmd_predict(cfg, layout)?;
    let evaluation = cmd_evaluate(cfg, layout, render)?;
    Ok(PipelineSummary { fit, evaluation })
}
