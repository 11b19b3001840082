//! On-disk formats.
//!
//! Every numeric array is a raw little-endian `f64` file next to a JSON
//! sidecar with the same stem. Directories of arrays (trajectories, trained
//! models) carry a JSON manifest listing every file with its role.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esn::{EsnConfig, FieldScaler, Readout, Reservoir, Surrogate};
use crate::grid::{Field3, GridDims};
use crate::rd_model::{FieldKind, ModelParams, SystemState, Trajectory};

/// Stamp written into every manifest; loads refuse anything else.
pub const FORMAT_VERSION: &str = "rdesn/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

const DATA_EXT: &str = "f64";
const META_EXT: &str = "json";

fn sidecar_path(data: &Path) -> PathBuf {
    data.with_extension(META_EXT)
}

fn write_f64s(path: &Path, values: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_f64s(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Inventory(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    let want = expected * 8;
    if bytes.len() % 8 != 0 || bytes.len() < want {
        return Err(Error::CorruptFile {
            path: path.to_path_buf(),
            reason: format!("{} bytes, expected {want}", bytes.len()),
        });
    }
    if bytes.len() > want {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!(
                "payload holds {} values but the sidecar describes {expected}",
                bytes.len() / 8
            ),
        });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::Format {
            path: path.to_path_buf(),
            reason: "missing metadata sidecar".into(),
        },
        _ => Error::io(path, e),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Sidecar of a single field snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub d: f64,
    pub field_name: String,
    pub time_step: u64,
}

impl SnapshotMeta {
    pub fn new(dims: GridDims, field_name: impl Into<String>, time_step: u64) -> Self {
        SnapshotMeta {
            nx: dims.nx,
            ny: dims.ny,
            nz: dims.nz,
            d: dims.d,
            field_name: field_name.into(),
            time_step,
        }
    }

    pub fn dims(&self) -> GridDims {
        GridDims {
            nx: self.nx,
            ny: self.ny,
            nz: self.nz,
            d: self.d,
        }
    }
}

/// Writes `path` (raw values) and its `.json` sidecar.
pub fn save_snapshot(f: &Field3, path: &Path, meta: &SnapshotMeta) -> Result<()> {
    if meta.dims() != f.dims() {
        return Err(Error::Dimension(
            "snapshot metadata does not describe the field's grid".into(),
        ));
    }
    write_f64s(path, f.values())?;
    write_json(&sidecar_path(path), meta)
}

pub fn load_snapshot(path: &Path) -> Result<(Field3, SnapshotMeta)> {
    let meta: SnapshotMeta = read_json(&sidecar_path(path))?;
    let dims = meta.dims();
    dims.validate().map_err(|e| Error::Format {
        path: sidecar_path(path),
        reason: e.to_string(),
    })?;
    let values = read_f64s(path, dims.len())?;
    let field = Field3::from_values(dims, values).map_err(|e| Error::CorruptFile {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    Ok((field, meta))
}

/// Sidecar of a dense matrix or vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayMeta {
    pub shape: Vec<usize>,
    pub role: String,
    pub config: Option<EsnConfig>,
    pub seed: Option<u64>,
}

pub fn save_matrix(path: &Path, m: &Array2<f64>, meta: &ArrayMeta) -> Result<()> {
    if meta.shape != [m.nrows(), m.ncols()] {
        return Err(Error::Dimension("matrix sidecar shape mismatch".into()));
    }
    let m = m.as_standard_layout();
    write_f64s(path, m.as_slice().expect("standard layout"))?;
    write_json(&sidecar_path(path), meta)
}

pub fn load_matrix(path: &Path) -> Result<(Array2<f64>, ArrayMeta)> {
    let meta: ArrayMeta = read_json(&sidecar_path(path))?;
    let [rows, cols] = meta.shape[..] else {
        return Err(Error::Format {
            path: sidecar_path(path),
            reason: format!("expected a 2-D shape, got {:?}", meta.shape),
        });
    };
    let values = read_f64s(path, rows * cols)?;
    let m = Array2::from_shape_vec((rows, cols), values).expect("length checked");
    Ok((m, meta))
}

pub fn save_vector(path: &Path, v: &Array1<f64>, meta: &ArrayMeta) -> Result<()> {
    if meta.shape != [v.len()] {
        return Err(Error::Dimension("vector sidecar shape mismatch".into()));
    }
    write_f64s(path, &v.to_vec())?;
    write_json(&sidecar_path(path), meta)
}

pub fn load_vector(path: &Path) -> Result<(Array1<f64>, ArrayMeta)> {
    let meta: ArrayMeta = read_json(&sidecar_path(path))?;
    let [len] = meta.shape[..] else {
        return Err(Error::Format {
            path: sidecar_path(path),
            reason: format!("expected a 1-D shape, got {:?}", meta.shape),
        });
    };
    Ok((Array1::from(read_f64s(path, len)?), meta))
}

/// One file listed in a manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub role: String,
    /// Relative to the manifest's directory.
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<u64>,
}

/// Manifest of a trained model directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub format_version: String,
    pub tool_version: String,
    pub config: EsnConfig,
    pub input_dim: usize,
    pub output_dim: usize,
    pub scaler: Option<FieldScaler>,
    pub files: Vec<FileEntry>,
}

pub const MODEL_MANIFEST: &str = "model.json";

const MODEL_ROLES: [&str; 5] = ["W", "W_in", "W_out", "b", "x"];

fn role_file(role: &str) -> String {
    format!("{}.{DATA_EXT}", role.to_ascii_lowercase())
}

/// Writes a trained surrogate (weights, bias and reservoir state) into `dir`.
pub fn save_model(dir: &Path, model: &Surrogate) -> Result<()> {
    ensure_dir(dir)?;
    let cfg = model.reservoir.config;
    let meta = |role: &str, shape: Vec<usize>| ArrayMeta {
        shape,
        role: role.to_string(),
        config: Some(cfg),
        seed: Some(cfg.seed),
    };
    let r = &model.reservoir;
    let ro = &model.readout;
    save_matrix(
        &dir.join(role_file("W")),
        &r.w,
        &meta("W", vec![r.w.nrows(), r.w.ncols()]),
    )?;
    save_matrix(
        &dir.join(role_file("W_in")),
        &r.w_in,
        &meta("W_in", vec![r.w_in.nrows(), r.w_in.ncols()]),
    )?;
    save_matrix(
        &dir.join(role_file("W_out")),
        &ro.w_out,
        &meta("W_out", vec![ro.w_out.nrows(), ro.w_out.ncols()]),
    )?;
    save_vector(
        &dir.join(role_file("b")),
        &ro.bias,
        &meta("b", vec![ro.bias.len()]),
    )?;
    save_vector(&dir.join(role_file("x")), &r.x, &meta("x", vec![r.x.len()]))?;

    let files = MODEL_ROLES
        .iter()
        .map(|role| FileEntry {
            role: role.to_string(),
            path: role_file(role),
            step: None,
        })
        .collect();
    let manifest = ModelManifest {
        format_version: FORMAT_VERSION.into(),
        tool_version: TOOL_VERSION.into(),
        config: cfg,
        input_dim: r.input_dim(),
        output_dim: ro.output_dim(),
        scaler: model.scaler.clone(),
        files,
    };
    write_json(&dir.join(MODEL_MANIFEST), &manifest)
}

fn check_version(found: &str) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: found.into(),
            expected: FORMAT_VERSION.into(),
        });
    }
    Ok(())
}

pub fn load_model(dir: &Path) -> Result<Surrogate> {
    let manifest: ModelManifest = read_json(&dir.join(MODEL_MANIFEST))?;
    check_version(&manifest.format_version)?;
    let path_of = |role: &str| -> Result<PathBuf> {
        let entry = manifest
            .files
            .iter()
            .find(|f| f.role == role)
            .ok_or_else(|| Error::Inventory(dir.join(role_file(role))))?;
        let p = dir.join(&entry.path);
        if !p.exists() {
            return Err(Error::Inventory(p));
        }
        Ok(p)
    };
    let (w, _) = load_matrix(&path_of("W")?)?;
    let (w_in, _) = load_matrix(&path_of("W_in")?)?;
    let (w_out, _) = load_matrix(&path_of("W_out")?)?;
    let (bias, _) = load_vector(&path_of("b")?)?;
    let (x, _) = load_vector(&path_of("x")?)?;
    let n = manifest.config.units;
    let consistent = w.dim() == (n, n)
        && w_in.dim() == (n, manifest.input_dim)
        && w_out.dim() == (manifest.output_dim, n)
        && bias.len() == manifest.output_dim
        && x.len() == n;
    if !consistent {
        return Err(Error::Format {
            path: dir.join(MODEL_MANIFEST),
            reason: "array shapes disagree with the manifest".into(),
        });
    }
    Ok(Surrogate {
        reservoir: Reservoir {
            w,
            w_in,
            x,
            config: manifest.config,
        },
        readout: Readout { w_out, bias },
        scaler: manifest.scaler,
    })
}

/// Manifest of a directory of per-step field snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: String,
    pub tool_version: String,
    /// `"simulation"` or `"prediction"`.
    pub kind: String,
    pub params: ModelParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub esn: Option<EsnConfig>,
    pub seed: u64,
    pub steps: u64,
    pub record_every: u64,
    pub recorded_steps: Vec<u64>,
    pub files: Vec<FileEntry>,
}

pub const RUN_MANIFEST: &str = "manifest.json";

pub fn snapshot_name(field: FieldKind, step: u64) -> String {
    format!("{}_{step:06}.{DATA_EXT}", field.lower())
}

/// Streams recorded states of a run to disk, one snapshot per field and step.
pub struct TrajectoryWriter {
    dir: PathBuf,
    dims: GridDims,
    steps: Vec<u64>,
    files: Vec<FileEntry>,
}

impl TrajectoryWriter {
    pub fn create(dir: &Path, dims: GridDims) -> Result<Self> {
        ensure_dir(dir)?;
        Ok(TrajectoryWriter {
            dir: dir.to_path_buf(),
            dims,
            steps: Vec::new(),
            files: Vec::new(),
        })
    }

    pub fn write_state(&mut self, s: &SystemState) -> Result<()> {
        self.write_flat(s.t, &s.flatten())
    }

    pub fn write_flat(&mut self, step: u64, flat: &[f64]) -> Result<()> {
        let n = self.dims.len();
        if flat.len() != 3 * n {
            return Err(Error::Dimension(format!(
                "state vector has length {}, expected {}",
                flat.len(),
                3 * n
            )));
        }
        for field in FieldKind::ALL {
            let b = field.block();
            let f = Field3::from_values(self.dims, flat[b * n..(b + 1) * n].to_vec())?;
            let name = snapshot_name(field, step);
            save_snapshot(
                &f,
                &self.dir.join(&name),
                &SnapshotMeta::new(self.dims, field.lower(), step),
            )?;
            self.files.push(FileEntry {
                role: field.lower().into(),
                path: name,
                step: Some(step),
            });
        }
        self.steps.push(step);
        Ok(())
    }

    /// Writes the manifest after checking every listed file exists.
    pub fn finish(
        self,
        kind: &str,
        params: ModelParams,
        esn: Option<EsnConfig>,
        seed: u64,
        steps: u64,
        record_every: u64,
    ) -> Result<RunManifest> {
        for f in &self.files {
            let p = self.dir.join(&f.path);
            if !p.exists() {
                return Err(Error::Inventory(p));
            }
        }
        let manifest = RunManifest {
            format_version: FORMAT_VERSION.into(),
            tool_version: TOOL_VERSION.into(),
            kind: kind.into(),
            params,
            esn,
            seed,
            steps,
            record_every,
            recorded_steps: self.steps,
            files: self.files,
        };
        write_json(&self.dir.join(RUN_MANIFEST), &manifest)?;
        Ok(manifest)
    }
}

pub fn load_run_manifest(dir: &Path) -> Result<RunManifest> {
    let m: RunManifest = read_json(&dir.join(RUN_MANIFEST))?;
    check_version(&m.format_version)?;
    Ok(m)
}

/// Loads one recorded step as a flattened `[C, V, H]` vector.
pub fn load_step(dir: &Path, manifest: &RunManifest, step: u64) -> Result<Vec<f64>> {
    let dims = manifest.params.dims;
    let mut flat = Vec::with_capacity(3 * dims.len());
    for field in FieldKind::ALL {
        let entry = manifest
            .files
            .iter()
            .find(|f| f.step == Some(step) && f.role == field.lower())
            .ok_or_else(|| Error::Inventory(dir.join(snapshot_name(field, step))))?;
        let (f, meta) = load_snapshot(&dir.join(&entry.path))?;
        if meta.dims() != dims || meta.time_step != step {
            return Err(Error::Format {
                path: dir.join(&entry.path),
                reason: "snapshot metadata disagrees with the run manifest".into(),
            });
        }
        flat.extend_from_slice(f.values());
    }
    Ok(flat)
}

/// Loads the recorded steps `first..=last` of a run directory.
pub fn load_trajectory(dir: &Path, first: u64, last: u64) -> Result<Trajectory> {
    let manifest = load_run_manifest(dir)?;
    let mut traj = Trajectory::new(manifest.params.dims, manifest.params.dt);
    for &step in manifest
        .recorded_steps
        .iter()
        .filter(|&&s| s >= first && s <= last)
    {
        traj.push(step, load_step(dir, &manifest, step)?)?;
    }
    Ok(traj)
}

/// Writes a whole in-memory trajectory as a run directory.
pub fn save_trajectory(
    dir: &Path,
    traj: &Trajectory,
    kind: &str,
    params: ModelParams,
    seed: u64,
) -> Result<RunManifest> {
    let mut w = TrajectoryWriter::create(dir, traj.dims)?;
    for (step, state) in traj.steps.iter().zip(&traj.states) {
        w.write_flat(*step, state)?;
    }
    let steps = traj.steps.last().copied().unwrap_or(0) - traj.steps.first().copied().unwrap_or(0);
    let every = traj
        .steps
        .windows(2)
        .map(|w| w[1] - w[0])
        .min()
        .unwrap_or(1);
    w.finish(kind, params, None, seed, steps, every)
}

/// Plane as CSV: one line per x, one column per y.
pub fn plane_to_csv(plane: &Array2<f64>) -> String {
    let mut s = String::new();
    for row in plane.outer_iter() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Renders a plane as a PNG heat map scaled to its own min/max.
pub fn render_plane_png(path: &Path, plane: &Array2<f64>, scale: u32) -> Result<()> {
    let (nx, ny) = plane.dim();
    let (lo, hi) = plane
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let scale = scale.max(1);
    // Image rows follow y, columns follow x.
    let img = image::RgbImage::from_fn(nx as u32 * scale, ny as u32 * scale, |px, py| {
        let x = (px / scale) as usize;
        let y = (py / scale) as usize;
        let t = (plane[[x, y]] - lo) / span;
        image::Rgb(colormap(t))
    });
    img.save(path).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Blue-to-yellow ramp for `t` in [0, 1].
pub fn colormap(t: f64) -> [u8; 3] {
    const STOPS: [[f64; 3]; 5] = [
        [68.0, 1.0, 84.0],
        [59.0, 82.0, 139.0],
        [33.0, 145.0, 140.0],
        [94.0, 201.0, 98.0],
        [253.0, 231.0, 37.0],
    ];
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let pos = t * (STOPS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(STOPS.len() - 2);
    let f = pos - i as f64;
    let mut out = [0u8; 3];
    for k in 0..3 {
        out[k] = (STOPS[i][k] + f * (STOPS[i + 1][k] - STOPS[i][k])).round() as u8;
    }
    out
}
