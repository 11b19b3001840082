//! Three-field reaction-diffusion electrophysiology model and an echo state
//! network surrogate trained on its trajectories.
//!
//! The crate covers the full loop: simulate the fields on a regular 3D grid,
//! train a single-reservoir ESN to map each flattened state to the next,
//! roll it out autoregressively and score the rollout against the numerical
//! solution with NRMSE, spatial entropy and finite-time Lyapunov exponents.

pub mod diagnostics;
pub mod error;
pub mod esn;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod presets;
pub mod rd_model;

pub use diagnostics::{
    evaluate_rollout, lyapunov_estimate, lyapunov_series, nrmse, spatial_entropy, EvalPoint,
    EvalReport, LyapunovOptions, Nrmse, PerturbBlock,
};
pub use error::{Error, Result};
pub use esn::{
    build_reservoir, collect_states, fit_ridge, predict_one, run_autoregressive, train_surrogate,
    EsnConfig, Readout, Reservoir, Surrogate,
};
pub use grid::{laplacian, slice_z, Field3, GridDims};
pub use presets::ModelVersion;
pub use rd_model::{
    euler_step, init_state, reaction_terms, simulate, FieldKind, ModelParams, SystemState,
    Trajectory,
};
