//! The three published model configurations.

use serde::{Deserialize, Serialize};

use crate::diagnostics::EvalPoint;
use crate::esn::EsnConfig;
use crate::grid::GridDims;
use crate::rd_model::ModelParams;

/// Height of the cross-section used for maps and point comparisons.
pub const EVAL_PLANE_Z: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelVersion {
    V1,
    V2,
    V3,
}

impl ModelVersion {
    pub const ALL: [ModelVersion; 3] = [ModelVersion::V1, ModelVersion::V2, ModelVersion::V3];

    pub fn from_number(n: u32) -> Option<Self> {
        match n {
            1 => Some(ModelVersion::V1),
            2 => Some(ModelVersion::V2),
            3 => Some(ModelVersion::V3),
            _ => None,
        }
    }

    pub fn number(self) -> u32 {
        match self {
            ModelVersion::V1 => 1,
            ModelVersion::V2 => 2,
            ModelVersion::V3 => 3,
        }
    }

    pub fn model_params(self) -> ModelParams {
        let dims = GridDims {
            nx: 30,
            ny: 30,
            nz: 30,
            d: 1.0,
        };
        let (dt, d_c, d_v, d_h, chi) = match self {
            ModelVersion::V1 => (0.01, 0.2, 1.2, 0.4, 1.0),
            ModelVersion::V2 => (0.01, 0.2, 0.4, 1.9, 9.1),
            ModelVersion::V3 => (0.002, 0.1, 0.4, 1.4, 8.5),
        };
        ModelParams {
            d_c,
            d_v,
            d_h,
            gamma: 2.5,
            delta: 2.0,
            eta: 1.5,
            kappa: 1.0,
            sigma: 2.0,
            chi,
            dt,
            dims,
        }
    }

    pub fn esn_config(self) -> EsnConfig {
        let (leak_rate, spectral_radius, warm_up, ridge) = match self {
            ModelVersion::V1 => (2e-4, 0.9, 50, 1e-7),
            ModelVersion::V2 => (2e-4, 1.2, 45, 1e-11),
            ModelVersion::V3 => (1e-4, 1.4, 275, 1e-11),
        };
        EsnConfig {
            units: 343,
            leak_rate,
            spectral_radius,
            warm_up,
            ridge,
            ..EsnConfig::default()
        }
    }

    /// Training window `(start, end)` in steps; the rollout starts at `end`.
    pub fn training_slot(self) -> (u64, u64) {
        match self {
            ModelVersion::V1 | ModelVersion::V2 => (0, 100),
            ModelVersion::V3 => (0, 1000),
        }
    }

    pub fn rollout_steps(self) -> u64 {
        match self {
            ModelVersion::V1 | ModelVersion::V2 => 50,
            ModelVersion::V3 => 500,
        }
    }

    /// Comparison points on the `z = 7` plane.
    pub fn eval_points(self) -> Vec<EvalPoint> {
        let xy: &[(usize, usize)] = match self {
            ModelVersion::V1 => &[(9, 4), (3, 11), (8, 8), (9, 9)],
            ModelVersion::V2 => &[(9, 4), (8, 8), (9, 9), (14, 13), (7, 14), (7, 20)],
            ModelVersion::V3 => &[(9, 4), (3, 11), (9, 9), (14, 13), (7, 14), (7, 20)],
        };
        xy.iter()
            .map(|&(x, y)| EvalPoint::new(x, y, EVAL_PLANE_Z))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_numbers_round_trip() {
        for v in ModelVersion::ALL {
            assert_eq!(ModelVersion::from_number(v.number()), Some(v));
        }
        assert_eq!(ModelVersion::from_number(4), None);
    }

    #[test]
    fn warm_up_fits_the_training_slot() {
        for v in ModelVersion::ALL {
            let (a, b) = v.training_slot();
            assert!((v.esn_config().warm_up as u64) < b - a);
        }
    }

    #[test]
    fn eval_points_lie_on_the_plane() {
        assert_eq!(ModelVersion::V1.eval_points().len(), 4);
        assert_eq!(ModelVersion::V2.eval_points().len(), 6);
        assert_eq!(ModelVersion::V3.eval_points().len(), 6);
        for v in ModelVersion::ALL {
            let dims = v.model_params().dims;
            for p in v.eval_points() {
                assert_eq!(p.z, EVAL_PLANE_Z);
                assert!(dims.contains(p.x, p.y, p.z));
            }
        }
    }
}
