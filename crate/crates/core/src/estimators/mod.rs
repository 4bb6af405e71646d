//! The three reconstruction layers.
//!
//! * BRL fills a patch with the mean of its context.
//! * IDL is kernel regression with a fixed isotropic bandwidth
//!   `sigma2 * N_y * I` over a support area that grows ring by ring.
//! * HQL is the full kernel MMSE estimator: bandwidth scaled from the sample
//!   covariance by `beta`, plus a correction term weighted by `alpha`.

use std::time::Duration;

use serde::{Deserialize, Serialize};

mod brl;
mod hql;
mod idl;

pub use brl::brl_estimate;
pub use hql::{
    hql_estimate, hql_estimate_with, kernel_weights, mahalanobis_distances, optimize_alpha, optimize_beta,
    predict_xy, sample_covariance, weights_from_distances, CovarianceBlocks, HqlConfig, BETA_GRID,
};
pub use idl::{idl_estimate, idl_raw_weight, idl_weights};

use crate::framework::N_X;

/// Kernel aperture of the intermediate layer.
pub const DEFAULT_SIGMA2: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Layer {
    Brl,
    Idl,
    Hql,
}

impl Layer {
    pub const ALL: [Layer; 3] = [Layer::Brl, Layer::Idl, Layer::Hql];

    pub fn name(self) -> &'static str {
        match self {
            Layer::Brl => "BRL",
            Layer::Idl => "IDL",
            Layer::Hql => "HQL",
        }
    }
}

impl std::fmt::Display for Layer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Normalized kernel weights and the sum of the raw (unnormalized) weights.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelWeights {
    pub weights: Vec<f64>,
    pub raw_sum: f64,
}

/// What happened while estimating one patch.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub phi: Option<f64>,
    pub nu: Option<f64>,
    pub candidates: usize,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub rings_used: usize,
    /// Set when the recorded layer was reached through the degradation
    /// ladder rather than by the switching tests.
    pub fallback: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchEstimate {
    pub values: [f64; N_X],
    pub layer: Layer,
    pub diagnostics: Diagnostics,
}
