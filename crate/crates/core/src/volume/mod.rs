//! Partition functions of the hardcore model on finite graphs (volumes of
//! the LP polytope when `λ = 1`) and their per-node limits.

mod asymptotic;
mod sis;
mod transfer;

use serde::Serialize;

pub use asymptotic::{
    empirical_gamma, gamma_asymptotic, limit_cdf, limit_integrals, ratio_lemma_check, rewire_ratio,
    trajectory_csv, LimitIntegrals, SignVariant, TrajectoryPoint,
};
pub use sis::{mc_volume_sis, mc_volume_sis_with, Proposal, SisOptions, DEFAULT_BATCHES};
pub use transfer::{transfer_cycle_log_z, transfer_path_log_z, DEFAULT_BINS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sis,
    Transfer,
    ExactTree,
    Quadrature,
}

/// One log-partition estimate, serialized as the JSON result record.
#[derive(Clone, Debug, Serialize)]
pub struct VolumeEstimate {
    pub graph: String,
    pub n_nodes: usize,
    pub lambda: f64,
    pub measure: String,
    pub method: Method,
    #[serde(rename = "log_Z")]
    pub log_z: f64,
    pub std_err: f64,
    pub samples: u64,
    pub seed: Option<u64>,
    /// Richardson-extrapolated `log_Z` from a grid-doubling check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub richardson: Option<f64>,
}

impl VolumeEstimate {
    pub fn log_z_per_node(&self) -> f64 {
        self.log_z / self.n_nodes as f64
    }
}
