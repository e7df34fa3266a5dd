//! Run manifests: written with outcome "running" before the experiment starts
//! and finalized afterwards, so an interrupted run is visible as such.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const OUTCOME_RUNNING: &str = "running";
pub const OUTCOME_COMPLETED: &str = "completed";
pub const OUTCOME_DIVERGED: &str = "diverged";
pub const OUTCOME_FAILED: &str = "failed";

/// Functional parameters derived at run start (frozen omega, its (F3)
/// constant, the space-time exponent and the witnessed J constants).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivedParams {
    pub alpha: f64,
    pub omega: f64,
    pub k_omega: f64,
    pub k: f64,
    pub lambda: f64,
    pub c2: f64,
    pub c3: f64,
    pub delta: f64,
}

impl DerivedParams {
    pub fn of(params: &attractor_lab_core::functionals::FunctionalParams<f64>) -> Self {
        Self {
            alpha: params.alpha,
            omega: params.omega,
            k_omega: params.k_omega,
            k: params.k,
            lambda: params.j.lambda,
            c2: params.j.c2,
            c3: params.j.c3,
            delta: params.j.delta,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub code_version: String,
    pub experiment: String,
    pub config_hash: String,
    pub master_seed: u64,
    /// per-trajectory seeds (ensemble experiments)
    pub run_seeds: Vec<u64>,
    /// exponent-plane region of the configured (m, p)
    pub region: String,
    pub outcome: String,
    pub diagnostics: Vec<String>,
    pub artifacts: Vec<String>,
    /// functional parameters the run derived and froze
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived_params: Option<DerivedParams>,
    /// the fully resolved configuration (all defaults written back)
    pub resolved_config: RunConfig,
}

impl RunManifest {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: config.experiment.kind.clone(),
            config_hash: config_hash(config),
            master_seed: config.master_seed,
            run_seeds: Vec::new(),
            derived_params: None,
            region: config.region().to_string(),
            outcome: OUTCOME_RUNNING.to_string(),
            diagnostics: Vec::new(),
            artifacts: Vec::new(),
            resolved_config: config.clone(),
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(dir.join("manifest.json"), text)
    }

    pub fn read(dir: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(dir.join("manifest.json"))?;
        serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

/// Stable hash of the resolved configuration.
pub fn config_hash(config: &RunConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    format!("{:x}", hasher.finalize())
}
