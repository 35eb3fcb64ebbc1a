use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use tpt_core::chain::Regime;
use tpt_core::io::write_json;
use tpt_core::rng::GENERATOR_ID;
use tpt_core::tolerance::Tolerances;

use crate::config::ExperimentConfig;
use crate::fail::Outcome;
use crate::source::Problem;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Residuals {
    pub forward: f64,
    pub backward: f64,
}

/// Everything needed to replay a run.
#[derive(Debug, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config_sha256: String,
    pub rng: &'static str,
    pub tolerances: Tolerances,
    pub chain_source: String,
    pub regime: Regime,
    pub n_states: usize,
    pub n_slices: usize,
    pub set_a: Vec<usize>,
    pub set_b: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Residuals>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub results: serde_json::Value,
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

impl Metadata {
    pub fn new(command: &'static str, cfg: &ExperimentConfig, problem: &Problem) -> Self {
        Self {
            tool: "tpt",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: cfg.seed,
            config_sha256: config_hash(cfg),
            rng: GENERATOR_ID,
            tolerances: cfg.tolerances,
            chain_source: problem.source.clone(),
            regime: problem.spec.regime(),
            n_states: problem.spec.n_states(),
            n_slices: problem.spec.n_slices(),
            set_a: problem.sets.a().to_vec(),
            set_b: problem.sets.b().to_vec(),
            set_radius: problem.set_radius,
            residuals: None,
            notes: problem.notes.clone(),
            results: serde_json::Value::Null,
        }
    }

    /// Writes `metadata.json` and the effective `config.json` into `dir`.
    pub fn write(&self, dir: &Path, cfg: &ExperimentConfig) -> Outcome<()> {
        write_json(std::fs::File::create(dir.join("metadata.json"))?, self)?;
        write_json(std::fs::File::create(dir.join("config.json"))?, cfg)?;
        Ok(())
    }
}
