//! Experiment configuration files: TOML with explicit seeds, one file per
//! reproducible run.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiment::Method;
use crate::net::{LayerSpec, TrainConfig};
use crate::simgen::ScenarioConfig;

/// One reproducible experiment: scenario, methods, replicate count, network
/// architecture and training block. Seeds live inside the scenario and
/// training blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub methods: Vec<Method>,
    pub replicates: usize,
    #[serde(default = "default_architecture")]
    pub architecture: Vec<LayerSpec>,
    #[serde(default)]
    pub train: TrainConfig,
}

fn default_architecture() -> Vec<LayerSpec> {
    LayerSpec::simulation_stack()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.train.validate()?;
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be positive".into()));
        }
        Ok(())
    }
}

pub fn load_experiment_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg: ExperimentConfig =
        toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn save_experiment_config(path: &Path, cfg: &ExperimentConfig) -> Result<()> {
    let text = toml::to_string_pretty(cfg).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Short hex digest of the canonical serialized config, stamped into result
/// tables so outputs can be traced to their inputs.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let text = toml::to_string(cfg).map_err(|e| Error::Config(e.to_string()))?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(hex_prefix(&digest, 12))
}

fn hex_prefix(bytes: &[u8], len: usize) -> String {
    let mut s = String::with_capacity(len);
    for b in bytes {
        use std::fmt::Write;
        write!(s, "{b:02x}").expect("write to string");
        if s.len() >= len {
            break;
        }
    }
    s.truncate(len);
    s
}
