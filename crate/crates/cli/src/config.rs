use std::path::{Path, PathBuf};

use fpbandit::model::TrueParameterSpec;
use fpbandit::sim::CheckpointSchedule;
use fpbandit::{Error, Result};
use serde::Deserialize;

/// Experiment settings read from `--config`. Every field is optional;
/// command-line flags take precedence. Relative instance paths resolve
/// against the config file's directory.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: Option<PathBuf>,
    pub true_parameter: Option<TrueParameterSpec>,
    /// Kept as strings so unknown names surface as policy errors.
    pub policies: Option<Vec<String>>,
    pub horizon: Option<u64>,
    pub runs: Option<u64>,
    pub seed: Option<u64>,
    pub checkpoints: Option<CheckpointSchedule>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub scaled_out: Option<PathBuf>,
    pub resolution: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        let mut config: ExperimentConfig = serde_json::from_str(&text)?;
        if let Some(instance) = &config.instance {
            if instance.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new("."));
                config.instance = Some(base.join(instance));
            }
        }
        Ok(config)
    }
}
