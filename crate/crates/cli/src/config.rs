use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use crate::error::CliError;

/// Channel families that `channel build` and `polarize` can construct.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Qec,
    Qsc,
    Gensym,
    Homo,
    Random,
}

/// Experiment settings loaded from `--config`. Every field is optional and
/// command-line flags take precedence.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub orders: Option<Vec<usize>>,
    pub family: Option<Family>,
    pub eps: Option<f64>,
    pub components: Option<String>,
    pub subgroup: Option<Vec<usize>>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    /// Channel JSON file to polarize instead of a family.
    pub channel: Option<PathBuf>,
    pub depth: Option<usize>,
    pub deltas: Option<Vec<f64>>,
    pub full: Option<bool>,
    pub quantize: Option<usize>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub suite: Option<String>,
    pub trials: Option<u64>,
    pub jobs: Option<usize>,
    pub max_alphabet: Option<usize>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.to_path_buf(), source: e })
    }
}
