use std::fs;
use std::path::Path;

use plli_core::{FitConfig, IntervalModel, PlliModel};
use serde::{Deserialize, Serialize};

use crate::errors::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;

/// On-disk model representation. Field order is fixed and no timestamp is
/// recorded, so identical fits serialize to byte-identical files.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub created_by: String,
    pub source: String,
    pub algorithm: String,
    pub column_names: Vec<String>,
    pub config: FitConfig,
    pub training_risk: f64,
    pub boundaries: Vec<f64>,
    pub intervals: Vec<IntervalModel>,
}

impl ModelFile {
    pub fn from_model(model: &PlliModel, source: &str, algorithm: &str, columns: &[String]) -> Self {
        ModelFile {
            format_version: FORMAT_VERSION,
            created_by: format!("plli {}", env!("CARGO_PKG_VERSION")),
            source: source.to_string(),
            algorithm: algorithm.to_string(),
            column_names: columns.to_vec(),
            config: model.config.clone(),
            training_risk: model.training_risk,
            boundaries: model.boundaries.clone(),
            intervals: model.intervals.clone(),
        }
    }

    pub fn into_model(self) -> PlliModel {
        PlliModel {
            boundaries: self.boundaries,
            intervals: self.intervals,
            config: self.config,
            training_risk: self.training_risk,
        }
    }
}

pub fn save(file: &ModelFile, path: &Path) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(file)
        .map_err(|e| CliError::Io(format!("serializing model: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn load(path: &Path) -> CliResult<ModelFile> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: not a valid model file: {e}", path.display())))?;
    if file.format_version != FORMAT_VERSION {
        return Err(CliError::Validation(format!(
            "unsupported model format version {} (expected {})",
            file.format_version, FORMAT_VERSION
        )));
    }
    Ok(file)
}
