use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::composite::{LambdaSet, MapConfig, MIN_SEPARATION};
use crate::error::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Validation(String),
}

/// On-disk layout: `{"dim": 2, "K": 2.0, "lambdas": [[0, 0], ...]}`.
/// Array order is the enumeration order and so fixes the weights `2^-n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub dim: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub lambdas: Vec<Vec<f64>>,
}

impl ConfigDocument {
    pub fn validate(&self) -> Result<MapConfig, ConfigError> {
        let invalid = |m: String| Err(ConfigError::Validation(m));
        if self.dim < 2 {
            return invalid(format!("dim must be at least 2, got {}", self.dim));
        }
        if !(self.k.is_finite() && self.k > 1.0) {
            return invalid(format!("K must exceed 1 (got {})", self.k));
        }
        if self.lambdas.is_empty() {
            return invalid("lambdas must contain at least one center".into());
        }
        for (i, c) in self.lambdas.iter().enumerate() {
            if c.len() != self.dim {
                return invalid(format!(
                    "dimension mismatch: lambda_{} has {} coordinates, expected {}",
                    i + 1,
                    c.len(),
                    self.dim
                ));
            }
            if !c.iter().all(|v| v.is_finite()) {
                return invalid(format!("lambda_{} has a non-finite coordinate", i + 1));
            }
        }
        let set = LambdaSet::new(self.dim, self.lambdas.clone()).map_err(|e| match e {
            Error::DuplicateCenters { first, second, .. } => ConfigError::Validation(format!(
                "duplicate centers: lambda_{first} and lambda_{second} are within {MIN_SEPARATION:e}"
            )),
            other => ConfigError::Validation(other.to_string()),
        })?;
        MapConfig::new(set, self.k).map_err(|e| ConfigError::Validation(e.to_string()))
    }
}

pub fn parse_config(text: &str) -> Result<MapConfig, ConfigError> {
    let doc: ConfigDocument =
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    doc.validate()
}

pub fn load_config(path: impl AsRef<Path>) -> Result<MapConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

pub fn to_document(cfg: &MapConfig) -> ConfigDocument {
    ConfigDocument {
        dim: cfg.dim(),
        k: cfg.k(),
        lambdas: cfg.lambdas().centers().to_vec(),
    }
}

/// SHA-256 (hex) of the canonical serialization of a validated config, so
/// formatting differences in the source file do not change it.
pub fn config_digest(cfg: &MapConfig) -> String {
    let canonical = serde_json::to_string(&to_document(cfg)).expect("config serializes");
    let hash = Sha256::digest(canonical.as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}
