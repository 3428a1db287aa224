use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Sidecar describing how an export was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command_line: Vec<String>,
    pub config_digest: String,
    pub seed: u64,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(config_digest: String, seed: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command_line: std::env::args().collect(),
            config_digest,
            seed,
            wall_time_seconds: 0.0,
            outputs: Vec::new(),
        }
    }

    /// `<output>.manifest.json` next to the output file.
    pub fn sidecar_path(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write_for(&self, output: &Path) -> io::Result<PathBuf> {
        let path = Self::sidecar_path(output);
        let text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_path_appends_suffix() {
        assert_eq!(
            RunManifest::sidecar_path(Path::new("out/grid.csv")),
            PathBuf::from("out/grid.csv.manifest.json")
        );
    }

    #[test]
    fn writes_json() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("x.csv");
        let mut m = RunManifest::new("abc".into(), 42);
        m.outputs.push(out.display().to_string());
        let p = m.write_for(&out).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        assert_eq!(v["seed"], 42);
        assert_eq!(v["config_digest"], "abc");
    }
}
