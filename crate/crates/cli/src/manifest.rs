use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to repeat a run: the command line, the effective
/// configuration, hashes of every input file and what came out.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub inputs: Vec<InputFile>,
    pub spec_hash: Option<String>,
    pub instance_hash: Option<String>,
    pub seed: Option<u64>,
    pub wall_time_secs: f64,
    pub exit_code: u8,
    pub outcome: serde_json::Value,
    pub artifacts: Vec<PathBuf>,
    /// Where the manifest goes when no path is given on the command line.
    #[serde(skip)]
    pub default_path: Option<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str) -> RunManifest {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            argv: std::env::args().collect(),
            config: serde_json::Value::Null,
            inputs: Vec::new(),
            spec_hash: None,
            instance_hash: None,
            seed: None,
            wall_time_secs: 0.0,
            exit_code: 0,
            outcome: serde_json::Value::Null,
            artifacts: Vec::new(),
            default_path: None,
        }
    }

    pub fn inputs(&mut self, files: &[(PathBuf, String)]) {
        self.inputs = files
            .iter()
            .map(|(path, sha256)| InputFile { path: path.clone(), sha256: sha256.clone() })
            .collect();
    }

    pub fn finish(&mut self, elapsed: Duration, exit_code: u8) {
        self.wall_time_secs = elapsed.as_secs_f64();
        self.exit_code = exit_code;
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        }
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
    }
}
