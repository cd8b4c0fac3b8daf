//! Run manifests: what was run, on which inputs, and which files it wrote.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: Option<String>,
    pub seeds: Vec<u64>,
    pub tool_version: String,
    /// Paths relative to the output directory, sorted.
    pub files: Vec<String>,
    pub wall_clock_seconds: f64,
}

/// Collects output files of one run and writes the manifest last.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
    started: Instant,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|source| CliError::Output { path: root.to_path_buf(), source })?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new(), started: Instant::now() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `relative` through `write` and records it.
    pub fn write(
        &mut self,
        relative: impl AsRef<Path>,
        write: impl FnOnce(&Path) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let relative = relative.as_ref();
        let path = self.root.join(relative);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .map_err(|source| CliError::Output { path: parent.to_path_buf(), source })?;
        }
        write(&path).map_err(|source| CliError::Output { path: path.clone(), source })?;
        self.files.push(relative.to_string_lossy().replace('\\', "/"));
        Ok(())
    }

    pub fn write_text(&mut self, relative: impl AsRef<Path>, text: &str) -> Result<(), CliError> {
        self.write(relative, |p| std::fs::write(p, text))
    }

    /// Writes `manifest.json` and returns the manifest.
    pub fn finish(
        mut self,
        command: &str,
        config_digest: Option<String>,
        seeds: Vec<u64>,
    ) -> Result<RunManifest, CliError> {
        self.files.sort();
        let manifest = RunManifest {
            command: command.to_string(),
            config_digest,
            seeds,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            files: self.files.clone(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        let path = self.root.join("manifest.json");
        std::fs::write(&path, json + "\n").map_err(|source| CliError::Output { path, source })?;
        Ok(manifest)
    }
}
