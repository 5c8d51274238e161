//! Run directory and manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use plapd_core::geometry::Mesh;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// The single writer of a run directory: every artifact goes through it and
/// is recorded for the manifest.
pub struct RunDir {
    root: PathBuf,
    outputs: Vec<String>,
}

impl RunDir {
    /// Use `dir` if given, else a fresh `runs/<UTC timestamp>` directory.
    pub fn create(dir: Option<&Path>) -> Result<Self, CliError> {
        let root = match dir {
            Some(d) => d.to_path_buf(),
            None => {
                let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string();
                let base = Path::new("runs").join(&stamp);
                let mut root = base.clone();
                let mut k = 1;
                while root.exists() {
                    root = PathBuf::from(format!("{}-{k}", base.display()));
                    k += 1;
                }
                root
            }
        };
        fs::create_dir_all(&root)?;
        Ok(RunDir { root, outputs: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    fn resolve(&self, name: &str) -> Result<PathBuf, CliError> {
        let rel = Path::new(name);
        if rel.is_absolute() || rel.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
            return Err(CliError::Config(format!("artifact name `{name}` must stay inside the run directory")));
        }
        Ok(self.root.join(rel))
    }

    /// Write an artifact through `body` and record it.
    pub fn write_with(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        let path = self.resolve(name)?;
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut w = BufWriter::new(fs::File::create(&path)?);
        body(&mut w)?;
        w.flush()?;
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        self.write_with(name, |w| Ok(w.write_all(text.as_bytes())?))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeshStats {
    pub nodes: usize,
    pub triangles: usize,
    pub boundary_nodes: usize,
    pub h: f64,
    pub area: f64,
}

impl MeshStats {
    pub fn of(mesh: &Mesh) -> Self {
        MeshStats {
            nodes: mesh.num_nodes(),
            triangles: mesh.num_triangles(),
            boundary_nodes: mesh.num_boundary_nodes(),
            h: mesh.h(),
            area: mesh.total_area(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Versions {
    pub plapd: &'static str,
    pub plapd_core: &'static str,
    pub manifest_schema: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Versions { plapd: env!("CARGO_PKG_VERSION"), plapd_core: plapd_core::VERSION, manifest_schema: 1 }
    }
}

/// What a command reports back to the orchestrator.
#[derive(Debug)]
pub struct Outcome {
    pub meshes: Vec<MeshStats>,
    /// Check name → `pass`, `fail`, `inconclusive`, `converged`, …
    pub checks: BTreeMap<String, String>,
    /// All requested gates passed and every solve converged.
    pub ok: bool,
    pub seed: Option<u64>,
}

impl Outcome {
    pub fn new() -> Self {
        Outcome { meshes: Vec::new(), checks: BTreeMap::new(), ok: true, seed: None }
    }

    /// Informational entry that does not affect the exit status.
    pub fn note(&mut self, name: impl Into<String>, status: impl Into<String>) {
        self.checks.insert(name.into(), status.into());
    }

    pub fn gate(&mut self, name: impl Into<String>, passed: bool, status: impl Into<String>) {
        self.checks.insert(name.into(), status.into());
        self.ok &= passed;
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    /// SHA-256 of `config.toml`.
    pub config_sha256: String,
    pub versions: Versions,
    pub mesh: Vec<MeshStats>,
    pub outputs: Vec<String>,
    pub started_utc: String,
    pub wall_clock_seconds: f64,
    pub threads: usize,
    pub seed: Option<u64>,
    pub checks: BTreeMap<String, String>,
    /// `ok`, `failed` or `error`.
    pub status: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
