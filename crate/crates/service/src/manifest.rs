//! Project manifest: which dataset, which settings, which artifacts.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use topocube_core::cubes::CubeConfig;
use topocube_core::dataset::{Format, FunctionSelector, Schema};
use topocube_core::topology::GradientMode;
use topocube_core::EdgeConfig;

use crate::error::{Result, ServiceError};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOPOLOGY_FILE: &str = "topology.tdt";
pub const CUBES_FILE: &str = "cubes.tdq";
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub path: PathBuf,
    pub format: Format,
    pub schema: Schema,
    pub sha256: String,
    pub n_points: usize,
    pub dims: usize,
}

/// A file written by a pipeline stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    /// Relative to the project directory.
    pub path: PathBuf,
    pub sha256: String,
    /// Seconds since the Unix epoch.
    pub created: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyEntry {
    pub artifact: ArtifactEntry,
    pub function: FunctionSelector,
    pub edges: EdgeConfig,
    pub gradient: GradientMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubesEntry {
    pub artifact: ArtifactEntry,
    pub config: CubeConfig,
    pub t_base: f64,
    pub leaves: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectManifest {
    pub engine_version: String,
    pub created: u64,
    pub dataset: DatasetEntry,
    pub topology: Option<TopologyEntry>,
    pub cubes: Option<CubesEntry>,
}

pub fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let file = File::open(path).map_err(|e| ServiceError::Input(format!("{}: {e}", path.display())))?;
    let mut reader = BufReader::with_capacity(1 << 20, file);
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 20];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

impl ArtifactEntry {
    pub fn record(project: &Path, file: &str) -> Result<Self> {
        Ok(ArtifactEntry {
            path: PathBuf::from(file),
            sha256: sha256_file(&project.join(file))?,
            created: now(),
        })
    }

    /// Absolute path after checking the file still has the recorded hash.
    pub fn verified_path(&self, project: &Path) -> Result<PathBuf> {
        let path = project.join(&self.path);
        if !path.exists() {
            return Err(ServiceError::State(format!("artifact {} is missing", path.display())));
        }
        let hash = sha256_file(&path)?;
        if hash != self.sha256 {
            return Err(ServiceError::State(format!(
                "artifact {} changed since it was recorded",
                path.display()
            )));
        }
        Ok(path)
    }
}

impl ProjectManifest {
    pub fn path(project: &Path) -> PathBuf {
        project.join(MANIFEST_FILE)
    }

    pub fn load(project: &Path) -> Result<Self> {
        let path = Self::path(project);
        let text = std::fs::read_to_string(&path)
            .map_err(|_| ServiceError::State(format!("no manifest at {}; run `ingest` or `topology` first", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, project: &Path) -> Result<()> {
        std::fs::create_dir_all(project)?;
        let text = serde_json::to_string_pretty(self).map_err(|e| ServiceError::Internal(e.to_string()))?;
        std::fs::write(Self::path(project), text + "\n")?;
        Ok(())
    }

    pub fn verify_dataset(&self) -> Result<()> {
        let hash = sha256_file(&self.dataset.path)?;
        if hash != self.dataset.sha256 {
            return Err(ServiceError::State(format!(
                "dataset {} changed since it was recorded",
                self.dataset.path.display()
            )));
        }
        Ok(())
    }
}
