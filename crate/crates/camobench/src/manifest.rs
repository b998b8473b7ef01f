//! Dataset manifest: the JSON file that names every image, mask, fixation
//! log, and optional annotation in a dataset. All paths inside the file are
//! relative to the manifest's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rank::RankLabel;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestInstance {
    pub mask: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<RankLabel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub width: u32,
    pub height: u32,
    pub gt_mask: PathBuf,
    #[serde(default)]
    pub instances: Vec<ManifestInstance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixation_map: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fixation_logs: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saliency_map: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mm: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oc: Option<bool>,
}

impl ManifestEntry {
    /// Stable identifier for report rows: the image file stem.
    pub fn id(&self) -> String {
        self.image
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.image.to_string_lossy().into_owned())
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub dataset: String,
    pub entries: Vec<ManifestEntry>,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn new(dataset: impl Into<String>, entries: Vec<ManifestEntry>) -> Self {
        DatasetManifest {
            dataset: dataset.into(),
            entries,
            base_dir: PathBuf::new(),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::FileMissing(path.to_path_buf())
            } else {
                Error::Io {
                    context: format!("reading manifest {}", path.display()),
                    source: e,
                }
            }
        })?;
        let mut manifest: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        manifest.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(manifest)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json.as_bytes()).map_err(|e| Error::UnwritablePath {
            path: path.to_path_buf(),
            source: e,
        })
    }

    /// Directory the relative paths are anchored to.
    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn set_base_dir(&mut self, dir: impl Into<PathBuf>) {
        self.base_dir = dir.into();
    }

    /// Resolves a manifest-relative path against the manifest directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        resolve_in(&self.base_dir, p)
    }
}

/// Resolves `p` against `base`; absolute paths pass through unchanged.
pub fn resolve_in(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
