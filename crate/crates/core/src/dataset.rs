//! Datasets on disk: `<out>/dataset.json` plus `<out>/<level>/trial_<i>/`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autotask::TaskSpaceConfig;
use crate::render::{render_and_write, write_trial, CanvasConfig, RenderError};
use crate::stimulus::{AttributeSpace, Catalog};
use crate::trial::{TrialDocument, TrialError, TrialInstance};

pub const GENERATOR_VERSION: &str = concat!("iwisdm ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Trial {
        path: PathBuf,
        #[source]
        source: TrialError,
    },
    #[error(transparent)]
    Render(#[from] RenderError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub trial_id: String,
    /// Trial directory relative to the dataset root.
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub level: String,
    pub n: usize,
    pub seed: u64,
    pub generator_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<TaskSpaceConfig>,
    #[serde(default)]
    pub distractors: usize,
    #[serde(default)]
    pub trials: Vec<DatasetEntry>,
}

impl DatasetManifest {
    pub fn new(level: &str, n: usize, seed: u64, space: Option<TaskSpaceConfig>) -> DatasetManifest {
        DatasetManifest {
            level: level.into(),
            n,
            seed,
            generator_version: GENERATOR_VERSION.into(),
            space,
            distractors: 0,
            trials: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub trials: Vec<TrialInstance>,
}

impl Dataset {
    /// Pairs a manifest with its trials, listing them under `<level>/trial_<i>`.
    pub fn new(mut manifest: DatasetManifest, trials: Vec<TrialInstance>) -> Dataset {
        manifest.n = trials.len();
        manifest.trials = trials
            .iter()
            .enumerate()
            .map(|(i, t)| DatasetEntry {
                trial_id: t.trial_id.clone(),
                path: format!("{}/trial_{i}", manifest.level),
            })
            .collect();
        Dataset { manifest, trials }
    }

    pub fn trial(&self, trial_id: &str) -> Option<&TrialInstance> {
        self.trials.iter().find(|t| t.trial_id == trial_id)
    }

    /// Concatenates datasets; the first manifest names the result.
    pub fn concat(parts: Vec<Dataset>) -> Option<Dataset> {
        let manifest = parts.first()?.manifest.clone();
        let trials = parts.into_iter().flat_map(|d| d.trials).collect();
        Some(Dataset::new(manifest, trials))
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), DatasetError> {
    fs::write(path, text).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the dataset under `out`. Frames are rendered with `canvas` when
/// given; otherwise only `trial.json` files are written. Returns every path.
pub fn write_dataset(
    dataset: &Dataset,
    out: &Path,
    catalog: &Catalog,
    canvas: Option<&CanvasConfig>,
) -> Result<Vec<PathBuf>, DatasetError> {
    fs::create_dir_all(out).map_err(|source| DatasetError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let per_trial = dataset
        .trials
        .par_iter()
        .zip(dataset.manifest.trials.par_iter())
        .map(|(trial, entry)| {
            let dir = out.join(&entry.path);
            match canvas {
                Some(c) => render_and_write(trial, catalog, c, &dir),
                None => write_trial(trial, &[], &dir),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let manifest_path = out.join("dataset.json");
    let text = serde_json::to_string_pretty(&dataset.manifest).expect("manifests serialize");
    write_file(&manifest_path, &text)?;
    let mut paths = vec![manifest_path];
    paths.extend(per_trial.into_iter().flatten());
    Ok(paths)
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest, DatasetError> {
    let path = dir.join("dataset.json");
    let text = fs::read_to_string(&path).map_err(|source| DatasetError::Io {
        path: path.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| DatasetError::Json { path, source })
}

pub fn read_trial(path: &Path, space: &AttributeSpace) -> Result<TrialInstance, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    TrialDocument::from_json(&text)
        .and_then(|d| d.into_trial(space))
        .map_err(|source| DatasetError::Trial {
            path: path.to_path_buf(),
            source,
        })
}

/// Reads a dataset written by [`write_dataset`].
pub fn load_dataset(dir: &Path, space: &AttributeSpace) -> Result<Dataset, DatasetError> {
    let manifest = read_manifest(dir)?;
    let trials = manifest
        .trials
        .par_iter()
        .map(|e| read_trial(&dir.join(&e.path).join("trial.json"), space))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset { manifest, trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{generate_benchmark, ComplexityLevel};
    use crate::stimulus::builtin_catalog;

    #[test]
    fn written_datasets_load_back() {
        let catalog = builtin_catalog();
        let data = generate_benchmark(ComplexityLevel::Low, 3, 5, &catalog, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = write_dataset(&data, dir.path(), &catalog, Some(&CanvasConfig::default())).unwrap();
        assert_eq!(paths.len(), 1 + 3 * 7);
        assert!(dir.path().join("low/trial_0/frames/frame_005.png").is_file());
        let back = load_dataset(dir.path(), catalog.space()).unwrap();
        assert_eq!(back, data);
    }
}
