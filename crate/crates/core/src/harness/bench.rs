//! The multi-dataset sweep driven by a [`Manifest`].

use std::path::Path;

use super::config::ExperimentConfig;
use super::experiment::{run_on_dataset, ExperimentReport};
use super::ingest::{LoadedDataset, Manifest};
use crate::error::Result;

#[derive(Clone, Debug, Default)]
pub struct BenchOutcome {
    pub reports: Vec<ExperimentReport>,
    /// Datasets left out, with the reason.
    pub skipped: Vec<(String, String)>,
    /// Whether any checksum was recorded into the manifest.
    pub manifest_updated: bool,
}

/// Loads every manifest dataset present in `data_dir` (optionally only
/// those in `only`) and runs `base` on it once per seed. Missing files are
/// skipped; other ingestion problems are errors.
pub fn run_bench(
    manifest: &mut Manifest,
    data_dir: &Path,
    base: &ExperimentConfig,
    seeds: &[u64],
    only: Option<&[String]>,
) -> Result<BenchOutcome> {
    let mut out = BenchOutcome::default();
    for entry in manifest.datasets.iter_mut() {
        if only.is_some_and(|names| !names.contains(&entry.name)) {
            continue;
        }
        if !entry.path(data_dir).exists() {
            log::warn!("bench: {} not found, skipping", entry.path(data_dir).display());
            out.skipped.push((entry.name.clone(), "file not found".into()));
            continue;
        }
        let (loaded, recorded): (LoadedDataset, bool) = entry.ingest(data_dir)?;
        out.manifest_updated |= recorded;
        for &seed in seeds {
            let config = ExperimentConfig {
                name: Some(entry.name.clone()),
                dataset: entry.path(data_dir),
                schema: entry.schema.clone(),
                seed,
                ..base.clone()
            };
            log::info!("bench: {} seed {seed}", entry.name);
            out.reports.push(run_on_dataset(&config, &loaded)?);
        }
    }
    Ok(out)
}
