//! Ingestion, ensemble construction, experiment orchestration and reports.

pub mod bench;
pub mod config;
pub mod ensemble;
pub mod experiment;
pub mod ingest;
pub mod report;

pub use bench::{run_bench, BenchOutcome};
pub use config::{DatasetSchema, ExperimentConfig, LabelColumn, Method, ReportFormat};
pub use ensemble::build_noisy_ensemble;
pub use experiment::{run_experiment, run_on_dataset, ExperimentReport, MethodResult};
pub use ingest::{load_csv, LoadedDataset, Manifest, ManifestEntry};
pub use report::emit_report;
