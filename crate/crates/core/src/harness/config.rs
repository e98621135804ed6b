//! JSON experiment configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::data::DisagreementThresholds;
use crate::error::{MtsError, Result};
use crate::learners::{ClassifierSpec, ForestParams, RegressorSpec};

/// Where the class label sits in each CSV row.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelColumn {
    First,
    #[default]
    Last,
    Index(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSchema {
    pub label_column: LabelColumn,
    pub header: bool,
    /// Label strings in class-index order. When absent, the distinct labels
    /// are sorted (numerically if they all parse as numbers).
    pub class_names: Option<Vec<String>>,
}

impl Default for DatasetSchema {
    fn default() -> Self {
        DatasetSchema {
            label_column: LabelColumn::Last,
            header: true,
            class_names: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Majority,
    Weighted,
    Adaboost,
    Rf,
    Hmts,
    Dmts,
    Bts,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Majority,
        Method::Weighted,
        Method::Adaboost,
        Method::Rf,
        Method::Hmts,
        Method::Dmts,
        Method::Bts,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Majority => "majority",
            Method::Weighted => "weighted",
            Method::Adaboost => "adaboost",
            Method::Rf => "rf",
            Method::Hmts => "hmts",
            Method::Dmts => "dmts",
            Method::Bts => "bts",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Method::Majority => "Majority",
            Method::Weighted => "Weighted Majority",
            Method::Adaboost => "AdaBoost",
            Method::Rf => "Random Forest",
            Method::Hmts => "HMTS",
            Method::Dmts => "DMTS",
            Method::Bts => "BTS",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| MtsError::Configuration(format!("unknown method {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Plain,
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Plain => "txt",
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }

    pub fn parse(s: &str) -> Result<ReportFormat> {
        match s {
            "plain" | "txt" => Ok(ReportFormat::Plain),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(MtsError::Configuration(format!("unknown report format {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaBoostConfig {
    pub n_estimators: usize,
    pub max_depth: usize,
}

impl Default for AdaBoostConfig {
    fn default() -> Self {
        AdaBoostConfig {
            n_estimators: 15,
            max_depth: 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    /// Defaults to `$MTS_OUTPUT_DIR`, then `reports`.
    pub dir: Option<PathBuf>,
    /// Defaults to all three formats.
    pub formats: Vec<ReportFormat>,
}

pub const OUTPUT_DIR_ENV: &str = "MTS_OUTPUT_DIR";

impl OutputConfig {
    pub fn resolved_dir(&self) -> PathBuf {
        self.dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("reports"))
    }

    pub fn resolved_formats(&self) -> Vec<ReportFormat> {
        if self.formats.is_empty() {
            vec![ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Plain]
        } else {
            self.formats.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Used in report titles and file names; defaults to the file stem.
    pub name: Option<String>,
    pub dataset: PathBuf,
    pub schema: DatasetSchema,
    pub test_fraction: f64,
    pub seed: u64,
    pub normalize: bool,
    pub families: Vec<ClassifierSpec>,
    pub noise_rates: Vec<f64>,
    pub regressor: RegressorSpec,
    pub discriminator: ClassifierSpec,
    pub dmts_threshold: f64,
    pub disagreement: DisagreementThresholds,
    pub methods: Vec<Method>,
    pub adaboost: AdaBoostConfig,
    pub forest: ForestParams,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: None,
            dataset: PathBuf::new(),
            schema: DatasetSchema::default(),
            test_fraction: 0.5,
            seed: 0,
            normalize: true,
            families: ClassifierSpec::default_families(),
            noise_rates: vec![0.06, 0.08, 0.1],
            regressor: RegressorSpec::default(),
            discriminator: ClassifierSpec::mlp(),
            dmts_threshold: crate::mts::dmts::DEFAULT_THRESHOLD,
            disagreement: DisagreementThresholds::default(),
            methods: Method::ALL.to_vec(),
            adaboost: AdaBoostConfig::default(),
            forest: ForestParams::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| MtsError::Configuration(format!("invalid config: {e}")))?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| MtsError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.dataset
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "experiment".into())
        })
    }

    pub fn ensemble_size(&self) -> usize {
        self.families.len() * self.noise_rates.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(MtsError::Configuration("select at least one method".into()));
        }
        if let Some(r) = self.noise_rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(MtsError::Configuration(format!("noise rate {r} outside [0, 1]")));
        }
        if self.ensemble_size() < 2 {
            return Err(MtsError::Configuration(format!(
                "ensemble needs at least 2 members, families x rates gives {}",
                self.ensemble_size()
            )));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(MtsError::Configuration(format!(
                "test fraction {} outside (0, 1)",
                self.test_fraction
            )));
        }
        if !(self.dmts_threshold > 0.0 && self.dmts_threshold < 1.0) {
            return Err(MtsError::Configuration(format!(
                "dmts threshold {} outside (0, 1)",
                self.dmts_threshold
            )));
        }
        if self.adaboost.n_estimators == 0 || self.adaboost.max_depth == 0 {
            return Err(MtsError::Configuration(
                "adaboost needs positive n_estimators and max_depth".into(),
            ));
        }
        for spec in &self.families {
            spec.validate()?;
        }
        self.discriminator.validate()?;
        self.regressor.validate()?;
        ClassifierSpec::RandomForest(self.forest.clone()).validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json_uses_protocol_defaults() {
        let c = ExperimentConfig::from_json(r#"{"dataset": "data/german.csv"}"#).unwrap();
        assert_eq!(c.ensemble_size(), 15);
        assert_eq!(c.test_fraction, 0.5);
        assert_eq!(c.methods.len(), 7);
        assert_eq!(c.display_name(), "german");
        c.validate().unwrap();
    }

    #[test]
    fn schema_and_methods_parse() {
        let c = ExperimentConfig::from_json(
            r#"{"dataset": "x.csv", "schema": {"label_column": {"index": 2}, "header": false,
                "class_names": ["a", "b"]}, "methods": ["hmts", "dmts"],
                "disagreement": {"overrides": {"2": 4}}}"#,
        )
        .unwrap();
        assert_eq!(c.schema.label_column, LabelColumn::Index(2));
        assert_eq!(c.methods, vec![Method::Hmts, Method::Dmts]);
        assert_eq!(c.disagreement.threshold(2, 7).unwrap(), 4);
    }

    #[test]
    fn invalid_configs() {
        let c = ExperimentConfig {
            noise_rates: vec![1.5],
            ..ExperimentConfig::default()
        };
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.families.truncate(1);
        c.noise_rates = vec![0.1];
        assert!(matches!(c.validate(), Err(MtsError::Configuration(_))));
        let mut c = ExperimentConfig::default();
        c.methods.clear();
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_json(r#"{"dataset": 3}"#).is_err());
    }
}
