//! One experiment: split, noisy ensemble, every aggregator on every test
//! instance, and the high-disagreement evaluation view.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use super::ensemble::build_noisy_ensemble;
use super::ingest::{load_csv, LoadedDataset};
use crate::baselines::{compute_weights, weighted_majority};
use crate::bts::{bts_decide, bts_decide_multiclass, AgentReport};
use crate::data::{accuracy, stratified_split_indices, z_normalize, Dataset, PredictionMatrix};
use crate::error::Result;
use crate::learners::{train_adaboost, train_classifier, ClassifierSpec, TrainedClassifier};
use crate::mts::dmts::{dmts_decide, train_dmts};
use crate::mts::hmts::{hmts_decide, train_hmts, HmtsModel};
use crate::rng::SeededRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub accuracy: f64,
    /// High-disagreement instances the method gets right and the majority wrong.
    pub corrected: usize,
    /// High-disagreement instances the majority gets right and the method wrong.
    pub broken: usize,
    /// `corrected - broken`.
    pub net: i64,
    /// `net / subset_size`, absent for an empty subset.
    pub improvement: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    /// Row of the instance in the source file (0-based, header excluded).
    pub instance: usize,
    pub truth: usize,
    pub votes: Vec<usize>,
    pub high_disagreement: bool,
    /// One answer per entry of [`ExperimentReport::methods`].
    pub answers: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub seed: u64,
    pub num_classes: usize,
    pub class_names: Vec<String>,
    pub member_names: Vec<String>,
    pub train_size: usize,
    pub test_size: usize,
    /// Largest majority count that still counts as high disagreement.
    pub disagreement_threshold: usize,
    pub subset_size: usize,
    /// Majority voting is always first.
    pub methods: Vec<MethodResult>,
    pub hmts_fallbacks: Option<usize>,
    pub dmts_degenerate: Option<bool>,
    pub decisions: Vec<DecisionRecord>,
}

impl ExperimentReport {
    pub fn result(&self, method: Method) -> Option<&MethodResult> {
        self.methods.iter().find(|r| r.method == method)
    }

    pub fn method_index(&self, method: Method) -> Option<usize> {
        self.methods.iter().position(|r| r.method == method)
    }

    /// Answers of `method` in decision-log order.
    pub fn answers(&self, method: Method) -> Option<Vec<usize>> {
        let m = self.method_index(method)?;
        Some(self.decisions.iter().map(|d| d.answers[m]).collect())
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let loaded = load_csv(&config.dataset, &config.schema)?;
    run_on_dataset(config, &loaded)
}

/// Seed paths: `split`, `ensemble`, `weighted`, `adaboost`, `rf`, `hmts`,
/// `dmts` under the master seed.
pub fn run_on_dataset(config: &ExperimentConfig, loaded: &LoadedDataset) -> Result<ExperimentReport> {
    config.validate()?;
    let data = &loaded.dataset;
    let rng = SeededRng::new(config.seed);
    let (train_idx, test_idx) = stratified_split_indices(data, config.test_fraction, &rng.derive("split"))?;
    let (mut train, mut test) = (data.subset(&train_idx)?, data.subset(&test_idx)?);
    if config.normalize {
        (train, test) = z_normalize(&train, &test)?;
    }
    let c = data.num_classes();
    let k = config.ensemble_size();
    let threshold = config.disagreement.threshold(c, k)?;

    let ensemble = build_noisy_ensemble(&train, &config.families, &config.noise_rates, &rng.derive("ensemble"))?;
    let votes = ensemble.predict_matrix(test.features())?;
    let majority = votes.majority_labels();

    let mut methods = vec![Method::Majority];
    methods.extend(config.methods.iter().copied().filter(|&m| m != Method::Majority));
    methods.dedup();
    let needs_hmts = methods.iter().any(|m| matches!(m, Method::Hmts | Method::Bts));
    let hmts = if needs_hmts {
        Some(train_hmts(&ensemble, &train, &config.regressor, &rng.derive("hmts"))?)
    } else {
        None
    };
    let mut dmts_degenerate = None;

    let mut answers: Vec<Vec<usize>> = Vec::with_capacity(methods.len());
    for &method in &methods {
        let a = match method {
            Method::Majority => majority.clone(),
            Method::Weighted => {
                let w = compute_weights(&ensemble, &train)?;
                (0..votes.num_instances())
                    .map(|i| weighted_majority(votes.row(i), &w, c))
                    .collect::<Result<_>>()?
            }
            Method::Adaboost => {
                let model = train_adaboost(
                    &train,
                    config.adaboost.n_estimators,
                    config.adaboost.max_depth,
                    &rng.derive("adaboost"),
                )?;
                predict_all(&model, &test)?
            }
            Method::Rf => {
                let spec = ClassifierSpec::RandomForest(config.forest.clone());
                let model = train_classifier(&spec, &train, &rng.derive("rf"))?;
                predict_all(&model, &test)?
            }
            Method::Hmts => {
                let model = hmts.as_ref().expect("hmts trained");
                par_rows(&test, &votes, |x, row| Ok(hmts_decide(model, x, row)?.answer))?
            }
            Method::Dmts => {
                let model = train_dmts(
                    &ensemble,
                    &train,
                    &config.discriminator,
                    config.dmts_threshold,
                    &rng.derive("dmts"),
                )?;
                dmts_degenerate = Some(model.is_degenerate());
                par_rows(&test, &votes, |x, row| Ok(dmts_decide(&model, x, row, c)?.answer))?
            }
            Method::Bts => {
                let model = hmts.as_ref().expect("hmts trained");
                par_rows(&test, &votes, |x, row| bts_answer(model, x, row, c))?
            }
        };
        answers.push(a);
    }

    let truth = test.labels();
    let high: Vec<bool> = (0..votes.num_instances())
        .map(|i| votes.profile(i).max_count() <= threshold)
        .collect();
    let subset_size = high.iter().filter(|&&h| h).count();
    let results = methods
        .iter()
        .zip(&answers)
        .map(|(&method, a)| {
            let mut corrected = 0;
            let mut broken = 0;
            for i in (0..a.len()).filter(|&i| high[i]) {
                let (ok, maj_ok) = (a[i] == truth[i], majority[i] == truth[i]);
                corrected += usize::from(ok && !maj_ok);
                broken += usize::from(!ok && maj_ok);
            }
            let net = corrected as i64 - broken as i64;
            Ok(MethodResult {
                method,
                accuracy: accuracy(a, truth)?,
                corrected,
                broken,
                net,
                improvement: (subset_size > 0).then(|| net as f64 / subset_size as f64),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let decisions = (0..votes.num_instances())
        .map(|i| DecisionRecord {
            instance: test_idx[i],
            truth: truth[i],
            votes: votes.row(i).to_vec(),
            high_disagreement: high[i],
            answers: answers.iter().map(|a| a[i]).collect(),
        })
        .collect();
    Ok(ExperimentReport {
        name: config.display_name(),
        seed: config.seed,
        num_classes: c,
        class_names: loaded.class_names.clone(),
        member_names: ensemble.names().to_vec(),
        train_size: train.len(),
        test_size: test.len(),
        disagreement_threshold: threshold,
        subset_size,
        methods: results,
        hmts_fallbacks: hmts.as_ref().map(HmtsModel::num_fallbacks),
        dmts_degenerate,
        decisions,
    })
}

fn predict_all(model: &TrainedClassifier, test: &Dataset) -> Result<Vec<usize>> {
    model.predict_batch(test.features().view())
}

fn par_rows<F>(test: &Dataset, votes: &PredictionMatrix, f: F) -> Result<Vec<usize>>
where
    F: Fn(ndarray::ArrayView1<f64>, &[usize]) -> Result<usize> + Sync,
{
    let x: &Array2<f64> = test.features();
    (0..votes.num_instances())
        .into_par_iter()
        .map(|i| f(x.row(i), votes.row(i)))
        .collect()
}

/// BTS over members as agents: each reports its vote and its clamped
/// belief for that vote.
fn bts_answer(model: &HmtsModel, x: ndarray::ArrayView1<f64>, row: &[usize], c: usize) -> Result<usize> {
    let reports = row
        .iter()
        .enumerate()
        .map(|(j, &v)| AgentReport::new(v, model.belief(j, v, x)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(if c == 2 {
        bts_decide(&reports)?.answer
    } else {
        bts_decide_multiclass(&reports, c)?.answer
    })
}
