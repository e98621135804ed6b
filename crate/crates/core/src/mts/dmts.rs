//! Discriminative machine truth serum.
//!
//! A binary discriminator is trained to predict, from the features alone,
//! whether the ensemble majority is wrong on an instance. When it says so,
//! the most voted minority class is returned instead.

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use super::MtsDecision;
use crate::data::{vote_counts, Dataset, PredictionMatrix};
use crate::error::{MtsError, Result};
use crate::learners::{train_classifier_weighted, ClassifierSpec, Ensemble, TrainedClassifier};
use crate::rng::SeededRng;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// 1 where the majority vote differs from the truth, 0 elsewhere.
pub fn build_dmts_labels(predictions: &PredictionMatrix, truth: &[usize]) -> Result<Vec<usize>> {
    if truth.len() != predictions.num_instances() {
        return Err(MtsError::Shape(format!(
            "{} labels for {} prediction rows",
            truth.len(),
            predictions.num_instances()
        )));
    }
    Ok(predictions
        .majority_labels()
        .iter()
        .zip(truth)
        .map(|(m, t)| usize::from(m != t))
        .collect())
}

/// Weights `N / (2 n_y)` so both label classes carry equal total weight.
pub fn balanced_weights(labels: &[usize]) -> Vec<f64> {
    let n = labels.len() as f64;
    let ones = labels.iter().filter(|&&y| y == 1).count() as f64;
    let zeros = n - ones;
    labels
        .iter()
        .map(|&y| {
            let count = if y == 1 { ones } else { zeros };
            n / (2.0 * count)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DmtsModel {
    discriminator: TrainedClassifier,
    threshold: f64,
}

impl DmtsModel {
    pub fn new(discriminator: TrainedClassifier, threshold: f64) -> Result<Self> {
        check_threshold(threshold)?;
        if discriminator.num_classes() != 2 {
            return Err(MtsError::Configuration("discriminator must be binary".into()));
        }
        Ok(DmtsModel {
            discriminator,
            threshold,
        })
    }

    pub fn discriminator(&self) -> &TrainedClassifier {
        &self.discriminator
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Set when training saw only one label and the discriminator is constant.
    pub fn is_degenerate(&self) -> bool {
        self.discriminator.is_degenerate()
    }

    /// Score in `[0, 1]` that the majority is wrong at `x`.
    pub fn minority_score(&self, x: ArrayView1<f64>) -> Result<f64> {
        Ok(self.discriminator.predict_proba(x)?[1])
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(MtsError::Configuration(format!("threshold {threshold} outside (0, 1)")))
    }
}

pub fn train_dmts(
    ensemble: &Ensemble,
    train: &Dataset,
    spec: &ClassifierSpec,
    threshold: f64,
    rng: &SeededRng,
) -> Result<DmtsModel> {
    check_threshold(threshold)?;
    let predictions = ensemble.predict_matrix(train.features())?;
    let labels = build_dmts_labels(&predictions, train.labels())?;
    let weights = balanced_weights(&labels);
    let data = train.relabel(labels, 2)?;
    let discriminator = train_classifier_weighted(spec, &data, Some(&weights), rng)?;
    if discriminator.is_degenerate() {
        log::warn!("dmts: discriminator is constant");
    }
    DmtsModel::new(discriminator, threshold)
}

/// Applies the flip rule for a given discriminator score.
pub fn dmts_decide_with_score(score: f64, threshold: f64, row: &[usize], num_classes: usize) -> Result<MtsDecision> {
    let profile = vote_counts(row, num_classes)?;
    let majority = profile.majority();
    let answer = if score > threshold && !profile.is_unanimous() {
        profile.runner_up().unwrap_or(majority)
    } else {
        majority
    };
    Ok(MtsDecision {
        answer,
        prior: Vec::new(),
        posterior: profile.fractions(),
        followed_minority: answer != majority,
        c_sat: Vec::new(),
        minority_score: Some(score),
    })
}

pub fn dmts_decide(model: &DmtsModel, x: ArrayView1<f64>, row: &[usize], num_classes: usize) -> Result<MtsDecision> {
    let score = model.minority_score(x)?;
    dmts_decide_with_score(score, model.threshold, row, num_classes)
}
