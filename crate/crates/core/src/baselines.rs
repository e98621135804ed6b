//! Comparison aggregators: accuracy-weighted majority voting.
//!
//! AdaBoost and random forest baselines are trained directly through
//! [`crate::learners::train_adaboost`] and
//! [`crate::learners::ClassifierSpec::RandomForest`].

use serde::{Deserialize, Serialize};

use crate::data::{accuracy, Dataset};
use crate::error::{MtsError, Result};
use crate::learners::linear::argmax;
use crate::learners::Ensemble;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(MtsError::Input("weights must be finite and non-negative".into()));
        }
        if !weights.iter().any(|&w| w > 0.0) {
            return Err(MtsError::Input("at least one weight must be positive".into()));
        }
        Ok(WeightVector { weights })
    }

    pub fn uniform(k: usize) -> Self {
        WeightVector { weights: vec![1.0; k] }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Training accuracy of each member; uniform if every member scores 0.
pub fn compute_weights(ensemble: &Ensemble, train: &Dataset) -> Result<WeightVector> {
    let predictions = ensemble.predict_matrix(train.features())?;
    let weights = (0..ensemble.len())
        .map(|j| accuracy(&predictions.column(j), train.labels()))
        .collect::<Result<Vec<_>>>()?;
    WeightVector::new(weights).or_else(|_| Ok(WeightVector::uniform(ensemble.len())))
}

/// Class with the largest total weight of votes, ties to the lowest index.
pub fn weighted_majority(row: &[usize], weights: &WeightVector, num_classes: usize) -> Result<usize> {
    if row.len() != weights.len() {
        return Err(MtsError::Shape(format!(
            "{} votes for {} weights",
            row.len(),
            weights.len()
        )));
    }
    let mut score = vec![0.0; num_classes];
    for (&v, &w) in row.iter().zip(weights.as_slice()) {
        if v >= num_classes {
            return Err(MtsError::Input(format!("vote {v} outside 0..{num_classes}")));
        }
        score[v] += w;
    }
    Ok(argmax(score.into_iter()))
}
