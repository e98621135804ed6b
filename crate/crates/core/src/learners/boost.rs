//! Multiclass AdaBoost (SAMME) over weighted CART trees.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};
use crate::rng::SeededRng;

/// Stage weight used when a round fits the weighted sample perfectly:
/// `ln(1e6)` plus the usual `ln(C - 1)` multiclass offset.
pub fn perfect_round_alpha(num_classes: usize) -> f64 {
    (1e6f64).ln() + ((num_classes - 1) as f64).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    stages: Vec<(DecisionTree, f64)>,
    num_classes: usize,
}

impl AdaBoost {
    pub fn fit(
        x: &Array2<f64>,
        y: &[usize],
        num_classes: usize,
        n_estimators: usize,
        max_depth: usize,
        rng: &SeededRng,
    ) -> AdaBoost {
        let n = y.len();
        let indices: Vec<usize> = (0..n).collect();
        let params = TreeParams {
            max_depth: Some(max_depth),
            min_samples_split: 2,
            max_features: None,
        };
        let k = num_classes as f64;
        let mut w = vec![1.0 / n as f64; n];
        let mut stages = Vec::with_capacity(n_estimators);
        for m in 0..n_estimators {
            let tree = DecisionTree::fit(x, y, &w, &indices, num_classes, &params, &mut rng.derive(m).stream());
            let miss: Vec<bool> = (0..n).map(|i| tree.predict(x.row(i)) != y[i]).collect();
            let total: f64 = w.iter().sum();
            let err = miss.iter().zip(&w).filter(|(m, _)| **m).map(|(_, w)| w).sum::<f64>() / total;
            if err <= 0.0 {
                stages.push((tree, perfect_round_alpha(num_classes)));
                break;
            }
            if err >= 1.0 - 1.0 / k {
                if stages.is_empty() {
                    stages.push((tree, 1.0));
                }
                break;
            }
            let alpha = ((1.0 - err) / err).ln() + (k - 1.0).ln();
            for (wi, &missed) in w.iter_mut().zip(&miss) {
                if missed {
                    *wi *= alpha.exp();
                }
            }
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= total);
            stages.push((tree, alpha));
        }
        AdaBoost { stages, num_classes }
    }

    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn stage_weights(&self) -> Vec<f64> {
        self.stages.iter().map(|(_, a)| *a).collect()
    }

    pub fn stages(&self) -> impl Iterator<Item = &DecisionTree> {
        self.stages.iter().map(|(t, _)| t)
    }

    /// Prediction using only the first `stages` rounds.
    pub fn staged_predict(&self, x: ArrayView1<f64>, stages: usize) -> usize {
        let mut score = vec![0.0; self.num_classes];
        for (tree, alpha) in self.stages.iter().take(stages) {
            score[tree.predict(x)] += alpha;
        }
        super::linear::argmax(score.into_iter())
    }

    pub fn predict(&self, x: ArrayView1<f64>) -> usize {
        self.staged_predict(x, self.stages.len())
    }

    pub fn predict_proba(&self, x: ArrayView1<f64>) -> Vec<f64> {
        let mut score = vec![0.0; self.num_classes];
        for (tree, alpha) in &self.stages {
            score[tree.predict(x)] += alpha;
        }
        let total: f64 = score.iter().sum();
        if total > 0.0 {
            score.iter().map(|s| s / total).collect()
        } else {
            vec![1.0 / self.num_classes as f64; self.num_classes]
        }
    }
}
