//! Bagged random forest over [`DecisionTree`]s.

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};
use crate::rng::SeededRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    num_classes: usize,
}

/// `n` draws with replacement from `0..n`.
pub fn bootstrap_indices(n: usize, rng: &SeededRng) -> Vec<usize> {
    let mut stream = rng.stream();
    (0..n).map(|_| stream.random_range(0..n)).collect()
}

/// Seed path used for tree `t` of a forest trained with `rng`.
pub fn tree_rng(rng: &SeededRng, t: usize) -> SeededRng {
    rng.derive(format!("tree{t}"))
}

impl RandomForest {
    /// Tree `t` draws its bootstrap from `tree_rng(rng, t).derive("bootstrap")`
    /// and its feature subsets from `tree_rng(rng, t).derive("split")`.
    pub fn fit(
        x: &Array2<f64>,
        y: &[usize],
        weights: &[f64],
        num_classes: usize,
        n_trees: usize,
        params: &TreeParams,
        rng: &SeededRng,
    ) -> RandomForest {
        let n = y.len();
        let trees = (0..n_trees)
            .map(|t| {
                let tr = tree_rng(rng, t);
                let idx = bootstrap_indices(n, &tr.derive("bootstrap"));
                DecisionTree::fit(
                    x,
                    y,
                    weights,
                    &idx,
                    num_classes,
                    params,
                    &mut tr.derive("split").stream(),
                )
            })
            .collect();
        RandomForest { trees, num_classes }
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    fn votes(&self, x: ArrayView1<f64>) -> Vec<usize> {
        let mut votes = vec![0; self.num_classes];
        for tree in &self.trees {
            votes[tree.predict(x)] += 1;
        }
        votes
    }

    /// Majority of tree votes, ties to the lowest class.
    pub fn predict(&self, x: ArrayView1<f64>) -> usize {
        let votes = self.votes(x);
        super::linear::argmax(votes.iter().map(|&v| v as f64))
    }

    pub fn predict_proba(&self, x: ArrayView1<f64>) -> Vec<f64> {
        let n = self.trees.len() as f64;
        self.votes(x).iter().map(|&v| v as f64 / n).collect()
    }
}
