//! Linear classifiers: perceptron, logistic regression and a hinge-loss SVM.
//!
//! Binary problems train a single weight vector (class 1 iff the score is
//! positive). Multiclass problems train one-vs-rest and take the argmax score.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScoreKind {
    /// Sign of the margin only.
    Hard,
    /// Logistic link on the margin.
    Sigmoid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    weights: Array2<f64>,
    bias: Array1<f64>,
    kind: ScoreKind,
    num_classes: usize,
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum LinearTrainer {
    Perceptron {
        epochs: usize,
        learning_rate: f64,
    },
    Logistic {
        iterations: usize,
        learning_rate: f64,
        l2: f64,
    },
    Svm {
        epochs: usize,
        lambda: f64,
    },
}

impl LinearTrainer {
    fn kind(&self) -> ScoreKind {
        match self {
            LinearTrainer::Logistic { .. } => ScoreKind::Sigmoid,
            _ => ScoreKind::Hard,
        }
    }

    /// Targets are +1 / -1.
    fn fit_binary(
        &self,
        x: ArrayView2<f64>,
        targets: &[f64],
        weights: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> (Array1<f64>, f64) {
        match *self {
            LinearTrainer::Perceptron { epochs, learning_rate } => {
                perceptron(x, targets, weights, epochs, learning_rate, rng)
            }
            LinearTrainer::Logistic {
                iterations,
                learning_rate,
                l2,
            } => logistic(x, targets, weights, iterations, learning_rate, l2),
            LinearTrainer::Svm { epochs, lambda } => pegasos(x, targets, weights, epochs, lambda, rng),
        }
    }
}

impl LinearModel {
    pub(crate) fn fit(
        trainer: LinearTrainer,
        x: ArrayView2<f64>,
        labels: &[usize],
        weights: &[f64],
        num_classes: usize,
        rng: &mut ChaCha8Rng,
    ) -> LinearModel {
        let d = x.ncols();
        let heads = if num_classes == 2 { 1 } else { num_classes };
        let mut w = Array2::zeros((heads, d));
        let mut b = Array1::zeros(heads);
        for h in 0..heads {
            let positive = if num_classes == 2 { 1 } else { h };
            let targets: Vec<f64> = labels.iter().map(|&y| if y == positive { 1.0 } else { -1.0 }).collect();
            let (wh, bh) = trainer.fit_binary(x, &targets, weights, rng);
            w.row_mut(h).assign(&wh);
            b[h] = bh;
        }
        LinearModel {
            weights: w,
            bias: b,
            kind: trainer.kind(),
            num_classes,
        }
    }

    pub fn from_parts(weights: Array2<f64>, bias: Array1<f64>, kind: ScoreKind, num_classes: usize) -> Self {
        LinearModel {
            weights,
            bias,
            kind,
            num_classes,
        }
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<f64> {
        &self.bias
    }

    pub fn scores(&self, x: ArrayView1<f64>) -> Array1<f64> {
        self.weights.dot(&x) + &self.bias
    }

    pub fn predict(&self, x: ArrayView1<f64>) -> usize {
        let s = self.scores(x);
        if self.num_classes == 2 {
            usize::from(s[0] > 0.0)
        } else {
            argmax(s.iter().copied())
        }
    }

    pub fn predict_proba(&self, x: ArrayView1<f64>) -> Vec<f64> {
        match self.kind {
            ScoreKind::Hard => {
                let mut p = vec![0.0; self.num_classes];
                p[self.predict(x)] = 1.0;
                p
            }
            ScoreKind::Sigmoid => {
                let s = self.scores(x);
                if self.num_classes == 2 {
                    let p1 = sigmoid(s[0]);
                    vec![1.0 - p1, p1]
                } else {
                    let raw: Vec<f64> = s.iter().map(|&v| sigmoid(v)).collect();
                    let total: f64 = raw.iter().sum();
                    raw.iter().map(|v| v / total).collect()
                }
            }
        }
    }
}

pub(crate) fn argmax<I: Iterator<Item = f64>>(values: I) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn perceptron(
    x: ArrayView2<f64>,
    targets: &[f64],
    weights: &[f64],
    epochs: usize,
    lr: f64,
    rng: &mut ChaCha8Rng,
) -> (Array1<f64>, f64) {
    let mut w = Array1::zeros(x.ncols());
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    for _ in 0..epochs {
        order.shuffle(rng);
        let mut mistakes = 0;
        for &i in &order {
            let xi = x.row(i);
            let t = targets[i];
            if t * (w.dot(&xi) + b) <= 0.0 {
                let step = lr * weights[i] * t;
                w.scaled_add(step, &xi);
                b += step;
                mistakes += 1;
            }
        }
        if mistakes == 0 {
            break;
        }
    }
    (w, b)
}

fn logistic(
    x: ArrayView2<f64>,
    targets: &[f64],
    weights: &[f64],
    iterations: usize,
    lr: f64,
    l2: f64,
) -> (Array1<f64>, f64) {
    let n = x.nrows();
    let total: f64 = weights.iter().sum();
    let y01: Array1<f64> = targets.iter().map(|&t| if t > 0.0 { 1.0 } else { 0.0 }).collect();
    let s = Array1::from(weights.to_vec()) / total;
    let mut w = Array1::zeros(x.ncols());
    let mut b = 0.0;
    for _ in 0..iterations {
        let z = x.dot(&w) + b;
        let mut residual = Array1::zeros(n);
        for i in 0..n {
            residual[i] = (sigmoid(z[i]) - y01[i]) * s[i];
        }
        let grad_w = x.t().dot(&residual) + &(&w * l2);
        let grad_b = residual.sum();
        w.scaled_add(-lr, &grad_w);
        b -= lr * grad_b;
    }
    (w, b)
}

/// Pegasos-style stochastic subgradient descent on the regularized hinge
/// loss. The bias is an extra constant feature.
fn pegasos(
    x: ArrayView2<f64>,
    targets: &[f64],
    weights: &[f64],
    epochs: usize,
    lambda: f64,
    rng: &mut ChaCha8Rng,
) -> (Array1<f64>, f64) {
    let d = x.ncols();
    let mean_weight = weights.iter().sum::<f64>() / weights.len() as f64;
    let mut w = Array1::<f64>::zeros(d);
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    let mut t = 0usize;
    for _ in 0..epochs {
        order.shuffle(rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let xi = x.row(i);
            let margin = targets[i] * (w.dot(&xi) + b);
            let shrink = 1.0 - eta * lambda;
            w *= shrink;
            b *= shrink;
            if margin < 1.0 {
                let step = eta * targets[i] * weights[i] / mean_weight;
                w.scaled_add(step, &xi);
                b += step;
            }
        }
    }
    (w, b)
}

/// Unit weights when none are given.
pub(crate) fn unit_weights(n: usize) -> Vec<f64> {
    vec![1.0; n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;

    #[test]
    fn sign_decides_binary_class() {
        let m = LinearModel::from_parts(array![[1.0, -1.0]], array![0.5], ScoreKind::Hard, 2);
        assert_eq!(m.predict(array![1.0, 0.0].view()), 1);
        assert_eq!(m.predict(array![0.0, 1.0].view()), 0);
        assert_eq!(m.predict_proba(array![0.0, 1.0].view()), vec![1.0, 0.0]);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert!(sigmoid(-1000.0) >= 0.0 && sigmoid(1000.0) <= 1.0);
    }

    #[test]
    fn logistic_separates_1d() {
        let x = array![[-2.0], [-1.0], [1.0], [2.0]];
        let labels = [0, 0, 1, 1];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let trainer = LinearTrainer::Logistic {
            iterations: 500,
            learning_rate: 0.1,
            l2: 1e-4,
        };
        let m = LinearModel::fit(trainer, x.view(), &labels, &unit_weights(4), 2, &mut rng);
        for (i, &y) in labels.iter().enumerate() {
            assert_eq!(m.predict(x.row(i)), y);
        }
        let p = m.predict_proba(array![2.0].view());
        assert!(p[1] > 0.5 && (p[0] + p[1] - 1.0).abs() < 1e-12);
    }
}
