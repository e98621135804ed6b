//! Closed-form ridge regression with an unpenalized intercept.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ridge {
    weights: Array1<f64>,
    intercept: f64,
}

impl Ridge {
    /// Solves `(Xc' Xc + lambda I) w = Xc' yc` on centered data.
    pub fn fit(x: ArrayView2<f64>, y: &[f64], lambda: f64) -> Ridge {
        let (n, d) = x.dim();
        let x_mean = x.mean_axis(Axis(0)).expect("at least one row");
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let xc = DMatrix::from_fn(n, d, |i, j| x[[i, j]] - x_mean[j]);
        let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
        let mut gram = xc.transpose() * &xc;
        for j in 0..d {
            gram[(j, j)] += lambda;
        }
        let rhs = xc.transpose() * yc;
        let solution = match gram.clone().cholesky() {
            Some(chol) => chol.solve(&rhs),
            // singular with lambda ~ 0: least-norm solution
            None => gram
                .svd(true, true)
                .solve(&rhs, 1e-12)
                .unwrap_or_else(|_| DVector::zeros(d)),
        };
        let weights = Array1::from_iter(solution.iter().copied());
        let intercept = y_mean - weights.dot(&x_mean);
        Ridge { weights, intercept }
    }

    pub fn weights(&self) -> &Array1<f64> {
        &self.weights
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn predict(&self, x: ArrayView1<f64>) -> f64 {
        self.weights.dot(&x) + self.intercept
    }
}
