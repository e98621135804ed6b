//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::path::PathBuf;

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Majority by plain counting: most votes, lowest class on ties.
pub fn brute_majority(row: &[usize], num_classes: usize) -> usize {
    let mut best = 0;
    let mut best_n = 0;
    for c in 0..num_classes {
        let n = row.iter().filter(|&&v| v == c).count();
        if n > best_n {
            best = c;
            best_n = n;
        }
    }
    best
}

/// Weighted vote by summing weights per class, lowest class on ties.
pub fn brute_weighted(row: &[usize], weights: &[f64], num_classes: usize) -> usize {
    let mut score = vec![0.0; num_classes];
    for (&v, &w) in row.iter().zip(weights) {
        score[v] += w;
    }
    let mut best = 0;
    for c in 1..num_classes {
        if score[c] > score[best] {
            best = c;
        }
    }
    best
}

/// Binary truth-serum decision in exact integer arithmetic. Peer fractions
/// are given in quarters (`q` in 0..=4 stands for q/4). All quantities are
/// scaled by 4K so the prior/posterior comparison is exact.
pub fn bts_oracle_quarters(labels: &[usize], quarters: &[u32]) -> (usize, i64, i64) {
    let k = labels.len() as i64;
    let ones = labels.iter().filter(|&&l| l == 1).count() as i64;
    let posterior = 4 * ones;
    let prior: i64 = labels
        .iter()
        .zip(quarters)
        .map(|(&l, &q)| if l == 1 { q as i64 } else { 4 - q as i64 })
        .sum();
    let answer = if prior < posterior {
        1
    } else if prior > posterior {
        0
    } else if 2 * ones > k {
        1
    } else {
        0
    };
    (answer, prior, posterior)
}

/// Peer agreement counted pair by pair.
pub fn brute_agreement(row: &[usize], j: usize) -> f64 {
    let mut agree = 0;
    for (k, &v) in row.iter().enumerate() {
        if k != j && v == row[j] {
            agree += 1;
        }
    }
    agree as f64 / (row.len() - 1) as f64
}

/// Beliefs a perfect peer-agreement regressor would report on `row`:
/// member `j` expects the share of the other members voting `c`.
pub fn oracle_beliefs(row: &[usize], num_classes: usize) -> Array2<f64> {
    let k = row.len();
    Array2::from_shape_fn((k, num_classes), |(j, c)| {
        let n = row.iter().enumerate().filter(|&(m, &v)| m != j && v == c).count();
        n as f64 / (k - 1) as f64
    })
}

pub fn random_row(k: usize, num_classes: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..k).map(|_| rng.random_range(0..num_classes)).collect()
}

/// Raw beliefs, deliberately spilling outside [0, 1] so clamping is exercised.
pub fn raw_beliefs(k: usize, num_classes: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((k, num_classes), |_| rng.random_range(-0.3..1.3))
}

/// Two Gaussian-ish blobs in `dim` dimensions, classes alternating.
pub fn blobs(n: usize, dim: usize, gap: f64, rng: &mut ChaCha8Rng) -> (Array2<f64>, Vec<usize>) {
    let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let x = Array2::from_shape_fn((n, dim), |(i, _)| {
        let centre = if labels[i] == 1 { gap } else { -gap };
        centre + rng.random_range(-1.0..1.0)
    });
    (x, labels)
}

pub fn data_dir() -> PathBuf {
    std::env::var_os("MTS_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

/// Relative error used by the gradient checks.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}
