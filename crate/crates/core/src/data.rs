//! Datasets, splits, label noise, vote tallies and metrics.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MtsError, Result};
use crate::rng::SeededRng;

/// Feature matrix with integer class labels in `0..num_classes`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        let (n, d) = features.dim();
        if n == 0 || d == 0 {
            return Err(MtsError::Shape(format!("dataset needs N >= 1 and d >= 1, got {n}x{d}")));
        }
        if labels.len() != n {
            return Err(MtsError::Shape(format!(
                "{} labels for {} feature rows",
                labels.len(),
                n
            )));
        }
        if num_classes < 2 {
            return Err(MtsError::Configuration(format!(
                "num_classes must be at least 2, got {num_classes}"
            )));
        }
        if let Some((i, &y)) = labels.iter().enumerate().find(|(_, &y)| y >= num_classes) {
            return Err(MtsError::Input(format!(
                "label {y} at row {i} outside 0..{num_classes}"
            )));
        }
        if let Some(((i, j), v)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(MtsError::Input(format!("non-finite feature {v} at ({i}, {j})")));
        }
        Ok(Dataset {
            features,
            labels,
            num_classes,
        })
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Rows selected by `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        if indices.is_empty() {
            return Err(MtsError::Shape("empty subset".into()));
        }
        let features = self.features.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Ok(Dataset {
            features,
            labels,
            num_classes: self.num_classes,
        })
    }

    /// Same features, different labels.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Dataset> {
        Dataset::new(self.features.clone(), labels, self.num_classes)
    }

    /// Same features relabelled into a new label space.
    pub fn relabel(&self, labels: Vec<usize>, num_classes: usize) -> Result<Dataset> {
        Dataset::new(self.features.clone(), labels, num_classes)
    }
}

/// Per-class stratified train/test partition. Both outputs keep input row order.
pub fn stratified_split(dataset: &Dataset, test_fraction: f64, rng: &SeededRng) -> Result<(Dataset, Dataset)> {
    let (train, test) = stratified_split_indices(dataset, test_fraction, rng)?;
    Ok((dataset.subset(&train)?, dataset.subset(&test)?))
}

/// Index form of [`stratified_split`]: `(train_indices, test_indices)`, each ascending.
pub fn stratified_split_indices(
    dataset: &Dataset,
    test_fraction: f64,
    rng: &SeededRng,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(MtsError::Configuration(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &y) in dataset.labels().iter().enumerate() {
        by_class.entry(y).or_default().push(i);
    }
    let mut stream = rng.stream();
    let mut train = Vec::with_capacity(dataset.len());
    let mut test = Vec::with_capacity(dataset.len());
    for (class, mut members) in by_class {
        let n = members.len();
        if n < 2 {
            return Err(MtsError::Configuration(format!(
                "class {class} has {n} instance(s); stratified split needs at least 2"
            )));
        }
        members.shuffle(&mut stream);
        let n_test = ((n as f64) * test_fraction).round().clamp(1.0, (n - 1) as f64) as usize;
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Replace each label, with probability `rate`, by a uniformly drawn different class.
pub fn flip_labels(dataset: &Dataset, rate: f64, rng: &SeededRng) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(MtsError::Configuration(format!(
            "flip rate must lie in [0, 1], got {rate}"
        )));
    }
    let others = dataset.num_classes() - 1;
    let mut stream = rng.stream();
    let labels = dataset
        .labels()
        .iter()
        .map(|&y| {
            if stream.random::<f64>() < rate {
                let r = stream.random_range(0..others);
                if r >= y {
                    r + 1
                } else {
                    r
                }
            } else {
                y
            }
        })
        .collect();
    dataset.with_labels(labels)
}

/// Tally of ensemble votes over the class set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteProfile {
    counts: Vec<usize>,
    total: usize,
}

impl VoteProfile {
    pub fn from_counts(counts: Vec<usize>) -> Self {
        let total = counts.iter().sum();
        VoteProfile { counts, total }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn max_count(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Most voted class; ties go to the lowest index.
    pub fn majority(&self) -> usize {
        argmax_first(self.counts.iter().copied())
    }

    /// Most voted class other than the majority, ties to the lowest index.
    /// `None` when no other class received a vote.
    pub fn runner_up(&self) -> Option<usize> {
        let majority = self.majority();
        let mut best: Option<usize> = None;
        for (c, &n) in self.counts.iter().enumerate() {
            if c == majority || n == 0 {
                continue;
            }
            if best.is_none_or(|b| n > self.counts[b]) {
                best = Some(c);
            }
        }
        best
    }

    pub fn is_unanimous(&self) -> bool {
        self.total > 0 && self.max_count() == self.total
    }

    /// Fraction of votes per class.
    pub fn fractions(&self) -> Vec<f64> {
        let total = self.total as f64;
        self.counts.iter().map(|&n| n as f64 / total).collect()
    }
}

fn argmax_first<I: Iterator<Item = usize>>(values: I) -> usize {
    let mut best = 0;
    let mut best_value = None;
    for (i, v) in values.enumerate() {
        if best_value.is_none_or(|b| v > b) {
            best = i;
            best_value = Some(v);
        }
    }
    best
}

pub fn vote_counts(row: &[usize], num_classes: usize) -> Result<VoteProfile> {
    if row.is_empty() {
        return Err(MtsError::Input("empty prediction row".into()));
    }
    let mut counts = vec![0; num_classes];
    for &c in row {
        if c >= num_classes {
            return Err(MtsError::Input(format!("vote {c} outside 0..{num_classes}")));
        }
        counts[c] += 1;
    }
    Ok(VoteProfile {
        counts,
        total: row.len(),
    })
}

pub fn majority_label(profile: &VoteProfile) -> usize {
    profile.majority()
}

/// "High disagreement" thresholds: an instance qualifies when the majority
/// class received at most `threshold` votes.
///
/// Defaults are keyed by class count and assume a 15-member ensemble: binary
/// 9 (splits 9:6 through 6:9), 3 and 4 classes 6, 6 classes 5, 10 classes 3.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct DisagreementThresholds {
    /// Explicit max-count thresholds by class count; these also apply to
    /// ensembles whose size is not 15.
    #[serde(default)]
    pub overrides: BTreeMap<usize, usize>,
}

pub const DEFAULT_ENSEMBLE_SIZE: usize = 15;

impl DisagreementThresholds {
    pub fn with_override(mut self, num_classes: usize, max_count: usize) -> Self {
        self.overrides.insert(num_classes, max_count);
        self
    }

    pub fn threshold(&self, num_classes: usize, total: usize) -> Result<usize> {
        if let Some(&t) = self.overrides.get(&num_classes) {
            return Ok(t);
        }
        if total != DEFAULT_ENSEMBLE_SIZE {
            return Err(MtsError::Configuration(format!(
                "no disagreement threshold configured for {num_classes} classes with {total} voters"
            )));
        }
        match num_classes {
            2 => Ok(9),
            3 | 4 => Ok(6),
            6 => Ok(5),
            10 => Ok(3),
            _ => Err(MtsError::Configuration(format!(
                "no disagreement threshold configured for {num_classes} classes"
            ))),
        }
    }

    pub fn is_high_disagreement(&self, profile: &VoteProfile) -> Result<bool> {
        let t = self.threshold(profile.num_classes(), profile.total())?;
        Ok(profile.max_count() <= t)
    }
}

/// Default-threshold disagreement test.
pub fn is_high_disagreement(profile: &VoteProfile, num_classes: usize) -> Result<bool> {
    if profile.num_classes() != num_classes {
        return Err(MtsError::Shape(format!(
            "profile has {} classes, expected {num_classes}",
            profile.num_classes()
        )));
    }
    DisagreementThresholds::default().is_high_disagreement(profile)
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(MtsError::Shape(format!(
            "{} predictions vs {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(MtsError::Shape("accuracy of zero instances".into()));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Per-feature standardization with statistics from `train` only.
/// Zero-variance features map to 0.
pub fn z_normalize(train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset)> {
    if train.dim() != test.dim() {
        return Err(MtsError::Shape(format!(
            "train has {} features, test has {}",
            train.dim(),
            test.dim()
        )));
    }
    let mean = train
        .features()
        .mean_axis(Axis(0))
        .ok_or_else(|| MtsError::Shape("empty training set".into()))?;
    let std = train.features().std_axis(Axis(0), 0.0);
    let apply = |ds: &Dataset| -> Result<Dataset> {
        let mut x = ds.features().clone();
        for mut row in x.rows_mut() {
            for j in 0..row.len() {
                row[j] = if std[j] > 0.0 { (row[j] - mean[j]) / std[j] } else { 0.0 };
            }
        }
        Dataset::new(x, ds.labels().to_vec(), ds.num_classes())
    };
    Ok((apply(train)?, apply(test)?))
}

/// T x K matrix of member predictions, one row per instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionMatrix {
    entries: Array2<usize>,
    num_classes: usize,
}

impl PredictionMatrix {
    pub fn new(entries: Array2<usize>, num_classes: usize) -> Result<Self> {
        if entries.ncols() < 2 {
            return Err(MtsError::Shape(format!(
                "prediction matrix needs K >= 2 members, got {}",
                entries.ncols()
            )));
        }
        if let Some(&c) = entries.iter().find(|&&c| c >= num_classes) {
            return Err(MtsError::Input(format!("prediction {c} outside 0..{num_classes}")));
        }
        // standard layout so that rows are contiguous slices
        let entries = entries.as_standard_layout().into_owned();
        Ok(PredictionMatrix { entries, num_classes })
    }

    pub fn entries(&self) -> &Array2<usize> {
        &self.entries
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_instances(&self) -> usize {
        self.entries.nrows()
    }

    pub fn num_members(&self) -> usize {
        self.entries.ncols()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        self.entries
            .row(i)
            .to_slice()
            .expect("prediction matrix rows are contiguous")
    }

    pub fn column(&self, j: usize) -> Vec<usize> {
        self.entries.column(j).to_vec()
    }

    pub fn profile(&self, i: usize) -> VoteProfile {
        vote_counts(self.row(i), self.num_classes).expect("validated at construction")
    }

    pub fn majority_labels(&self) -> Vec<usize> {
        (0..self.num_instances()).map(|i| self.profile(i).majority()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn balanced(n: usize) -> Dataset {
        let x = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        let y = (0..n).map(|i| i % 2).collect();
        Dataset::new(x, y, 2).unwrap()
    }

    #[test]
    fn dataset_rejects_bad_labels_and_nan() {
        assert!(Dataset::new(array![[1.0], [2.0]], vec![0, 2], 2).is_err());
        assert!(Dataset::new(array![[f64::NAN], [2.0]], vec![0, 1], 2).is_err());
        assert!(Dataset::new(array![[1.0]], vec![0, 1], 2).is_err());
    }

    #[test]
    fn split_balanced_exactly_stratified() {
        let ds = balanced(100);
        let (train, test) = stratified_split(&ds, 0.5, &SeededRng::new(1)).unwrap();
        assert_eq!(train.len(), 50);
        assert_eq!(test.len(), 50);
        assert_eq!(train.class_counts(), vec![25, 25]);
        assert_eq!(test.class_counts(), vec![25, 25]);
    }

    #[test]
    fn split_german_shape() {
        // 700 good / 300 bad
        let x = Array2::from_shape_fn((1000, 1), |(i, _)| i as f64);
        let y = (0..1000).map(|i| usize::from(i >= 700)).collect();
        let ds = Dataset::new(x, y, 2).unwrap();
        let (train, test) = stratified_split(&ds, 0.5, &SeededRng::new(9)).unwrap();
        assert_eq!((train.len(), test.len()), (500, 500));
    }

    #[test]
    fn split_is_deterministic_partition() {
        let ds = balanced(37);
        let rng = SeededRng::new(3);
        let (a_tr, a_te) = stratified_split_indices(&ds, 0.3, &rng).unwrap();
        let (b_tr, b_te) = stratified_split_indices(&ds, 0.3, &rng).unwrap();
        assert_eq!((&a_tr, &a_te), (&b_tr, &b_te));
        let mut all: Vec<usize> = a_tr.iter().chain(&a_te).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..37).collect::<Vec<_>>());
    }

    #[test]
    fn split_rejects_singleton_class_and_bad_fraction() {
        let ds = Dataset::new(array![[0.0], [1.0], [2.0]], vec![0, 0, 1], 2).unwrap();
        assert!(matches!(
            stratified_split(&ds, 0.5, &SeededRng::new(0)),
            Err(MtsError::Configuration(_))
        ));
        let ds = balanced(10);
        assert!(stratified_split(&ds, 0.0, &SeededRng::new(0)).is_err());
        assert!(stratified_split(&ds, 1.0, &SeededRng::new(0)).is_err());
    }

    #[test]
    fn flip_rate_zero_and_one() {
        let ds = balanced(50);
        let same = flip_labels(&ds, 0.0, &SeededRng::new(4)).unwrap();
        assert_eq!(same.labels(), ds.labels());
        let flipped = flip_labels(&ds, 1.0, &SeededRng::new(4)).unwrap();
        assert!(flipped.labels().iter().zip(ds.labels()).all(|(a, b)| a != b));
        assert_eq!(flipped.features(), ds.features());
        assert!(flip_labels(&ds, 1.5, &SeededRng::new(4)).is_err());
        assert!(flip_labels(&ds, -0.1, &SeededRng::new(4)).is_err());
    }

    #[test]
    fn flip_count_within_three_sigma() {
        let n = 10_000;
        let x = Array2::zeros((n, 1));
        let ds = Dataset::new(x, vec![0; n], 2).unwrap();
        let rate = 0.08;
        let sigma = (n as f64 * rate * (1.0 - rate)).sqrt();
        for seed in 0..5 {
            let out = flip_labels(&ds, rate, &SeededRng::new(seed)).unwrap();
            let flipped = out.labels().iter().filter(|&&y| y == 1).count() as f64;
            assert!((flipped - 800.0).abs() <= 3.0 * sigma, "seed {seed}: {flipped}");
        }
    }

    #[test]
    fn multiclass_flip_targets_cover_other_classes() {
        let n = 3000;
        let ds = Dataset::new(Array2::zeros((n, 1)), vec![1; n], 4).unwrap();
        let out = flip_labels(&ds, 1.0, &SeededRng::new(2)).unwrap();
        let counts = out.class_counts();
        assert_eq!(counts[1], 0);
        for c in [0, 2, 3] {
            assert!((counts[c] as f64 - 1000.0).abs() < 100.0, "{counts:?}");
        }
    }

    #[test]
    fn votes_and_majority() {
        assert_eq!(vote_counts(&[1, 1, 0], 2).unwrap().counts(), &[1, 2]);
        assert_eq!(vote_counts(&[2; 15], 3).unwrap().counts(), &[0, 0, 15]);
        assert!(vote_counts(&[], 2).is_err());
        assert!(vote_counts(&[0, 3], 3).is_err());
        assert_eq!(majority_label(&VoteProfile::from_counts(vec![7, 8])), 1);
        assert_eq!(majority_label(&VoteProfile::from_counts(vec![5, 5, 5])), 0);
        assert_eq!(majority_label(&VoteProfile::from_counts(vec![0, 0, 15])), 2);
    }

    #[test]
    fn runner_up_rules() {
        assert_eq!(VoteProfile::from_counts(vec![7, 5, 3]).runner_up(), Some(1));
        assert_eq!(VoteProfile::from_counts(vec![7, 4, 4]).runner_up(), Some(1));
        assert_eq!(VoteProfile::from_counts(vec![3, 7, 3, 2]).runner_up(), Some(0));
        assert_eq!(VoteProfile::from_counts(vec![15, 0]).runner_up(), None);
    }

    #[test]
    fn disagreement_thresholds() {
        let p = |c: Vec<usize>| VoteProfile::from_counts(c);
        assert!(is_high_disagreement(&p(vec![6, 9]), 2).unwrap());
        assert!(is_high_disagreement(&p(vec![8, 7]), 2).unwrap());
        assert!(!is_high_disagreement(&p(vec![5, 10]), 2).unwrap());
        assert!(is_high_disagreement(&p(vec![5, 5, 5, 0, 0, 0]), 6).unwrap());
        assert!(!is_high_disagreement(&p(vec![6, 5, 4, 0, 0, 0]), 6).unwrap());
        assert!(is_high_disagreement(&p(vec![6, 5, 4]), 3).unwrap());
        assert!(!is_high_disagreement(&p(vec![7, 5, 3]), 3).unwrap());
        assert!(is_high_disagreement(&p(vec![3, 3, 3, 2, 2, 2, 0, 0, 0, 0]), 10).unwrap());
        assert!(!is_high_disagreement(&p(vec![4, 3, 3, 2, 2, 1, 0, 0, 0, 0]), 10).unwrap());
        assert!(matches!(
            is_high_disagreement(&p(vec![5, 5, 5, 0, 0]), 5),
            Err(MtsError::Configuration(_))
        ));
        // non-15 ensembles need an override
        assert!(is_high_disagreement(&p(vec![3, 4]), 2).is_err());
        let t = DisagreementThresholds::default().with_override(2, 4);
        assert!(t.is_high_disagreement(&p(vec![3, 4])).unwrap());
    }

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 0], &[0, 1]).unwrap(), 0.0);
        assert_eq!(accuracy(&[0, 1, 1, 1], &[0, 1, 1, 0]).unwrap(), 0.75);
        assert!(matches!(accuracy(&[0], &[0, 1]), Err(MtsError::Shape(_))));
    }

    #[test]
    fn normalization_uses_train_statistics() {
        // column 0: mean 5, population std 2; column 1 constant
        let train = Dataset::new(array![[3.0, 4.0], [7.0, 4.0]], vec![0, 1], 2).unwrap();
        let test = Dataset::new(array![[7.0, 9.0], [5.0, 4.0]], vec![0, 1], 2).unwrap();
        let (tr, te) = z_normalize(&train, &test).unwrap();
        assert_eq!(tr.features(), &array![[-1.0, 0.0], [1.0, 0.0]]);
        assert_eq!(te.features(), &array![[1.0, 0.0], [0.0, 0.0]]);
    }
}
