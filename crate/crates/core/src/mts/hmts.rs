//! Heuristic machine truth serum.
//!
//! For every member `j` and class `l` a regressor `g_{j,l}` learns, on the
//! training rows where member `j` predicts `l`, the fraction of the other
//! members that agree with it. At test time these beliefs give each
//! member's expected vote share per class; their mean is the prior.

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{surprisingly_popular, MtsDecision};
use crate::data::{vote_counts, Dataset, PredictionMatrix};
use crate::error::{MtsError, Result};
use crate::learners::{train_regressor, Ensemble, RegressorSpec, TrainedRegressor};
use crate::rng::SeededRng;

/// Fraction of the other members of `row` that vote like member `j`.
pub fn peer_agreement_fraction(j: usize, row: &[usize]) -> Result<f64> {
    let k = row.len();
    if k < 2 {
        return Err(MtsError::Input(format!(
            "peer agreement needs at least 2 members, got {k}"
        )));
    }
    if j >= k {
        return Err(MtsError::Input(format!("member {j} out of range for {k} members")));
    }
    let agree = row.iter().enumerate().filter(|&(m, &v)| m != j && v == row[j]).count();
    Ok(agree as f64 / (k - 1) as f64)
}

/// Peer agreement of every member on every instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeerAgreementTable {
    values: Array2<f64>,
}

impl PeerAgreementTable {
    pub fn from_predictions(predictions: &PredictionMatrix) -> Self {
        let (n, k) = (predictions.num_instances(), predictions.num_members());
        let mut values = Array2::zeros((n, k));
        for i in 0..n {
            let row = predictions.row(i);
            let counts = predictions.profile(i);
            for j in 0..k {
                values[[i, j]] = (counts.counts()[row[j]] - 1) as f64 / (k - 1) as f64;
            }
        }
        PeerAgreementTable { values }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn column_mean(&self, j: usize) -> f64 {
        let col = self.values.column(j);
        col.sum() / col.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum HmtsCell {
    Trained(TrainedRegressor),
    /// Member never predicted this class on the training data.
    Fallback {
        value: f64,
    },
}

/// Grid of peer-agreement regressors, member-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HmtsModel {
    cells: Vec<HmtsCell>,
    num_members: usize,
    num_classes: usize,
    dim: usize,
}

impl HmtsModel {
    pub fn num_members(&self) -> usize {
        self.num_members
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn cell(&self, j: usize, l: usize) -> &HmtsCell {
        &self.cells[j * self.num_classes + l]
    }

    pub fn cells(&self) -> &[HmtsCell] {
        &self.cells
    }

    pub fn num_fallbacks(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| matches!(c, HmtsCell::Fallback { .. }))
            .count()
    }

    /// `g_{j,l}(x)` clamped to `[0, 1]`.
    pub fn belief(&self, j: usize, l: usize, x: ArrayView1<f64>) -> Result<f64> {
        if x.len() != self.dim {
            return Err(MtsError::Shape(format!(
                "model expects {} features, got {}",
                self.dim,
                x.len()
            )));
        }
        let raw = match self.cell(j, l) {
            HmtsCell::Trained(r) => r.predict_value(x)?,
            HmtsCell::Fallback { value } => *value,
        };
        Ok(raw.clamp(0.0, 1.0))
    }

    /// K x C matrix of clamped beliefs at `x`.
    pub fn beliefs(&self, x: ArrayView1<f64>) -> Result<Array2<f64>> {
        let mut g = Array2::zeros((self.num_members, self.num_classes));
        for j in 0..self.num_members {
            for l in 0..self.num_classes {
                g[[j, l]] = self.belief(j, l, x)?;
            }
        }
        Ok(g)
    }
}

pub fn train_hmts(ensemble: &Ensemble, train: &Dataset, spec: &RegressorSpec, rng: &SeededRng) -> Result<HmtsModel> {
    let predictions = ensemble.predict_matrix(train.features())?;
    train_hmts_from_predictions(&predictions, train.features(), spec, rng)
}

/// Fits cell `(j, l)` with seed path `g{j}_{l}`.
pub fn train_hmts_from_predictions(
    predictions: &PredictionMatrix,
    features: &Array2<f64>,
    spec: &RegressorSpec,
    rng: &SeededRng,
) -> Result<HmtsModel> {
    spec.validate()?;
    if features.nrows() != predictions.num_instances() {
        return Err(MtsError::Shape(format!(
            "{} feature rows for {} prediction rows",
            features.nrows(),
            predictions.num_instances()
        )));
    }
    let table = PeerAgreementTable::from_predictions(predictions);
    let (k, c) = (predictions.num_members(), predictions.num_classes());
    let cells = (0..k * c)
        .into_par_iter()
        .map(|cell| {
            let (j, l) = (cell / c, cell % c);
            let rows: Vec<usize> = (0..predictions.num_instances())
                .filter(|&i| predictions.row(i)[j] == l)
                .collect();
            if rows.is_empty() {
                return Ok(HmtsCell::Fallback {
                    value: table.column_mean(j),
                });
            }
            let x = features.select(ndarray::Axis(0), &rows);
            let y: Vec<f64> = rows.iter().map(|&i| table.values()[[i, j]]).collect();
            let g = train_regressor(spec, x.view(), &y, &rng.derive(format!("g{j}_{l}")))?;
            Ok(HmtsCell::Trained(g))
        })
        .collect::<Result<Vec<_>>>()?;
    log::debug!(
        "hmts: {} cells, {} fallbacks",
        cells.len(),
        cells.iter().filter(|c| matches!(c, HmtsCell::Fallback { .. })).count()
    );
    Ok(HmtsModel {
        cells,
        num_members: k,
        num_classes: c,
        dim: features.ncols(),
    })
}

/// Fraction of the votes in `row` equal to `c`.
pub fn hmts_posterior(row: &[usize], c: usize) -> f64 {
    row.iter().filter(|&&v| v == c).count() as f64 / row.len() as f64
}

fn check_beliefs(beliefs: &Array2<f64>, row: &[usize]) -> Result<()> {
    if beliefs.nrows() != row.len() {
        return Err(MtsError::Shape(format!(
            "{} belief rows for {} votes",
            beliefs.nrows(),
            row.len()
        )));
    }
    if let Some(&v) = row.iter().find(|&&v| v >= beliefs.ncols()) {
        return Err(MtsError::Input(format!("vote {v} outside 0..{}", beliefs.ncols())));
    }
    Ok(())
}

/// Binary prior of label 1: member `j` contributes `g_{j,1}` if it voted 1
/// and `1 - g_{j,0}` otherwise.
pub fn prior_binary_from_beliefs(beliefs: &Array2<f64>, row: &[usize]) -> Result<f64> {
    check_beliefs(beliefs, row)?;
    if beliefs.ncols() != 2 {
        return Err(MtsError::Input("binary prior needs 2 classes".into()));
    }
    let total: f64 = row
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let g = beliefs[[j, v]].clamp(0.0, 1.0);
            if v == 1 {
                g
            } else {
                1.0 - g
            }
        })
        .sum();
    Ok(total / row.len() as f64)
}

/// Expected vote shares of one member that voted `voted`: its own belief
/// for `voted`, and the remaining mass split in proportion to its beliefs
/// for the other classes (evenly if those are all zero).
pub fn member_prior(beliefs: ArrayView1<f64>, voted: usize) -> Vec<f64> {
    let c = beliefs.len();
    let g: Vec<f64> = beliefs.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let rest = 1.0 - g[voted];
    let denom: f64 = (0..c).filter(|&l| l != voted).map(|l| g[l]).sum();
    (0..c)
        .map(|l| {
            if l == voted {
                g[l]
            } else if denom > 0.0 {
                rest * g[l] / denom
            } else {
                rest / (c - 1) as f64
            }
        })
        .collect()
}

/// Mean of [`member_prior`] over members.
pub fn prior_multiclass_from_beliefs(beliefs: &Array2<f64>, row: &[usize]) -> Result<Vec<f64>> {
    check_beliefs(beliefs, row)?;
    let mut prior = vec![0.0; beliefs.ncols()];
    for (j, &v) in row.iter().enumerate() {
        for (p, g) in prior.iter_mut().zip(member_prior(beliefs.row(j), v)) {
            *p += g;
        }
    }
    let k = row.len() as f64;
    prior.iter_mut().for_each(|p| *p /= k);
    Ok(prior)
}

pub fn hmts_prior_binary(model: &HmtsModel, x: ArrayView1<f64>, row: &[usize]) -> Result<f64> {
    prior_binary_from_beliefs(&model.beliefs(x)?, row)
}

pub fn hmts_prior_multiclass(model: &HmtsModel, x: ArrayView1<f64>, row: &[usize]) -> Result<Vec<f64>> {
    prior_multiclass_from_beliefs(&model.beliefs(x)?, row)
}

/// Decision from a K x C belief matrix and the votes.
pub fn hmts_decide_from_beliefs(beliefs: &Array2<f64>, row: &[usize]) -> Result<MtsDecision> {
    let c = beliefs.ncols();
    let prior = if c == 2 {
        let one = prior_binary_from_beliefs(beliefs, row)?;
        vec![1.0 - one, one]
    } else {
        prior_multiclass_from_beliefs(beliefs, row)?
    };
    let profile = vote_counts(row, c)?;
    Ok(surprisingly_popular(&prior, &profile))
}

pub fn hmts_decide(model: &HmtsModel, x: ArrayView1<f64>, row: &[usize]) -> Result<MtsDecision> {
    if row.len() != model.num_members {
        return Err(MtsError::Shape(format!(
            "{} votes for {} members",
            row.len(),
            model.num_members
        )));
    }
    hmts_decide_from_beliefs(&model.beliefs(x)?, row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn agreement_examples() {
        assert_eq!(peer_agreement_fraction(0, &[1, 1, 0]).unwrap(), 0.5);
        assert_eq!(peer_agreement_fraction(2, &[3, 3, 3]).unwrap(), 1.0);
        let mut row = vec![1; 10];
        row.extend([0; 5]);
        assert_eq!(peer_agreement_fraction(0, &row).unwrap(), 9.0 / 14.0);
        assert!(peer_agreement_fraction(0, &[1]).is_err());
    }

    #[test]
    fn table_matches_pairwise_definition() {
        let p = PredictionMatrix::new(array![[1, 1, 0], [2, 0, 2]], 3).unwrap();
        let t = PeerAgreementTable::from_predictions(&p);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(t.values()[[i, j]], peer_agreement_fraction(j, p.row(i)).unwrap());
            }
        }
    }

    #[test]
    fn binary_prior_example() {
        // g_{1,1}=0.7, g_{2,1}=0.6, g_{3,0}=0.8
        let g = array![[0.0, 0.7], [0.0, 0.6], [0.8, 0.0]];
        let prior = prior_binary_from_beliefs(&g, &[1, 1, 0]).unwrap();
        assert!((prior - 0.5).abs() < 1e-12);
        let d = hmts_decide_from_beliefs(&g, &[1, 1, 0]).unwrap();
        assert_eq!(d.answer, 1);
    }

    #[test]
    fn binary_minority_recovery() {
        let g = array![[0.0, 0.9], [0.0, 0.95], [0.2, 0.0]];
        let d = hmts_decide_from_beliefs(&g, &[1, 1, 0]).unwrap();
        assert!((d.prior[1] - 2.65 / 3.0).abs() < 1e-12);
        assert_eq!(d.answer, 0);
        assert!(d.followed_minority);
    }

    #[test]
    fn raw_beliefs_are_clamped() {
        let g = array![[0.0, 1.3], [0.0, 1.0]];
        assert_eq!(prior_binary_from_beliefs(&g, &[1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn member_prior_example() {
        let g = member_prior(array![0.6, 0.3, 0.1].view(), 0);
        for (a, b) in g.iter().zip([0.6, 0.3, 0.1]) {
            assert!((a - b).abs() < 1e-12);
        }
        let g = member_prior(array![0.0, 0.4, 0.0, 0.0].view(), 1);
        for (a, b) in g.iter().zip([0.2, 0.4, 0.2, 0.2]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_partition_gets_column_mean() {
        let p = PredictionMatrix::new(array![[0, 0], [0, 1], [1, 0]], 3).unwrap();
        let x = array![[0.0], [1.0], [2.0]];
        let model = train_hmts_from_predictions(&p, &x, &RegressorSpec::default(), &SeededRng::new(0)).unwrap();
        assert_eq!(model.cells().len(), 6);
        // member 0 agreement column: 1, 0, 0
        assert_eq!(model.cell(0, 2), &HmtsCell::Fallback { value: 1.0 / 3.0 });
        assert_eq!(model.num_fallbacks(), 2);
    }

    #[test]
    fn identical_members_believe_unanimity() {
        let p = PredictionMatrix::new(array![[0, 0, 0], [1, 1, 1], [0, 0, 0], [1, 1, 1]], 2).unwrap();
        let x = array![[0.0, 1.0], [1.0, 0.5], [2.0, -1.0], [3.0, 2.0]];
        let model = train_hmts_from_predictions(&p, &x, &RegressorSpec::default(), &SeededRng::new(0)).unwrap();
        for j in 0..3 {
            for l in 0..2 {
                assert!((model.belief(j, l, array![9.0, 9.0].view()).unwrap() - 1.0).abs() < 1e-9);
            }
        }
    }
}
