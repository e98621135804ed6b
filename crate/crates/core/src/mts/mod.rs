//! Machine truth serum aggregators.
//!
//! Both aggregators look at the votes of an ensemble on one instance and
//! decide whether to keep the majority answer or switch to a minority one.
//! [`hmts`] derives a per-class prior from learned peer-agreement
//! regressors; [`dmts`] trains a discriminator that predicts directly
//! whether the majority is wrong.

pub mod dmts;
pub mod hmts;

use serde::{Deserialize, Serialize};

use crate::data::VoteProfile;
use crate::learners::linear::argmax;

/// Prior and posterior values closer than this count as equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Outcome of an aggregator on a single instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MtsDecision {
    pub answer: usize,
    /// Expected vote share per class. Empty for DMTS.
    pub prior: Vec<f64>,
    /// Actual vote share per class.
    pub posterior: Vec<f64>,
    /// True when `answer` differs from the majority vote.
    pub followed_minority: bool,
    /// Classes whose posterior exceeds their prior, ascending.
    pub c_sat: Vec<usize>,
    /// Discriminator score that the majority is wrong (DMTS only).
    pub minority_score: Option<f64>,
}

/// The "surprisingly popular" rule: among classes whose posterior exceeds
/// their prior, pick the one with the largest gap (lowest index on ties).
/// With no such class, keep the majority.
pub fn surprisingly_popular(prior: &[f64], profile: &VoteProfile) -> MtsDecision {
    let posterior = profile.fractions();
    let c_sat: Vec<usize> = (0..posterior.len())
        .filter(|&c| posterior[c] - prior[c] > TIE_TOLERANCE)
        .collect();
    let majority = profile.majority();
    let answer = if c_sat.is_empty() {
        majority
    } else {
        let gaps: Vec<f64> = c_sat.iter().map(|&c| posterior[c] - prior[c]).collect();
        c_sat[argmax(gaps.into_iter())]
    };
    MtsDecision {
        answer,
        prior: prior.to_vec(),
        posterior,
        followed_minority: answer != majority,
        c_sat,
        minority_score: None,
    }
}
