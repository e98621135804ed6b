//! Bayesian Truth Serum aggregation over explicit agent reports.
//!
//! Each agent reports a label and the fraction of the other agents it
//! expects to agree. The answer is the label that turns out more popular
//! than the agents predicted.

use serde::{Deserialize, Serialize};

use crate::data::{vote_counts, VoteProfile};
use crate::error::{MtsError, Result};
use crate::mts::{surprisingly_popular, MtsDecision};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentReport {
    pub label: usize,
    /// Predicted fraction of the other agents that agree with `label`.
    pub peer_fraction: f64,
}

impl AgentReport {
    pub fn new(label: usize, peer_fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&peer_fraction) {
            return Err(MtsError::Input(format!("peer fraction {peer_fraction} outside [0, 1]")));
        }
        Ok(AgentReport { label, peer_fraction })
    }
}

/// Binary decision; `prior` and `posterior` refer to label 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BtsDecision {
    pub answer: usize,
    pub prior: f64,
    pub posterior: f64,
    pub followed_minority: bool,
}

fn check_reports(reports: &[AgentReport], num_classes: usize) -> Result<VoteProfile> {
    if reports.is_empty() {
        return Err(MtsError::Input("no agent reports".into()));
    }
    if let Some(r) = reports.iter().find(|r| !(0.0..=1.0).contains(&r.peer_fraction)) {
        return Err(MtsError::Input(format!(
            "peer fraction {} outside [0, 1]",
            r.peer_fraction
        )));
    }
    let labels: Vec<usize> = reports.iter().map(|r| r.label).collect();
    vote_counts(&labels, num_classes)
}

/// Fraction of reports carrying `label`.
pub fn bts_posterior(reports: &[AgentReport], label: usize) -> Result<f64> {
    if reports.is_empty() {
        return Err(MtsError::Input("no agent reports".into()));
    }
    let hits = reports.iter().filter(|r| r.label == label).count();
    Ok(hits as f64 / reports.len() as f64)
}

/// Average predicted share of `label` for binary reports: an agent voting 1
/// with peer fraction p predicts share p for label 1, an agent voting 0
/// predicts 1 - p.
pub fn bts_prior(reports: &[AgentReport], label: usize) -> Result<f64> {
    check_reports(reports, 2)?;
    if label > 1 {
        return Err(MtsError::Input(format!("binary prior requested for label {label}")));
    }
    let prior_one = reports
        .iter()
        .map(|r| {
            if r.label == 1 {
                r.peer_fraction
            } else {
                1.0 - r.peer_fraction
            }
        })
        .sum::<f64>()
        / reports.len() as f64;
    Ok(if label == 1 { prior_one } else { 1.0 - prior_one })
}

pub fn bts_decide(reports: &[AgentReport]) -> Result<BtsDecision> {
    let profile = check_reports(reports, 2)?;
    let prior_one = bts_prior(reports, 1)?;
    let d = surprisingly_popular(&[1.0 - prior_one, prior_one], &profile);
    Ok(BtsDecision {
        answer: d.answer,
        prior: prior_one,
        posterior: d.posterior[1],
        followed_minority: d.followed_minority,
    })
}

/// Multiclass prior: an agent voting `l` with peer fraction p predicts
/// share p for `l` and spreads 1 - p evenly over the other classes.
pub fn bts_prior_multiclass(reports: &[AgentReport], num_classes: usize) -> Result<Vec<f64>> {
    check_reports(reports, num_classes)?;
    let others = (num_classes - 1) as f64;
    let mut prior = vec![0.0; num_classes];
    for r in reports {
        for (c, p) in prior.iter_mut().enumerate() {
            *p += if c == r.label {
                r.peer_fraction
            } else {
                (1.0 - r.peer_fraction) / others
            };
        }
    }
    let n = reports.len() as f64;
    prior.iter_mut().for_each(|p| *p /= n);
    Ok(prior)
}

pub fn bts_decide_multiclass(reports: &[AgentReport], num_classes: usize) -> Result<MtsDecision> {
    let profile = check_reports(reports, num_classes)?;
    let prior = bts_prior_multiclass(reports, num_classes)?;
    Ok(surprisingly_popular(&prior, &profile))
}
