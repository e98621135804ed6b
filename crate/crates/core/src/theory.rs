//! Numerical checks of the two impossibility/underestimation results for
//! binary truth-serum aggregation over finite signal spaces.
//!
//! Signals `s_1..s_m` stand for feature vectors. A [`CounterfactualWorld`]
//! shows that signal and posterior distributions alone cannot identify the
//! true label. A [`DiscreteWorldModel`] adds worlds and votes, and
//! [`verify_theorem2`] confirms that the expected vote share for the true
//! answer is underestimated unless every signal points at the true world.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{MtsError, Result};
use crate::rng::SeededRng;

pub const IDENTITY_TOLERANCE: f64 = 1e-10;
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

fn check_distribution(what: &str, p: &[f64]) -> Result<()> {
    if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(MtsError::Input(format!("{what} has a negative or non-finite entry")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(MtsError::Input(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

fn check_stochastic(what: &str, m: &Array2<f64>, cols: usize) -> Result<()> {
    if m.ncols() != cols {
        return Err(MtsError::Shape(format!(
            "{what} needs {cols} columns, got {}",
            m.ncols()
        )));
    }
    for (k, row) in m.rows().into_iter().enumerate() {
        check_distribution(&format!("{what} row {k}"), row.as_slice().unwrap_or(&row.to_vec()))?;
    }
    Ok(())
}

/// A world with prior `Q(s_k)` under which label `chosen` is true and the
/// observables match the given ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualWorld {
    pub chosen: usize,
    /// `Q(s_k)`.
    pub q_signal: Vec<f64>,
    /// `Q(y_o, s_k)`, m x 2.
    pub q_joint: Array2<f64>,
    /// `Q(y_o)`.
    pub q_marginal: [f64; 2],
}

/// `Q(s_k)` proportional to `P(s_k | y*) / P(y_chosen | s_k)`, and
/// `Q(y, s_k) = P(y | s_k) Q(s_k)`.
pub fn construct_counterfactual(
    signal_given_truth: &[f64],
    posterior_given_signal: &Array2<f64>,
    chosen: usize,
) -> Result<CounterfactualWorld> {
    check_distribution("signal distribution", signal_given_truth)?;
    check_stochastic("posterior", posterior_given_signal, 2)?;
    if posterior_given_signal.nrows() != signal_given_truth.len() {
        return Err(MtsError::Shape(format!(
            "{} posterior rows for {} signals",
            posterior_given_signal.nrows(),
            signal_given_truth.len()
        )));
    }
    if chosen > 1 {
        return Err(MtsError::Input(format!("label {chosen} is not binary")));
    }
    if let Some(k) = (0..signal_given_truth.len()).find(|&k| posterior_given_signal[[k, chosen]] <= 0.0) {
        return Err(MtsError::DegenerateInput(format!(
            "P(y_{chosen} | s_{k}) = 0; the construction divides by it"
        )));
    }
    let raw: Vec<f64> = signal_given_truth
        .iter()
        .enumerate()
        .map(|(k, p)| p / posterior_given_signal[[k, chosen]])
        .collect();
    let z: f64 = raw.iter().sum();
    let q_signal: Vec<f64> = raw.iter().map(|r| r / z).collect();
    let q_joint = Array2::from_shape_fn(posterior_given_signal.raw_dim(), |(k, o)| {
        posterior_given_signal[[k, o]] * q_signal[k]
    });
    let q_marginal = [q_joint.column(0).sum(), q_joint.column(1).sum()];
    Ok(CounterfactualWorld {
        chosen,
        q_signal,
        q_joint,
        q_marginal,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Check {
    pub holds: bool,
    pub max_deviation: f64,
}

/// Checks that `world` is a distribution reproducing `P(s_k | y*)` as
/// `Q(s_k | y_chosen)` and `P(y | s_k)` as `Q(y | s_k)`.
pub fn verify_theorem1(
    world: &CounterfactualWorld,
    signal_given_truth: &[f64],
    posterior_given_signal: &Array2<f64>,
) -> Theorem1Check {
    let o = world.chosen;
    let mut dev: f64 = (world.q_joint.sum() - 1.0).abs();
    if world.q_joint.iter().any(|&q| q < 0.0) {
        dev = f64::INFINITY;
    }
    for (k, &p) in signal_given_truth.iter().enumerate() {
        let row_sum = world.q_joint.row(k).sum();
        dev = dev.max((row_sum - world.q_signal[k]).abs());
        dev = dev.max((world.q_joint[[k, o]] / world.q_marginal[o] - p).abs());
        for y in 0..2 {
            dev = dev.max((world.q_joint[[k, y]] / world.q_signal[k] - posterior_given_signal[[k, y]]).abs());
        }
    }
    for y in 0..2 {
        dev = dev.max((world.q_joint.column(y).sum() - world.q_marginal[y]).abs());
    }
    Theorem1Check {
        holds: dev < IDENTITY_TOLERANCE,
        max_deviation: dev,
    }
}

/// Finite signal/world/vote model around one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteWorldModel {
    /// `P(s_k | y_{o*})`; also the averaging measure over signals.
    pub signal_given_truth: Vec<f64>,
    /// `P(y_o | s_k)`, m x 2.
    pub posterior_given_signal: Array2<f64>,
    pub true_label: usize,
    /// `P(v_o | w_o')`, row `o'` is the world.
    pub vote_given_world: Array2<f64>,
    /// `P(w_o | s_k)`, m x 2.
    pub world_given_signal: Array2<f64>,
    /// Threshold for world 0; world 1 uses `1 - c0`.
    pub c0: f64,
}

impl DiscreteWorldModel {
    pub fn validate(&self) -> Result<()> {
        let m = self.signal_given_truth.len();
        check_distribution("signal distribution", &self.signal_given_truth)?;
        check_stochastic("posterior", &self.posterior_given_signal, 2)?;
        check_stochastic("vote given world", &self.vote_given_world, 2)?;
        check_stochastic("world given signal", &self.world_given_signal, 2)?;
        if self.posterior_given_signal.nrows() != m || self.world_given_signal.nrows() != m {
            return Err(MtsError::Shape(format!("signal matrices need {m} rows")));
        }
        if self.vote_given_world.nrows() != 2 {
            return Err(MtsError::Shape("vote given world must be 2 x 2".into()));
        }
        if self.true_label > 1 {
            return Err(MtsError::Input(format!("label {} is not binary", self.true_label)));
        }
        if !(self.c0 > 0.0 && self.c0 < 1.0) {
            return Err(MtsError::Input(format!("c0 = {} outside (0, 1)", self.c0)));
        }
        Ok(())
    }

    pub fn threshold(&self, world: usize) -> f64 {
        if world == 0 {
            self.c0
        } else {
            1.0 - self.c0
        }
    }

    /// World assigned to signal `k`: `w_0` if `P(w_0|s_k) > c0`, `w_1` if
    /// `P(w_1|s_k) > 1 - c0`, `None` on the boundary.
    pub fn classify_world(&self, k: usize) -> Option<usize> {
        (0..2).find(|&w| self.world_given_signal[[k, w]] > self.threshold(w))
    }

    /// `P(w) = sum_k P(s_k) P(w | s_k)`.
    pub fn world_marginal(&self) -> [f64; 2] {
        let mut p = [0.0; 2];
        for (k, ps) in self.signal_given_truth.iter().enumerate() {
            for (w, pw) in p.iter_mut().enumerate() {
                *pw += ps * self.world_given_signal[[k, w]];
            }
        }
        p
    }

    /// `P(v) = sum_w P(w) P(v | w)`.
    pub fn vote_marginal(&self) -> [f64; 2] {
        let pw = self.world_marginal();
        let mut p = [0.0; 2];
        for (v, pv) in p.iter_mut().enumerate() {
            *pv = (0..2).map(|w| pw[w] * self.vote_given_world[[w, v]]).sum();
        }
        p
    }

    /// `P(w | v)` by Bayes' rule, `None` when `P(v) = 0`.
    pub fn world_given_vote(&self, w: usize, v: usize) -> Option<f64> {
        let pv = self.vote_marginal()[v];
        (pv > 0.0).then(|| self.world_marginal()[w] * self.vote_given_world[[w, v]] / pv)
    }

    /// `P(v_{o*} | s_j)` marginalized over worlds.
    pub fn vote_estimate(&self, j: usize) -> f64 {
        let o = self.true_label;
        (0..2)
            .map(|w| self.vote_given_world[[w, o]] * self.world_given_signal[[j, w]])
            .sum()
    }

    /// True when every signal puts all mass on the true world.
    pub fn all_correct(&self) -> bool {
        let o = self.true_label;
        (0..self.signal_given_truth.len()).all(|k| self.world_given_signal[[k, o]] >= 1.0)
    }

    /// Ok when `P(w*|v*) > c*` and `P(w*|v_k) < c*`.
    pub fn check_preconditions(&self) -> Result<()> {
        self.validate()?;
        let o = self.true_label;
        let other = 1 - o;
        let c = self.threshold(o);
        for k in 0..self.signal_given_truth.len() {
            if self.classify_world(k).is_none() {
                return Err(MtsError::Precondition(format!(
                    "signal {k} sits on the world threshold"
                )));
            }
        }
        match self.world_given_vote(o, o) {
            Some(p) if p > c => {}
            p => {
                return Err(MtsError::Precondition(format!(
                    "P(w*|v*) > c* violated: P(w*|v*) = {p:?}, c* = {c}"
                )))
            }
        }
        match self.world_given_vote(o, other) {
            Some(p) if p < c => Ok(()),
            p => Err(MtsError::Precondition(format!(
                "P(w*|v_k) < c* violated: P(w*|v_k) = {p:?}, c* = {c}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    /// `P(v*|w*) > P(v*|w_k)`.
    pub vote_inequality_holds: bool,
    /// Every per-signal estimate and the average are at most the actual
    /// share, strictly exactly where the true world is uncertain.
    pub underestimation_holds: bool,
    /// The averaged estimate is strictly below the actual share.
    pub strictness: bool,
    /// `P(v*|w*)`.
    pub actual: f64,
    /// `P(v*|s_j)` per signal.
    pub estimates: Vec<f64>,
    /// `sum_j P(s_j) P(v*|s_j)`.
    pub averaged: f64,
    /// Largest deviation in the Bayes-ratio identity (zero when the
    /// counterfactual world has no mass).
    pub identity_deviation: f64,
}

impl Theorem2Report {
    pub fn passed(&self) -> bool {
        self.vote_inequality_holds && self.underestimation_holds && self.identity_deviation < IDENTITY_TOLERANCE
    }
}

pub fn verify_theorem2(model: &DiscreteWorldModel) -> Result<Theorem2Report> {
    model.validate()?;
    let o = model.true_label;
    let other = 1 - o;
    let all_correct = model.all_correct();
    if !all_correct {
        model.check_preconditions()?;
    }
    let actual = model.vote_given_world[[o, o]];
    let counter = model.vote_given_world[[other, o]];
    let mut vote_inequality_holds = actual > counter;
    let mut identity_deviation = 0.0;
    if !all_correct {
        let pw = model.world_marginal()[o];
        let pwv = model.world_given_vote(o, o).unwrap_or(0.0);
        vote_inequality_holds &= pwv > pw;
        let lhs = actual / counter;
        let rhs = pwv / (1.0 - pwv) * (1.0 - pw) / pw;
        identity_deviation = ((lhs - rhs) / rhs).abs();
        vote_inequality_holds &= rhs > 1.0;
    }
    let m = model.signal_given_truth.len();
    let estimates: Vec<f64> = (0..m).map(|j| model.vote_estimate(j)).collect();
    let mut underestimation_holds = true;
    for (j, &e) in estimates.iter().enumerate() {
        let uncertain = model.world_given_signal[[j, o]] < 1.0;
        let below = actual - e;
        underestimation_holds &= if uncertain {
            below > 0.0
        } else {
            below.abs() <= IDENTITY_TOLERANCE
        };
    }
    let averaged: f64 = estimates
        .iter()
        .zip(&model.signal_given_truth)
        .map(|(e, p)| e * p)
        .sum();
    let expect_strict = (0..m).any(|j| model.signal_given_truth[j] > 0.0 && model.world_given_signal[[j, o]] < 1.0);
    let strictness = actual - averaged > 0.0;
    underestimation_holds &= if expect_strict {
        strictness
    } else {
        (actual - averaged).abs() <= IDENTITY_TOLERANCE
    };
    Ok(Theorem2Report {
        vote_inequality_holds,
        underestimation_holds,
        strictness: expect_strict && strictness,
        actual,
        estimates,
        averaged,
        identity_deviation,
    })
}

/// Uniform draw from the probability simplex of dimension `n`.
pub fn random_simplex(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let drift = 1.0 - p.iter().sum::<f64>();
    p[n - 1] += drift;
    p
}

fn random_stochastic(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut m = Array2::zeros((rows, cols));
    for k in 0..rows {
        for (c, v) in random_simplex(cols, rng).into_iter().enumerate() {
            m[[k, c]] = v;
        }
    }
    m
}

/// Inputs for [`construct_counterfactual`]: signal distribution, posterior
/// matrix and a true label.
pub fn random_theorem1_inputs(m: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Array2<f64>, usize) {
    let signal = random_simplex(m, rng);
    let posterior = random_stochastic(m, 2, rng);
    (signal, posterior, rng.random_range(0..2))
}

/// Draws `count` models with `m` signals satisfying the theorem 2
/// preconditions by rejection. Returns the models and the acceptance rate.
pub fn sample_world_models(
    count: usize,
    signals: std::ops::RangeInclusive<usize>,
    rng: &SeededRng,
) -> (Vec<DiscreteWorldModel>, f64) {
    let mut stream = rng.stream();
    let mut models = Vec::with_capacity(count);
    let mut tries = 0usize;
    while models.len() < count {
        tries += 1;
        let m = stream.random_range(signals.clone());
        let model = DiscreteWorldModel {
            signal_given_truth: random_simplex(m, &mut stream),
            posterior_given_signal: random_stochastic(m, 2, &mut stream),
            true_label: stream.random_range(0..2),
            vote_given_world: random_stochastic(2, 2, &mut stream),
            world_given_signal: random_stochastic(m, 2, &mut stream),
            c0: stream.random_range(0.05..0.95),
        };
        if model.check_preconditions().is_ok() {
            models.push(model);
        }
    }
    let rate = count as f64 / tries.max(1) as f64;
    log::info!(
        "theory: accepted {count} of {tries} sampled world models ({:.1}%)",
        100.0 * rate
    );
    (models, rate)
}

/// A model in which every signal identifies the true world.
pub fn all_correct_model(m: usize, true_label: usize, rng: &mut ChaCha8Rng) -> DiscreteWorldModel {
    let mut world = Array2::zeros((m, 2));
    world.column_mut(true_label).fill(1.0);
    let mut votes = random_stochastic(2, 2, rng);
    let (hi, lo) = {
        let a = votes[[true_label, true_label]];
        let b = votes[[1 - true_label, true_label]];
        (a.max(b), a.min(b))
    };
    if hi == lo {
        votes = Array2::from_elem((2, 2), 0.0);
        votes[[true_label, true_label]] = 1.0;
        votes[[1 - true_label, 1 - true_label]] = 1.0;
    } else {
        votes[[true_label, true_label]] = hi;
        votes[[true_label, 1 - true_label]] = 1.0 - hi;
        votes[[1 - true_label, true_label]] = lo;
        votes[[1 - true_label, 1 - true_label]] = 1.0 - lo;
    }
    DiscreteWorldModel {
        signal_given_truth: random_simplex(m, rng),
        posterior_given_signal: random_stochastic(m, 2, rng),
        true_label,
        vote_given_world: votes,
        world_given_signal: world,
        c0: 0.5,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TheorySummary {
    pub theorem1_cases: usize,
    pub theorem1_failures: usize,
    pub theorem1_max_deviation: f64,
    pub theorem2_cases: usize,
    pub theorem2_failures: usize,
    pub theorem2_strict: usize,
    pub acceptance_rate: f64,
    pub edge_case_passed: bool,
    /// Descriptions of failing cases.
    pub counterexamples: Vec<String>,
}

impl TheorySummary {
    pub fn passed(&self) -> bool {
        self.theorem1_failures == 0 && self.theorem2_failures == 0 && self.edge_case_passed
    }
}

/// Runs both checks on `cases` random models each, plus the all-correct
/// edge case.
pub fn run_theory_suite(cases: usize, rng: &SeededRng) -> TheorySummary {
    let mut summary = TheorySummary {
        theorem1_cases: cases,
        theorem2_cases: cases,
        ..TheorySummary::default()
    };
    let mut stream = rng.derive("theorem1").stream();
    for case in 0..cases {
        let m = stream.random_range(2..=6);
        let (signal, posterior, truth) = random_theorem1_inputs(m, &mut stream);
        for chosen in [truth, 1 - truth] {
            let outcome =
                construct_counterfactual(&signal, &posterior, chosen).map(|w| verify_theorem1(&w, &signal, &posterior));
            match outcome {
                Ok(check) if check.holds => {
                    summary.theorem1_max_deviation = summary.theorem1_max_deviation.max(check.max_deviation);
                }
                other => {
                    summary.theorem1_failures += 1;
                    summary
                        .counterexamples
                        .push(format!("theorem1 case {case} label {chosen}: {other:?}"));
                }
            }
        }
    }
    let (models, rate) = sample_world_models(cases, 2..=6, &rng.derive("theorem2"));
    summary.acceptance_rate = rate;
    for (case, model) in models.iter().enumerate() {
        match verify_theorem2(model) {
            Ok(report) if report.passed() => summary.theorem2_strict += usize::from(report.strictness),
            other => {
                summary.theorem2_failures += 1;
                summary
                    .counterexamples
                    .push(format!("theorem2 case {case}: {other:?} for {model:?}"));
            }
        }
    }
    let mut edge = rng.derive("edge").stream();
    summary.edge_case_passed = (0..2).all(|label| {
        let model = all_correct_model(3, label, &mut edge);
        matches!(verify_theorem2(&model), Ok(r) if r.passed() && !r.strictness)
    });
    summary
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;

    #[test]
    fn single_signal() {
        let w = construct_counterfactual(&[1.0], &array![[0.3, 0.7]], 0).unwrap();
        assert_eq!(w.q_signal, vec![1.0]);
        assert!((w.q_marginal[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn constant_posterior_keeps_signal_distribution() {
        let p = [0.2, 0.5, 0.3];
        let w = construct_counterfactual(&p, &array![[0.4, 0.6], [0.4, 0.6], [0.4, 0.6]], 1).unwrap();
        for (q, p) in w.q_signal.iter().zip(p) {
            assert!((q - p).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_posterior_is_degenerate() {
        let r = construct_counterfactual(&[0.5, 0.5], &array![[1.0, 0.0], [0.5, 0.5]], 1);
        assert!(matches!(r, Err(MtsError::DegenerateInput(_))));
    }

    #[test]
    fn perturbation_detected() {
        let p = [0.2, 0.5, 0.3];
        let post = array![[0.1, 0.9], [0.6, 0.4], [0.5, 0.5]];
        let mut w = construct_counterfactual(&p, &post, 0).unwrap();
        assert!(verify_theorem1(&w, &p, &post).holds);
        w.q_joint[[1, 0]] += 1e-3;
        assert!(!verify_theorem1(&w, &p, &post).holds);
    }

    fn hand_model() -> DiscreteWorldModel {
        // P(w0) = 0.5*0.9 + 0.5*0.3 = 0.6; P(v0) = 0.6*0.9 + 0.4*0.4 = 0.7
        // P(w0|v0) = 0.54/0.7 ~ 0.771 > 0.5; P(w0|v1) = 0.06/0.3 = 0.2 < 0.5
        DiscreteWorldModel {
            signal_given_truth: vec![0.5, 0.5],
            posterior_given_signal: array![[0.7, 0.3], [0.4, 0.6]],
            true_label: 0,
            vote_given_world: array![[0.9, 0.1], [0.4, 0.6]],
            world_given_signal: array![[0.9, 0.1], [0.3, 0.7]],
            c0: 0.5,
        }
    }

    #[test]
    fn hand_model_underestimates() {
        let model = hand_model();
        assert!((model.world_given_vote(0, 0).unwrap() - 0.54 / 0.7).abs() < 1e-12);
        let r = verify_theorem2(&model).unwrap();
        assert!(r.passed());
        assert!(r.strictness);
        assert!((r.estimates[0] - (0.9 * 0.9 + 0.4 * 0.1)).abs() < 1e-12);
        assert!(r.averaged < r.actual);
    }

    #[test]
    fn precondition_violation_named() {
        let mut model = hand_model();
        model.c0 = 0.1;
        match verify_theorem2(&model) {
            Err(MtsError::Precondition(msg)) => assert!(msg.contains("P(w*|v_k) < c*"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_correct_is_equality() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for label in 0..2 {
            let r = verify_theorem2(&all_correct_model(4, label, &mut rng)).unwrap();
            assert!(r.passed());
            assert!(!r.strictness);
            assert!((r.averaged - r.actual).abs() < 1e-12);
        }
    }

    #[test]
    fn simplex_is_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..8 {
            let p = random_simplex(n, &mut rng);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&v| v >= 0.0));
        }
    }
}
