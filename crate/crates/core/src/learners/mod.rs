//! Base classifiers and the regressors used by the truth-serum aggregators.
//!
//! Every learner is deterministic given its spec, its data and a
//! [`SeededRng`]. Trained models are plain values: immutable, `Send + Sync`,
//! and serializable through [`ModelEnvelope`].

pub mod boost;
pub mod forest;
pub mod linear;
pub mod mlp;
pub mod ridge;
pub mod tree;

use ndarray::{Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, PredictionMatrix};
use crate::error::{MtsError, Result};
use crate::rng::SeededRng;

use boost::AdaBoost;
use forest::RandomForest;
use linear::{LinearModel, LinearTrainer};
use mlp::{Mlp, MlpOutput, MlpTarget, MlpTrainConfig};
use ridge::Ridge;
use tree::{DecisionTree, TreeParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerceptronParams {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for PerceptronParams {
    fn default() -> Self {
        PerceptronParams {
            epochs: 100,
            learning_rate: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    pub iterations: usize,
    pub learning_rate: f64,
    pub l2: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            iterations: 500,
            learning_rate: 0.1,
            l2: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeSpec {
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for TreeSpec {
    fn default() -> Self {
        TreeSpec {
            max_depth: 8,
            min_samples_split: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows full trees.
    pub max_depth: Option<usize>,
    /// Features tried per split; `None` means `round(sqrt(d))`.
    pub max_features: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 15,
            max_depth: None,
            max_features: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub epochs: usize,
    pub lambda: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            epochs: 50,
            lambda: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub batch_size: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: vec![32],
            epochs: 300,
            learning_rate: 0.01,
            l2: 1e-4,
            batch_size: 32,
        }
    }
}

impl MlpParams {
    fn validate(&self, what: &str) -> Result<()> {
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(MtsError::Configuration(format!(
                "{what}: hidden layer sizes must be non-empty and positive"
            )));
        }
        positive(what, "epochs", self.epochs as f64)?;
        positive(what, "learning_rate", self.learning_rate)?;
        positive(what, "batch_size", self.batch_size as f64)?;
        non_negative(what, "l2", self.l2)
    }

    fn train_config(&self) -> MlpTrainConfig {
        MlpTrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            l2: self.l2,
            batch_size: self.batch_size,
        }
    }
}

/// A base-classifier family together with its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Perceptron(PerceptronParams),
    LogisticRegression(LogisticParams),
    DecisionTree(TreeSpec),
    RandomForest(ForestParams),
    LinearSvm(SvmParams),
    Mlp(MlpParams),
}

impl ClassifierSpec {
    pub fn perceptron() -> Self {
        ClassifierSpec::Perceptron(PerceptronParams::default())
    }

    pub fn logistic_regression() -> Self {
        ClassifierSpec::LogisticRegression(LogisticParams::default())
    }

    pub fn decision_tree() -> Self {
        ClassifierSpec::DecisionTree(TreeSpec::default())
    }

    pub fn random_forest() -> Self {
        ClassifierSpec::RandomForest(ForestParams::default())
    }

    pub fn linear_svm() -> Self {
        ClassifierSpec::LinearSvm(SvmParams::default())
    }

    pub fn mlp() -> Self {
        ClassifierSpec::Mlp(MlpParams::default())
    }

    /// Perceptron, logistic regression, random forest, linear SVM and MLP
    /// with default hyperparameters.
    pub fn default_families() -> Vec<ClassifierSpec> {
        vec![
            Self::perceptron(),
            Self::logistic_regression(),
            Self::random_forest(),
            Self::linear_svm(),
            Self::mlp(),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::Perceptron(_) => "perceptron",
            ClassifierSpec::LogisticRegression(_) => "logistic_regression",
            ClassifierSpec::DecisionTree(_) => "decision_tree",
            ClassifierSpec::RandomForest(_) => "random_forest",
            ClassifierSpec::LinearSvm(_) => "linear_svm",
            ClassifierSpec::Mlp(_) => "mlp",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let what = self.name();
        match self {
            ClassifierSpec::Perceptron(p) => {
                positive(what, "epochs", p.epochs as f64)?;
                positive(what, "learning_rate", p.learning_rate)
            }
            ClassifierSpec::LogisticRegression(p) => {
                positive(what, "iterations", p.iterations as f64)?;
                positive(what, "learning_rate", p.learning_rate)?;
                non_negative(what, "l2", p.l2)
            }
            ClassifierSpec::DecisionTree(p) => positive(what, "max_depth", p.max_depth as f64),
            ClassifierSpec::RandomForest(p) => {
                positive(what, "n_trees", p.n_trees as f64)?;
                if let Some(d) = p.max_depth {
                    positive(what, "max_depth", d as f64)?;
                }
                if let Some(f) = p.max_features {
                    positive(what, "max_features", f as f64)?;
                }
                Ok(())
            }
            ClassifierSpec::LinearSvm(p) => {
                positive(what, "epochs", p.epochs as f64)?;
                positive(what, "lambda", p.lambda)
            }
            ClassifierSpec::Mlp(p) => p.validate(what),
        }
    }
}

fn positive(what: &str, field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(MtsError::Configuration(format!(
            "{what}: {field} must be positive, got {v}"
        )))
    }
}

fn non_negative(what: &str, field: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(MtsError::Configuration(format!(
            "{what}: {field} must be non-negative, got {v}"
        )))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ClassifierModel {
    Constant(usize),
    Linear(LinearModel),
    Tree(DecisionTree),
    Forest(RandomForest),
    Boosted(AdaBoost),
    Mlp(Mlp),
}

/// A fitted classifier over `dim`-dimensional inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    model: ClassifierModel,
    num_classes: usize,
    dim: usize,
    /// Set when the training data forced a constant predictor.
    degenerate: bool,
}

impl TrainedClassifier {
    pub fn from_model(model: ClassifierModel, num_classes: usize, dim: usize) -> Self {
        TrainedClassifier {
            model,
            num_classes,
            dim,
            degenerate: false,
        }
    }

    pub fn constant(class: usize, num_classes: usize, dim: usize) -> Self {
        TrainedClassifier {
            model: ClassifierModel::Constant(class),
            num_classes,
            dim,
            degenerate: true,
        }
    }

    pub fn model(&self) -> &ClassifierModel {
        &self.model
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    fn check_dim(&self, x: &ArrayView1<f64>) -> Result<()> {
        if x.len() == self.dim {
            Ok(())
        } else {
            Err(MtsError::Shape(format!(
                "model expects {} features, got {}",
                self.dim,
                x.len()
            )))
        }
    }

    pub fn predict(&self, x: ArrayView1<f64>) -> Result<usize> {
        self.check_dim(&x)?;
        Ok(match &self.model {
            ClassifierModel::Constant(c) => *c,
            ClassifierModel::Linear(m) => m.predict(x),
            ClassifierModel::Tree(t) => t.predict(x),
            ClassifierModel::Forest(f) => f.predict(x),
            ClassifierModel::Boosted(b) => b.predict(x),
            ClassifierModel::Mlp(m) => linear::argmax(m.output(x).iter().copied()),
        })
    }

    /// Class membership scores summing to 1. Hard-margin learners return
    /// one-hot vectors.
    pub fn predict_proba(&self, x: ArrayView1<f64>) -> Result<Vec<f64>> {
        self.check_dim(&x)?;
        Ok(match &self.model {
            ClassifierModel::Constant(c) => {
                let mut p = vec![0.0; self.num_classes];
                p[*c] = 1.0;
                p
            }
            ClassifierModel::Linear(m) => m.predict_proba(x),
            ClassifierModel::Tree(t) => t.predict_proba(x),
            ClassifierModel::Forest(f) => f.predict_proba(x),
            ClassifierModel::Boosted(b) => b.predict_proba(x),
            ClassifierModel::Mlp(m) => m.output(x).to_vec(),
        })
    }

    pub fn predict_batch(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        x.rows().into_iter().map(|row| self.predict(row)).collect()
    }
}

pub fn train_classifier(spec: &ClassifierSpec, data: &Dataset, rng: &SeededRng) -> Result<TrainedClassifier> {
    train_classifier_weighted(spec, data, None, rng)
}

/// As [`train_classifier`], with optional per-instance weights.
pub fn train_classifier_weighted(
    spec: &ClassifierSpec,
    data: &Dataset,
    weights: Option<&[f64]>,
    rng: &SeededRng,
) -> Result<TrainedClassifier> {
    spec.validate()?;
    let n = data.len();
    let weights = match weights {
        Some(w) if w.len() != n => {
            return Err(MtsError::Shape(format!("{} weights for {n} instances", w.len())));
        }
        Some(w) if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || w.iter().sum::<f64>() <= 0.0 => {
            return Err(MtsError::Input(
                "instance weights must be non-negative with positive sum".into(),
            ));
        }
        Some(w) => w.to_vec(),
        None => linear::unit_weights(n),
    };
    let (c, d) = (data.num_classes(), data.dim());
    if let Some(constant) = degenerate_class(data, &weights) {
        return Ok(TrainedClassifier::constant(constant, c, d));
    }
    let x = data.features();
    let y = data.labels();
    let mut stream = rng.stream();
    let model = match spec {
        ClassifierSpec::Perceptron(p) => ClassifierModel::Linear(LinearModel::fit(
            LinearTrainer::Perceptron {
                epochs: p.epochs,
                learning_rate: p.learning_rate,
            },
            x.view(),
            y,
            &weights,
            c,
            &mut stream,
        )),
        ClassifierSpec::LogisticRegression(p) => ClassifierModel::Linear(LinearModel::fit(
            LinearTrainer::Logistic {
                iterations: p.iterations,
                learning_rate: p.learning_rate,
                l2: p.l2,
            },
            x.view(),
            y,
            &weights,
            c,
            &mut stream,
        )),
        ClassifierSpec::LinearSvm(p) => ClassifierModel::Linear(LinearModel::fit(
            LinearTrainer::Svm {
                epochs: p.epochs,
                lambda: p.lambda,
            },
            x.view(),
            y,
            &weights,
            c,
            &mut stream,
        )),
        ClassifierSpec::DecisionTree(p) => {
            let params = TreeParams {
                max_depth: Some(p.max_depth),
                min_samples_split: p.min_samples_split,
                max_features: None,
            };
            let idx: Vec<usize> = (0..n).collect();
            ClassifierModel::Tree(DecisionTree::fit(x, y, &weights, &idx, c, &params, &mut stream))
        }
        ClassifierSpec::RandomForest(p) => {
            let max_features = p
                .max_features
                .unwrap_or_else(|| ((d as f64).sqrt().round() as usize).max(1));
            let params = TreeParams {
                max_depth: p.max_depth,
                min_samples_split: 2,
                max_features: Some(max_features),
            };
            ClassifierModel::Forest(RandomForest::fit(x, y, &weights, c, p.n_trees, &params, rng))
        }
        ClassifierSpec::Mlp(p) => {
            let mut net = Mlp::new(d, &p.hidden, c, MlpOutput::Softmax, &mut stream);
            net.train(
                x.view(),
                MlpTarget::Classes(y),
                &weights,
                &p.train_config(),
                &mut stream,
            );
            ClassifierModel::Mlp(net)
        }
    };
    Ok(TrainedClassifier::from_model(model, c, d))
}

/// Constant class to predict when the data cannot support a real fit:
/// a single instance, a single (positively weighted) class, or no feature
/// with any variance.
fn degenerate_class(data: &Dataset, weights: &[f64]) -> Option<usize> {
    let mut class_weight = vec![0.0; data.num_classes()];
    for (&y, &w) in data.labels().iter().zip(weights) {
        class_weight[y] += w;
    }
    let majority = linear::argmax(class_weight.iter().copied());
    let present = class_weight.iter().filter(|&&w| w > 0.0).count();
    if data.len() == 1 || present <= 1 {
        return Some(majority);
    }
    let x = data.features();
    let first = x.row(0);
    let constant_features = x.rows().into_iter().all(|row| row == first);
    constant_features.then_some(majority)
}

/// SAMME AdaBoost over depth-limited trees.
pub fn train_adaboost(
    data: &Dataset,
    n_estimators: usize,
    max_depth: usize,
    rng: &SeededRng,
) -> Result<TrainedClassifier> {
    if n_estimators == 0 {
        return Err(MtsError::Configuration("adaboost needs n_estimators >= 1".into()));
    }
    if max_depth == 0 {
        return Err(MtsError::Configuration("adaboost needs max_depth >= 1".into()));
    }
    let (c, d) = (data.num_classes(), data.dim());
    if let Some(constant) = degenerate_class(data, &linear::unit_weights(data.len())) {
        return Ok(TrainedClassifier::constant(constant, c, d));
    }
    let model = AdaBoost::fit(data.features(), data.labels(), c, n_estimators, max_depth, rng);
    Ok(TrainedClassifier::from_model(ClassifierModel::Boosted(model), c, d))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RidgeParams {
    pub lambda: f64,
}

impl Default for RidgeParams {
    fn default() -> Self {
        RidgeParams { lambda: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RegressorSpec {
    Ridge(RidgeParams),
    #[serde(rename = "mlp")]
    MlpRegressor(MlpParams),
}

impl Default for RegressorSpec {
    fn default() -> Self {
        RegressorSpec::Ridge(RidgeParams::default())
    }
}

impl RegressorSpec {
    pub fn ridge(lambda: f64) -> Self {
        RegressorSpec::Ridge(RidgeParams { lambda })
    }

    /// One hidden layer of 16, 200 epochs.
    pub fn mlp() -> Self {
        RegressorSpec::MlpRegressor(MlpParams {
            hidden: vec![16],
            epochs: 200,
            ..MlpParams::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RegressorSpec::Ridge(p) => non_negative("ridge", "lambda", p.lambda),
            RegressorSpec::MlpRegressor(p) => p.validate("mlp regressor"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RegressorModel {
    Constant(f64),
    Ridge(Ridge),
    Mlp(Mlp),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedRegressor {
    model: RegressorModel,
    dim: usize,
}

impl TrainedRegressor {
    pub fn constant(value: f64, dim: usize) -> Self {
        TrainedRegressor {
            model: RegressorModel::Constant(value),
            dim,
        }
    }

    pub fn model(&self) -> &RegressorModel {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn predict_value(&self, x: ArrayView1<f64>) -> Result<f64> {
        if x.len() != self.dim {
            return Err(MtsError::Shape(format!(
                "regressor expects {} features, got {}",
                self.dim,
                x.len()
            )));
        }
        Ok(match &self.model {
            RegressorModel::Constant(v) => *v,
            RegressorModel::Ridge(r) => r.predict(x),
            RegressorModel::Mlp(m) => m.output(x)[0],
        })
    }
}

pub fn train_regressor(
    spec: &RegressorSpec,
    inputs: ArrayView2<f64>,
    targets: &[f64],
    rng: &SeededRng,
) -> Result<TrainedRegressor> {
    spec.validate()?;
    let (n, d) = inputs.dim();
    if n == 0 {
        return Err(MtsError::Input("regressor needs at least one training pair".into()));
    }
    if targets.len() != n {
        return Err(MtsError::Shape(format!("{} targets for {n} inputs", targets.len())));
    }
    if targets.iter().any(|t| !t.is_finite()) || inputs.iter().any(|v| !v.is_finite()) {
        return Err(MtsError::Input("regressor training data must be finite".into()));
    }
    let model = match spec {
        RegressorSpec::Ridge(p) => RegressorModel::Ridge(Ridge::fit(inputs, targets, p.lambda)),
        RegressorSpec::MlpRegressor(p) => {
            let mut stream = rng.stream();
            let mut net = Mlp::new(d, &p.hidden, 1, MlpOutput::Linear, &mut stream);
            net.train(
                inputs,
                MlpTarget::Values(targets),
                &linear::unit_weights(n),
                &p.train_config(),
                &mut stream,
            );
            RegressorModel::Mlp(net)
        }
    };
    Ok(TrainedRegressor { model, dim: d })
}

/// The K base classifiers whose votes are aggregated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    members: Vec<TrainedClassifier>,
    names: Vec<String>,
}

impl Ensemble {
    pub fn new(members: Vec<TrainedClassifier>, names: Vec<String>) -> Result<Self> {
        if members.len() < 2 {
            return Err(MtsError::Configuration(format!(
                "an ensemble needs at least 2 members, got {}",
                members.len()
            )));
        }
        if names.len() != members.len() {
            return Err(MtsError::Shape("one name per ensemble member".into()));
        }
        let (c, d) = (members[0].num_classes(), members[0].dim());
        if members.iter().any(|m| m.num_classes() != c || m.dim() != d) {
            return Err(MtsError::Shape(
                "ensemble members disagree on classes or input dimension".into(),
            ));
        }
        Ok(Ensemble { members, names })
    }

    /// Members named `member0`, `member1`, ...
    pub fn from_members(members: Vec<TrainedClassifier>) -> Result<Self> {
        let names = (0..members.len()).map(|i| format!("member{i}")).collect();
        Ensemble::new(members, names)
    }

    pub fn members(&self) -> &[TrainedClassifier] {
        &self.members
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.members[0].num_classes()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn predict_row(&self, x: ArrayView1<f64>) -> Result<Vec<usize>> {
        self.members.iter().map(|m| m.predict(x)).collect()
    }

    /// Votes of every member on every row of `x`.
    pub fn predict_matrix(&self, x: &Array2<f64>) -> Result<PredictionMatrix> {
        let columns: Vec<Vec<usize>> = self
            .members
            .par_iter()
            .map(|m| m.predict_batch(x.view()))
            .collect::<Result<_>>()?;
        let entries = Array2::from_shape_fn((x.nrows(), self.members.len()), |(i, j)| columns[j][i]);
        PredictionMatrix::new(entries, self.num_classes())
    }
}

/// Versioned JSON wrapper for persisted models.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelEnvelope<T> {
    pub format: String,
    pub version: u32,
    pub model: T,
}

pub const MODEL_FORMAT: &str = "mts-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

pub fn to_json<T: Serialize>(model: &T) -> Result<String> {
    let envelope = ModelEnvelope {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_FORMAT_VERSION,
        model,
    };
    serde_json::to_string(&envelope).map_err(|e| MtsError::Serialization(e.to_string()))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let envelope: ModelEnvelope<T> = serde_json::from_str(text).map_err(|e| MtsError::Serialization(e.to_string()))?;
    if envelope.format != MODEL_FORMAT || envelope.version != MODEL_FORMAT_VERSION {
        return Err(MtsError::Serialization(format!(
            "unsupported model format {} v{}",
            envelope.format, envelope.version
        )));
    }
    Ok(envelope.model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn blob(n: usize, seed: u64) -> Dataset {
        use rand::Rng;
        let mut s = SeededRng::new(seed).stream();
        let mut x = Array2::zeros((n, 2));
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let class = i % 2;
            let center = if class == 1 { 2.0 } else { -2.0 };
            x[[i, 0]] = center + s.random_range(-1.0..1.0);
            x[[i, 1]] = center + s.random_range(-1.0..1.0);
            y.push(class);
        }
        Dataset::new(x, y, 2).unwrap()
    }

    fn train_accuracy(model: &TrainedClassifier, data: &Dataset) -> f64 {
        let pred = model.predict_batch(data.features().view()).unwrap();
        crate::data::accuracy(&pred, data.labels()).unwrap()
    }

    #[test]
    fn perceptron_separates_blob() {
        let data = blob(60, 1);
        let model = train_classifier(&ClassifierSpec::perceptron(), &data, &SeededRng::new(0)).unwrap();
        assert_eq!(train_accuracy(&model, &data), 1.0);
    }

    #[test]
    fn every_family_fits_the_blob() {
        let data = blob(80, 2);
        for spec in ClassifierSpec::default_families()
            .into_iter()
            .chain([ClassifierSpec::decision_tree()])
        {
            let model = train_classifier(&spec, &data, &SeededRng::new(3)).unwrap();
            assert!(train_accuracy(&model, &data) >= 0.95, "{}", spec.name());
            assert!(!model.is_degenerate());
        }
    }

    #[test]
    fn single_class_gives_constant_model() {
        let data = Dataset::new(array![[0.0], [1.0], [2.0]], vec![2, 2, 2], 3).unwrap();
        let model = train_classifier(&ClassifierSpec::mlp(), &data, &SeededRng::new(0)).unwrap();
        assert!(model.is_degenerate());
        assert_eq!(model.predict(array![100.0].view()).unwrap(), 2);
        let one = Dataset::new(array![[0.0]], vec![1], 2).unwrap();
        let model = train_classifier(&ClassifierSpec::perceptron(), &one, &SeededRng::new(0)).unwrap();
        assert!(model.is_degenerate());
        assert_eq!(model.predict(array![-3.0].view()).unwrap(), 1);
    }

    #[test]
    fn dimension_mismatch_is_shape_error() {
        let data = blob(20, 4);
        let model = train_classifier(&ClassifierSpec::logistic_regression(), &data, &SeededRng::new(0)).unwrap();
        assert!(matches!(model.predict(array![1.0].view()), Err(MtsError::Shape(_))));
    }

    #[test]
    fn same_seed_same_model() {
        let data = blob(50, 5);
        for spec in ClassifierSpec::default_families() {
            let a = train_classifier(&spec, &data, &SeededRng::new(11)).unwrap();
            let b = train_classifier(&spec, &data, &SeededRng::new(11)).unwrap();
            assert_eq!(a, b, "{}", spec.name());
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let data = blob(10, 6);
        let bad = ClassifierSpec::Mlp(MlpParams {
            hidden: vec![],
            ..MlpParams::default()
        });
        assert!(matches!(
            train_classifier(&bad, &data, &SeededRng::new(0)),
            Err(MtsError::Configuration(_))
        ));
        let bad = ClassifierSpec::Perceptron(PerceptronParams {
            epochs: 0,
            learning_rate: 0.1,
        });
        assert!(train_classifier(&bad, &data, &SeededRng::new(0)).is_err());
    }

    #[test]
    fn spec_json_uses_defaults() {
        let spec: ClassifierSpec = serde_json::from_str(r#"{"family":"mlp","epochs":10}"#).unwrap();
        match spec {
            ClassifierSpec::Mlp(p) => {
                assert_eq!(p.epochs, 10);
                assert_eq!(p.hidden, vec![32]);
            }
            other => panic!("{other:?}"),
        }
        let reg: RegressorSpec = serde_json::from_str(r#"{"family":"ridge"}"#).unwrap();
        assert_eq!(reg, RegressorSpec::ridge(1.0));
    }

    #[test]
    fn ridge_constant_target() {
        let x = array![[0.0, 1.0], [2.0, -1.0], [3.0, 5.0]];
        let r = train_regressor(&RegressorSpec::default(), x.view(), &[0.4; 3], &SeededRng::new(0)).unwrap();
        for v in [array![10.0, -3.0], array![0.0, 0.0]] {
            assert!((r.predict_value(v.view()).unwrap() - 0.4).abs() < 1e-12);
        }
        assert!(train_regressor(&RegressorSpec::default(), x.view(), &[0.4; 2], &SeededRng::new(0)).is_err());
    }

    #[test]
    fn mlp_regressor_is_finite_and_deterministic() {
        let x = Array2::from_shape_fn((30, 3), |(i, j)| ((i * 7 + j * 3) % 11) as f64 / 5.0 - 1.0);
        let y: Vec<f64> = (0..30).map(|i| (i % 5) as f64 / 4.0).collect();
        let a = train_regressor(&RegressorSpec::mlp(), x.view(), &y, &SeededRng::new(2)).unwrap();
        let b = train_regressor(&RegressorSpec::mlp(), x.view(), &y, &SeededRng::new(2)).unwrap();
        assert_eq!(a, b);
        let v = a.predict_value(array![0.3, -7.0, 2.0].view()).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn model_json_roundtrip() {
        let data = blob(30, 7);
        let model = train_classifier(&ClassifierSpec::random_forest(), &data, &SeededRng::new(1)).unwrap();
        let text = to_json(&model).unwrap();
        let back: TrainedClassifier = from_json(&text).unwrap();
        assert_eq!(back, model);
        assert!(from_json::<TrainedClassifier>(r#"{"format":"other","version":1,"model":null}"#).is_err());
    }
}
