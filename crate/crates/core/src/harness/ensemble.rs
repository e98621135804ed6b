//! The noisy base ensemble: every classifier family is trained once per
//! label-noise rate.

use rayon::prelude::*;

use crate::data::{flip_labels, Dataset};
use crate::error::{MtsError, Result};
use crate::learners::{train_classifier, ClassifierSpec, Ensemble};
use crate::rng::SeededRng;

/// Member `i = family * rates.len() + rate` flips labels with seed path
/// `member{i}/noise` and trains with `member{i}/train`. Only the training
/// labels are corrupted.
pub fn build_noisy_ensemble(
    train: &Dataset,
    families: &[ClassifierSpec],
    rates: &[f64],
    rng: &SeededRng,
) -> Result<Ensemble> {
    if families.is_empty() || rates.is_empty() {
        return Err(MtsError::Configuration(
            "ensemble needs families and noise rates".into(),
        ));
    }
    let jobs: Vec<(usize, &ClassifierSpec, f64)> = families
        .iter()
        .flat_map(|f| rates.iter().map(move |&r| (f, r)))
        .enumerate()
        .map(|(i, (f, r))| (i, f, r))
        .collect();
    let members = jobs
        .par_iter()
        .map(|&(i, spec, rate)| {
            let member = rng.derive(format!("member{i}"));
            let noisy = flip_labels(train, rate, &member.derive("noise"))?;
            train_classifier(spec, &noisy, &member.derive("train"))
        })
        .collect::<Result<Vec<_>>>()?;
    let names = jobs
        .iter()
        .map(|&(_, spec, rate)| format!("{}@{rate}", spec.name()))
        .collect();
    Ensemble::new(members, names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn data() -> Dataset {
        let x = Array2::from_shape_fn((40, 2), |(i, j)| (i as f64 + j as f64 * 0.5) / 10.0);
        let y = (0..40).map(|i| usize::from(i >= 20)).collect();
        Dataset::new(x, y, 2).unwrap()
    }

    #[test]
    fn family_major_order() {
        let fams = vec![ClassifierSpec::perceptron(), ClassifierSpec::logistic_regression()];
        let e = build_noisy_ensemble(&data(), &fams, &[0.0, 0.1, 0.2], &SeededRng::new(1)).unwrap();
        assert_eq!(e.len(), 6);
        assert_eq!(e.names()[0], "perceptron@0");
        assert_eq!(e.names()[3], "logistic_regression@0");
        assert_eq!(e.names()[5], "logistic_regression@0.2");
    }

    #[test]
    fn deterministic() {
        let fams = ClassifierSpec::default_families();
        let a = build_noisy_ensemble(&data(), &fams, &[0.06, 0.1], &SeededRng::new(3)).unwrap();
        let b = build_noisy_ensemble(&data(), &fams, &[0.06, 0.1], &SeededRng::new(3)).unwrap();
        assert_eq!(a, b);
    }
}
