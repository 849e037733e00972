use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    confusion_metrics, train_sigmoid, train_svm, Class, ConfusionMatrix, LabeledSet, Metrics,
    MlError, Result, SigmoidConfig, SvmConfig,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub index: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits indices into `k` folds with per-class counts as even as possible.
///
/// Each class is shuffled with a seeded generator and dealt round-robin; the
/// deal continues across classes so fold sizes also stay within one of each other.
pub fn stratified_kfold(data: &LabeledSet, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(MlError::InvalidConfig(format!("need at least 2 folds, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assign = vec![0usize; data.len()];
    let mut next = 0usize;
    for class in Class::ALL {
        let mut idx: Vec<usize> = (0..data.len())
            .filter(|&i| data.labels()[i] == class)
            .collect();
        if idx.len() < k {
            return Err(MlError::TooFewSamples {
                class,
                count: idx.len(),
                k,
            });
        }
        idx.shuffle(&mut rng);
        for i in idx {
            assign[i] = next % k;
            next += 1;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train) = (0..data.len()).partition(|&i| assign[i] == f);
            Fold {
                index: f,
                train,
                test,
            }
        })
        .collect())
}

/// Seed used to train fold `fold` under root seed `seed`.
pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fold as u64 + 1);
    rng.next_u64()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierConfig {
    Svm(SvmConfig),
    Sigmoid(SigmoidConfig),
    /// Always predicts the given class.
    Constant { class: Class },
}

impl ClassifierConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierConfig::Svm(_) => "SVM",
            ClassifierConfig::Sigmoid(_) => "NN",
            ClassifierConfig::Constant { .. } => "constant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub seed: u64,
    pub train_size: usize,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    /// False only for an SVM that hit its iteration cap.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classifier: ClassifierConfig,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldResult>,
    pub pooled: ConfusionMatrix,
    pub metrics: Metrics,
    pub pooled_accuracy: f64,
    pub mean_fold_accuracy: f64,
}

fn run_fold(
    data: &LabeledSet,
    fold: &Fold,
    cfg: &ClassifierConfig,
    seed: u64,
) -> Result<FoldResult> {
    let train_raw = data.subset(&fold.train);
    let st = train_raw.fit_standardizer();
    let train = train_raw.standardized(&st)?;
    let test = data.subset(&fold.test).standardized(&st)?;
    let mut confusion = ConfusionMatrix::default();
    let mut converged = true;
    let predictions: Vec<Class> = match cfg {
        ClassifierConfig::Svm(c) => {
            let m = train_svm(&train, c, seed)?;
            converged = m.converged;
            (0..test.len())
                .map(|i| m.predict(test.row(i)))
                .collect::<Result<_>>()?
        }
        ClassifierConfig::Sigmoid(c) => {
            let m = train_sigmoid(&train, c, seed)?;
            (0..test.len())
                .map(|i| m.predict(test.row(i)))
                .collect::<Result<_>>()?
        }
        ClassifierConfig::Constant { class } => vec![*class; test.len()],
    };
    for (actual, predicted) in test.labels().iter().zip(predictions) {
        confusion.record(*actual, predicted);
    }
    Ok(FoldResult {
        fold: fold.index,
        seed,
        train_size: train.len(),
        accuracy: confusion.accuracy().ok_or(MlError::EmptyMatrix)?,
        confusion,
        converged,
    })
}

/// Stratified k-fold evaluation. Features are standardized with training-fold statistics.
pub fn evaluate_cv(
    data: &LabeledSet,
    cfg: &ClassifierConfig,
    k: usize,
    seed: u64,
) -> Result<EvalReport> {
    let folds = stratified_kfold(data, k, seed)?;
    let results = folds
        .par_iter()
        .map(|f| run_fold(data, f, cfg, fold_seed(seed, f.index)))
        .collect::<Result<Vec<_>>>()?;
    let mut pooled = ConfusionMatrix::default();
    for r in &results {
        pooled.add(&r.confusion);
    }
    let metrics = confusion_metrics(&pooled)?;
    let mean_fold_accuracy = results.iter().map(|r| r.accuracy).sum::<f64>() / k as f64;
    Ok(EvalReport {
        classifier: *cfg,
        k,
        seed,
        pooled_accuracy: metrics.accuracy,
        metrics,
        mean_fold_accuracy,
        folds: results,
        pooled,
    })
}
