//! Emotional vs. non-emotional classification: polynomial-kernel SVM, a single
//! sigmoid neuron, stratified k-fold cross-validation and confusion metrics.

mod cv;
mod data;
mod metrics;
mod sigmoid;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Emotion;

pub use cv::{evaluate_cv, fold_seed, stratified_kfold, ClassifierConfig, EvalReport, Fold, FoldResult};
pub use data::{LabeledSet, Standardizer};
pub use metrics::{confusion_metrics, ClassMetrics, ConfusionMatrix, Metrics};
pub use sigmoid::{loss_and_gradient, train_sigmoid, SigmoidConfig, SigmoidModel};
pub use svm::{dual_objective, train_svm, PolyKernel, SvmConfig, SvmModel};

#[derive(Debug, thiserror::Error)]
pub enum MlError {
    #[error("training data must contain both classes")]
    BothClassesRequired,
    #[error("sigmoid training diverged (non-finite loss at epoch {0})")]
    DivergedLoss(usize),
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("too few samples: class {class} has {count} members for {k} folds")]
    TooFewSamples { class: Class, count: usize, k: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = MlError> = std::result::Result<T, E>;

/// Binary target: happy and sad are emotional, neutral is not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Class {
    NonEmotional,
    Emotional,
}

impl Class {
    /// Row/column order used by [`ConfusionMatrix`].
    pub const ALL: [Class; 2] = [Class::NonEmotional, Class::Emotional];

    pub fn index(self) -> usize {
        match self {
            Class::NonEmotional => 0,
            Class::Emotional => 1,
        }
    }

    /// +1 for emotional, -1 otherwise.
    pub fn sign(self) -> f64 {
        match self {
            Class::NonEmotional => -1.0,
            Class::Emotional => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Class::NonEmotional => "non-emotional",
            Class::Emotional => "emotional",
        }
    }
}

impl From<Emotion> for Class {
    fn from(e: Emotion) -> Self {
        if e.is_emotional() {
            Class::Emotional
        } else {
            Class::NonEmotional
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Class {
    type Err = MlError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "emotional" => Ok(Class::Emotional),
            "non-emotional" => Ok(Class::NonEmotional),
            other => Err(MlError::InvalidConfig(format!("unknown class '{other}'"))),
        }
    }
}

/// Per-class loss weighting. `Balanced` scales each class by `n / (2 n_class)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassWeighting {
    #[default]
    None,
    Balanced,
}

impl ClassWeighting {
    pub(crate) fn weights(self, labels: &[Class]) -> [f64; 2] {
        match self {
            ClassWeighting::None => [1.0, 1.0],
            ClassWeighting::Balanced => {
                let n = labels.len() as f64;
                let pos = labels.iter().filter(|&&c| c == Class::Emotional).count() as f64;
                [n / (2.0 * (n - pos)), n / (2.0 * pos)]
            }
        }
    }
}
