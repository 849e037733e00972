use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Class, ClassWeighting, LabeledSet, MlError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SigmoidConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Initial weights are drawn uniformly from `[-init_scale, init_scale]`.
    pub init_scale: f64,
    pub weighting: ClassWeighting,
}

impl Default for SigmoidConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            epochs: 2000,
            init_scale: 0.01,
            weighting: ClassWeighting::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmoidModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub threshold: f64,
}

fn sigma(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl SigmoidModel {
    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(MlError::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        let z: f64 = self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias;
        Ok(sigma(z))
    }

    /// Emotional when the output reaches the threshold.
    pub fn predict(&self, x: &[f64]) -> Result<Class> {
        Ok(if self.probability(x)? >= self.threshold {
            Class::Emotional
        } else {
            Class::NonEmotional
        })
    }
}

/// Weighted mean cross-entropy and its gradient with respect to `(weights, bias)`.
pub fn loss_and_gradient(
    data: &LabeledSet,
    class_weights: [f64; 2],
    weights: &[f64],
    bias: f64,
) -> (f64, Vec<f64>, f64) {
    let n = data.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for i in 0..data.len() {
        let x = data.row(i);
        let label = data.labels()[i];
        let t = if label == Class::Emotional { 1.0 } else { 0.0 };
        let cw = class_weights[label.index()];
        let z: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + bias;
        // log(1 + e^z) - t z, evaluated stably.
        let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
        loss += cw * (softplus - t * z);
        let r = cw * (sigma(z) - t);
        for (g, v) in gw.iter_mut().zip(x) {
            *g += r * v;
        }
        gb += r;
    }
    gw.iter_mut().for_each(|g| *g /= n);
    (loss / n, gw, gb / n)
}

/// Full-batch gradient descent on cross-entropy from a seeded small random start.
pub fn train_sigmoid(data: &LabeledSet, cfg: &SigmoidConfig, seed: u64) -> Result<SigmoidModel> {
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) || !(cfg.init_scale >= 0.0) {
        return Err(MlError::InvalidConfig(
            "learning rate must be positive and init scale non-negative".into(),
        ));
    }
    data.require_both_classes()?;
    let class_weights = cfg.weighting.weights(data.labels());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut init = || {
        if cfg.init_scale > 0.0 {
            rng.gen_range(-cfg.init_scale..=cfg.init_scale)
        } else {
            0.0
        }
    };
    let mut weights: Vec<f64> = (0..data.dim()).map(|_| init()).collect();
    let mut bias = init();
    for epoch in 0..cfg.epochs {
        let (loss, gw, gb) = loss_and_gradient(data, class_weights, &weights, bias);
        if !loss.is_finite() {
            return Err(MlError::DivergedLoss(epoch));
        }
        for (w, g) in weights.iter_mut().zip(&gw) {
            *w -= cfg.learning_rate * g;
        }
        bias -= cfg.learning_rate * gb;
    }
    if weights.iter().chain([&bias]).any(|v| !v.is_finite()) {
        return Err(MlError::DivergedLoss(cfg.epochs));
    }
    Ok(SigmoidModel {
        weights,
        bias,
        threshold: 0.5,
    })
}
