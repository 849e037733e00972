use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Class, ClassWeighting, LabeledSet, MlError, Result};

const TAU: f64 = 1e-12;

/// `K(a, b) = (gamma <a, b> + coef0)^degree`. A missing gamma means `1 / d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolyKernel {
    pub degree: u32,
    pub coef0: f64,
    pub gamma: Option<f64>,
}

impl Default for PolyKernel {
    fn default() -> Self {
        Self {
            degree: 3,
            coef0: 1.0,
            gamma: None,
        }
    }
}

impl PolyKernel {
    /// Fixes gamma for input dimension `dim`.
    pub fn resolve(self, dim: usize) -> Self {
        Self {
            gamma: Some(self.gamma.unwrap_or(1.0 / dim as f64)),
            ..self
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let gamma = self.gamma.unwrap_or(1.0 / a.len() as f64);
        (gamma * dot + self.coef0).powi(self.degree as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub kernel: PolyKernel,
    pub c: f64,
    /// Stop once the maximal KKT violation falls below this.
    pub tol: f64,
    pub max_iter: usize,
    pub weighting: ClassWeighting,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            kernel: PolyKernel::default(),
            c: 1.0,
            tol: 1e-3,
            max_iter: 1_000_000,
            weighting: ClassWeighting::None,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(MlError::InvalidConfig(m.into()));
        if self.kernel.degree < 1 {
            return bad("kernel degree must be >= 1");
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad("C must be positive");
        }
        if !(self.tol > 0.0) {
            return bad("tolerance must be positive");
        }
        if !self.kernel.coef0.is_finite() || self.kernel.gamma.is_some_and(|g| !(g > 0.0)) {
            return bad("kernel gamma must be positive and coef0 finite");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    /// Dual coefficients, one per training example.
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub support_vectors: Vec<Vec<f64>>,
    pub support_labels: Vec<Class>,
    /// `alpha_i y_i` for each support vector.
    pub support_coef: Vec<f64>,
    pub kernel: PolyKernel,
    pub c: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl SvmModel {
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        let dim = self.support_vectors.first().map_or(x.len(), Vec::len);
        if x.len() != dim {
            return Err(MlError::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        Ok(self
            .support_vectors
            .iter()
            .zip(&self.support_coef)
            .map(|(sv, c)| c * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias)
    }

    /// A decision value of exactly zero counts as emotional.
    pub fn predict(&self, x: &[f64]) -> Result<Class> {
        Ok(if self.decision_value(x)? >= 0.0 {
            Class::Emotional
        } else {
            Class::NonEmotional
        })
    }
}

/// `sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij`.
pub fn dual_objective(data: &LabeledSet, kernel: &PolyKernel, alphas: &[f64]) -> f64 {
    let kernel = kernel.resolve(data.dim());
    let y: Vec<f64> = data.labels().iter().map(|c| c.sign()).collect();
    let mut quad = 0.0;
    for i in 0..data.len() {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..data.len() {
            quad += alphas[i] * alphas[j] * y[i] * y[j] * kernel.eval(data.row(i), data.row(j));
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

/// Sequential minimal optimization with second-order working-set selection.
///
/// `seed` fixes the scan order, which decides ties between equally good
/// working-set candidates. If `max_iter` runs out, the current feasible
/// solution is returned with `converged = false`.
pub fn train_svm(data: &LabeledSet, cfg: &SvmConfig, seed: u64) -> Result<SvmModel> {
    cfg.validate()?;
    data.require_both_classes()?;
    let n = data.len();
    let kernel = cfg.kernel.resolve(data.dim());
    let y: Vec<f64> = data.labels().iter().map(|c| c.sign()).collect();
    let class_w = cfg.weighting.weights(data.labels());
    let cap: Vec<f64> = data
        .labels()
        .iter()
        .map(|c| cfg.c * class_w[c.index()])
        .collect();
    let k = |i: usize, j: usize| kernel.eval(data.row(i), data.row(j));
    let diag: Vec<f64> = (0..n).map(|i| k(i, i)).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut col_i = vec![0.0; n];
    let mut col_j = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        let in_up = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] < cap[t]) || (y[t] < 0.0 && a[t] > 0.0);
        let in_low = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] > 0.0) || (y[t] < 0.0 && a[t] < cap[t]);

        let mut gmax = f64::NEG_INFINITY;
        let mut sel_i = None;
        for &t in &order {
            if in_up(t, &alpha) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    sel_i = Some(t);
                }
            }
        }
        let Some(i) = sel_i else {
            converged = true;
            break;
        };
        for (t, c) in col_i.iter_mut().enumerate() {
            *c = k(i, t);
        }
        let mut gmin = f64::INFINITY;
        let mut best = f64::INFINITY;
        let mut sel_j = None;
        for &t in &order {
            if !in_low(t, &alpha) {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            let b = gmax - v;
            if b > 0.0 {
                let mut a = diag[i] + diag[t] - 2.0 * col_i[t];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -b * b / a;
                if obj < best {
                    best = obj;
                    sel_j = Some(t);
                }
            }
        }
        let j = match sel_j {
            Some(j) if gmax - gmin >= cfg.tol => j,
            _ => {
                converged = true;
                break;
            }
        };
        for (t, c) in col_j.iter_mut().enumerate() {
            *c = k(j, t);
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (ci, cj) = (cap[i], cap[j]);
        let mut quad = diag[i] + diag[j] - 2.0 * col_i[j];
        if quad <= 0.0 {
            quad = TAU;
        }
        let (mut ai, mut aj) = (old_i, old_j);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > ci - cj {
                if ai > ci {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if aj > cj {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > ci {
                if ai > ci {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > cj {
                if aj > cj {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * col_i[t] * di + y[j] * col_j[t] * dj);
        }
    }

    let bias = -rho(&alpha, &grad, &y, &cap);
    let mut support_vectors = Vec::new();
    let mut support_labels = Vec::new();
    let mut support_coef = Vec::new();
    for (t, &a) in alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(data.row(t).to_vec());
            support_labels.push(data.labels()[t]);
            support_coef.push(a * y[t]);
        }
    }
    Ok(SvmModel {
        alphas: alpha,
        bias,
        support_vectors,
        support_labels,
        support_coef,
        kernel,
        c: cfg.c,
        converged,
        iterations,
    })
}

fn rho(alpha: &[f64], grad: &[f64], y: &[f64], cap: &[f64]) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= cap[t] {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum += yg;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}
