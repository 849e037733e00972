use serde::{Deserialize, Serialize};

use super::{Class, MlError, Result};

/// Per-column z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; constant columns get 1.
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }
}

/// Row-major feature matrix with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    x: Vec<f64>,
    dim: usize,
    labels: Vec<Class>,
    standardization: Option<Standardizer>,
}

impl LabeledSet {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<Class>) -> Result<Self> {
        if rows.is_empty() {
            return Err(MlError::InvalidData("no samples".into()));
        }
        if rows.len() != labels.len() {
            return Err(MlError::InvalidData(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(MlError::InvalidData("zero feature columns".into()));
        }
        let mut x = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != dim {
                return Err(MlError::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(MlError::InvalidData(format!("row {i} has a non-finite value")));
            }
            x.extend(r);
        }
        Ok(Self {
            x,
            dim,
            labels,
            standardization: None,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn labels(&self) -> &[Class] {
        &self.labels
    }

    pub fn standardization(&self) -> Option<&Standardizer> {
        self.standardization.as_ref()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let pos = self.labels.iter().filter(|&&c| c == Class::Emotional).count();
        [self.len() - pos, pos]
    }

    pub(crate) fn require_both_classes(&self) -> Result<()> {
        match self.class_counts() {
            [0, _] | [_, 0] => Err(MlError::BothClassesRequired),
            _ => Ok(()),
        }
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        let mut x = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            x.extend_from_slice(self.row(i));
        }
        Self {
            x,
            dim: self.dim,
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            standardization: self.standardization.clone(),
        }
    }

    pub fn fit_standardizer(&self) -> Standardizer {
        let n = self.len() as f64;
        let mut mean = vec![0.0; self.dim];
        for i in 0..self.len() {
            for (m, v) in mean.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; self.dim];
        for i in 0..self.len() {
            for ((s, v), m) in var.iter_mut().zip(self.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let sd = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, sd }
    }

    pub fn standardized(&self, st: &Standardizer) -> Result<Self> {
        if st.mean.len() != self.dim || st.sd.len() != self.dim {
            return Err(MlError::DimensionMismatch {
                expected: self.dim,
                got: st.mean.len(),
            });
        }
        let mut x = Vec::with_capacity(self.x.len());
        for i in 0..self.len() {
            x.extend(st.apply_row(self.row(i)));
        }
        Ok(Self {
            x,
            dim: self.dim,
            labels: self.labels.clone(),
            standardization: Some(st.clone()),
        })
    }
}
