use serde::{Deserialize, Serialize};

use super::{Class, MlError, Result};

/// `counts[actual][predicted]`, rows and columns in [`Class::ALL`] order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 2]; 2],
}

impl ConfusionMatrix {
    pub fn new(counts: [[u64; 2]; 2]) -> Self {
        Self { counts }
    }

    pub fn record(&mut self, actual: Class, predicted: Class) {
        self.counts[actual.index()][predicted.index()] += 1;
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for a in 0..2 {
            for p in 0..2 {
                self.counts[a][p] += other.counts[a][p];
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        self.counts[0][0] + self.counts[1][1]
    }

    pub fn row_total(&self, class: Class) -> u64 {
        self.counts[class.index()].iter().sum()
    }

    pub fn col_total(&self, class: Class) -> u64 {
        self.counts.iter().map(|r| r[class.index()]).sum()
    }

    /// `None` for an empty matrix.
    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.trace(), self.total())
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: Class,
    /// Correct predictions for this class (the diagonal cell).
    pub tp_row: u64,
    /// Items of this class predicted as the other class.
    pub fp_row: u64,
    pub row_total: u64,
    pub col_total: u64,
    /// Diagonal over row total (actual-class denominator), as labeled in the published table.
    pub precision: Option<f64>,
    /// Diagonal over column total (predicted-class denominator), as labeled in the published table.
    pub recall: Option<f64>,
    /// Conventional precision: diagonal over column total.
    pub std_precision: Option<f64>,
    /// Conventional recall: diagonal over row total.
    pub std_recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub per_class: [ClassMetrics; 2],
}

/// Per-class metrics. Undefined ratios (zero denominators) are `None`.
pub fn confusion_metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let accuracy = cm.accuracy().ok_or(MlError::EmptyMatrix)?;
    let per_class = Class::ALL.map(|c| {
        let diag = cm.counts[c.index()][c.index()];
        let row_total = cm.row_total(c);
        let col_total = cm.col_total(c);
        ClassMetrics {
            class: c,
            tp_row: diag,
            fp_row: row_total - diag,
            row_total,
            col_total,
            precision: ratio(diag, row_total),
            recall: ratio(diag, col_total),
            std_precision: ratio(diag, col_total),
            std_recall: ratio(diag, row_total),
        }
    });
    Ok(Metrics {
        accuracy,
        per_class,
    })
}
