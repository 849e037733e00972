use std::collections::BTreeMap;

use super::{Frame, Result, StatsError};

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); zero for a single observation.
    pub sd: f64,
    pub se: f64,
}

/// Per-level count, mean, SD and standard error of `response`, by sorted level.
pub fn group_summary(frame: &Frame, group_by: &str, response: &str) -> Result<Vec<GroupSummary>> {
    let groups = frame.categorical(group_by)?;
    let y = frame.numeric(response)?;
    if y.is_empty() {
        return Err(StatsError::InvalidSpec("empty table".into()));
    }
    let mut by: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (g, v) in groups.iter().zip(y) {
        by.entry(g.as_str()).or_default().push(*v);
    }
    Ok(by
        .into_iter()
        .map(|(label, vals)| {
            let n = vals.len();
            let mean = vals.iter().sum::<f64>() / n as f64;
            let sd = if n > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            GroupSummary {
                label: label.to_string(),
                n,
                mean,
                sd,
                se: sd / (n as f64).sqrt(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row() {
        let f = Frame::new(1)
            .with_categorical("g", vec!["m".into()])
            .unwrap()
            .with_numeric("y", vec![0.49])
            .unwrap();
        let s = group_summary(&f, "g", "y").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].n, s[0].mean, s[0].sd), (1, 0.49, 0.0));
    }

    #[test]
    fn two_groups() {
        let f = Frame::new(4)
            .with_categorical("g", ["b", "a", "b", "a"].iter().map(|s| s.to_string()).collect())
            .unwrap()
            .with_numeric("y", vec![1.0, 2.0, 3.0, 6.0])
            .unwrap();
        let s = group_summary(&f, "g", "y").unwrap();
        assert_eq!(s[0].label, "a");
        assert_eq!(s[0].mean, 4.0);
        assert!((s[0].sd - 8f64.sqrt()).abs() < 1e-12);
        assert!((s[0].se - 2.0).abs() < 1e-12);
        assert_eq!(s[1].mean, 2.0);
        assert!(matches!(group_summary(&f, "zz", "y"), Err(StatsError::UnknownColumn(_))));
    }
}
