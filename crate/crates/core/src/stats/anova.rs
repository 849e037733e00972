use super::{f_sf, Result, StatsError};

/// A test statistic with its degrees of freedom and upper-tail p-value.
///
/// `df2` is set for F statistics and `None` for chi-square statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub df: f64,
    pub df2: Option<f64>,
    pub p_value: f64,
}

/// One-way ANOVA F test across `groups`.
///
/// Degenerate data follow fixed conventions: if every observation is identical
/// the result is F = 0, p = 1; if the within-group sum of squares vanishes while
/// group means differ, F = +inf and p = 0.
pub fn anova_oneway<G: AsRef<[f64]>>(groups: &[G]) -> Result<TestResult> {
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::DegenerateGroups(format!("{k} group(s), need at least 2")));
    }
    let n: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    if n <= k {
        return Err(StatsError::DegenerateGroups(format!(
            "{n} observations in {k} groups leaves no within-group degrees of freedom"
        )));
    }
    if groups.iter().any(|g| g.as_ref().is_empty()) {
        return Err(StatsError::DegenerateGroups("empty group".into()));
    }
    if groups.iter().flat_map(|g| g.as_ref()).any(|v| !v.is_finite()) {
        return Err(StatsError::Domain("non-finite observation".into()));
    }
    let grand = groups.iter().flat_map(|g| g.as_ref()).sum::<f64>() / n as f64;
    let (mut ssb, mut ssw) = (0.0, 0.0);
    for g in groups {
        let g = g.as_ref();
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += g.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    }
    let (df1, df2) = ((k - 1) as f64, (n - k) as f64);
    let sst = ssb + ssw;
    // Relative cutoffs absorb the rounding left by computing means in floating point.
    let scale = groups
        .iter()
        .flat_map(|g| g.as_ref())
        .map(|v| v * v)
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    let (statistic, p_value) = if sst <= 1e-24 * scale {
        (0.0, 1.0)
    } else if ssw <= 1e-24 * scale {
        (f64::INFINITY, 0.0)
    } else {
        let f = (ssb / df1) / (ssw / df2);
        (f, f_sf(f, (k - 1) as u32, (n - k) as u32)?)
    };
    Ok(TestResult {
        statistic,
        df: df1,
        df2: Some(df2),
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn textbook_example() {
        let t = anova_oneway(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        // SSB = 13.5, SSW = 4, F = 13.5 / (4/4) = 13.5 with df (1, 4).
        assert!((t.statistic - 13.5).abs() < 1e-12);
        assert_eq!((t.df, t.df2), (1.0, Some(4.0)));
        // F(1,4) = t(4)^2: p = 2 P(T4 > sqrt 13.5) = 0.021312...
        assert!((t.p_value - 0.0213).abs() < 1e-3);
    }

    #[test]
    fn identical_groups() {
        let t = anova_oneway(&[vec![2.0, 3.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert!((t.p_value - 1.0).abs() < 1e-12);
        let t = anova_oneway(&[vec![4.0; 3], vec![4.0; 5]]).unwrap();
        assert_eq!((t.statistic, t.p_value), (0.0, 1.0));
    }

    #[test]
    fn zero_within_variance() {
        let t = anova_oneway(&[vec![1.0; 3], vec![5.0; 3]]).unwrap();
        assert_eq!((t.statistic, t.p_value), (f64::INFINITY, 0.0));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            anova_oneway(&[vec![1.0, 2.0, 3.0]]),
            Err(StatsError::DegenerateGroups(_))
        ));
        assert!(matches!(
            anova_oneway(&[vec![1.0], vec![2.0]]),
            Err(StatsError::DegenerateGroups(_))
        ));
        assert!(anova_oneway(&[vec![1.0, 2.0], vec![]]).is_err());
    }

    proptest! {
        #[test]
        fn affine_invariance(
            groups in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 2..8), 2..5),
            shift in -1e3f64..1e3,
            scale in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0],
        ) {
            let a = anova_oneway(&groups).unwrap();
            let moved: Vec<Vec<f64>> = groups
                .iter()
                .map(|g| g.iter().map(|v| scale * v + shift).collect())
                .collect();
            let b = anova_oneway(&moved).unwrap();
            prop_assert!((a.statistic - b.statistic).abs() <= 1e-6 * a.statistic.max(1.0));
            prop_assert!((a.p_value - b.p_value).abs() < 1e-8);
        }
    }
}
