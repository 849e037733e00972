//! Least squares and single-factor random-intercept mixed models, both fitted
//! by maximum likelihood, plus the likelihood-ratio test between nested fits.
//!
//! The mixed model is `y = X beta + Z b + e` with `b ~ N(0, sigma_b^2 I)` per
//! group level and `e ~ N(0, sigma_e^2 I)`. Writing `theta = sigma_b / sigma_e`,
//! the marginal covariance is `sigma_e^2 (I + theta^2 Z Z')`. For a fixed theta
//! both `beta` and `sigma_e` have closed forms, which leaves the profiled deviance
//!
//! ```text
//! d(theta) = sum_j ln(1 + theta^2 n_j) + n (1 + ln(2 pi r^2(theta) / n))
//! ```
//!
//! where `r^2` is the penalized residual sum of squares. Because `Z'Z` is
//! diagonal for a single grouping factor, `(I + theta^2 Z Z')^-1` reduces to
//! per-group weights `w_j = theta^2 / (1 + theta^2 n_j)` and every evaluation
//! costs O(n p + q p^2).

use nalgebra::{DMatrix, DVector};

use super::{chi_square_sf, Frame, Result, StatsError, TestResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedFactor {
    pub name: String,
    /// Reference level for treatment contrasts; the first sorted level when `None`.
    pub reference: Option<String>,
}

/// Response, categorical fixed effects and an optional random-intercept group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub response: String,
    pub fixed: Vec<FixedFactor>,
    pub random_group: Option<String>,
}

impl ModelSpec {
    pub fn new(response: &str) -> Self {
        Self {
            response: response.to_string(),
            fixed: Vec::new(),
            random_group: None,
        }
    }

    pub fn fixed(mut self, name: &str, reference: Option<&str>) -> Self {
        self.fixed.push(FixedFactor {
            name: name.to_string(),
            reference: reference.map(str::to_string),
        });
        self
    }

    pub fn random(mut self, group: &str) -> Self {
        self.random_group = Some(group.to_string());
        self
    }

    pub fn without_random(&self) -> Self {
        Self {
            random_group: None,
            ..self.clone()
        }
    }

    pub fn without_fixed(&self) -> Self {
        Self {
            fixed: Vec::new(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmmFit {
    pub response: String,
    /// "(Intercept)" followed by `factor:level` for each non-reference level.
    pub coef_names: Vec<String>,
    pub beta: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub theta: f64,
    pub sigma_e: f64,
    pub sigma_b: f64,
    pub random_group: Option<String>,
    /// Conditional modes of the random intercepts, by sorted group level.
    pub blups: Vec<(String, f64)>,
    pub fitted: Vec<f64>,
    pub log_lik: f64,
    pub deviance: f64,
    pub n_params: usize,
    pub n_obs: usize,
    data_fingerprint: u64,
}

impl LmmFit {
    pub fn coef(&self, name: &str) -> Option<(f64, f64)> {
        let i = self.coef_names.iter().position(|n| n == name)?;
        Some((self.beta[i], self.std_errors[i]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmmOptions {
    pub theta_max: f64,
    pub theta_tol: f64,
    /// Coarse grid points used to bracket the minimum before golden-section search.
    pub grid_points: usize,
}

impl Default for LmmOptions {
    fn default() -> Self {
        Self {
            theta_max: 100.0,
            theta_tol: 1e-8,
            grid_points: 400,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LrtOptions {
    /// Halve the chi-square(1) p-value when the dropped parameter is the random
    /// intercept variance (null at the boundary of the parameter space).
    pub boundary_correction: bool,
}

struct Design {
    x: DMatrix<f64>,
    y: DVector<f64>,
    coef_names: Vec<String>,
    group_of: Vec<usize>,
    group_levels: Vec<String>,
}

fn fingerprint(y: &[f64]) -> u64 {
    // FNV-1a over the raw bits.
    y.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, v| {
        v.to_bits()
            .to_le_bytes()
            .iter()
            .fold(h, |h, b| (h ^ u64::from(*b)).wrapping_mul(0x0100_0000_01b3))
    })
}

fn build_design(spec: &ModelSpec, frame: &Frame) -> Result<Design> {
    let y = frame.numeric(&spec.response)?;
    let n = y.len();
    if n == 0 {
        return Err(StatsError::InvalidSpec("empty table".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidSpec(format!(
            "response '{}' has non-finite values",
            spec.response
        )));
    }
    let mut columns: Vec<Vec<f64>> = vec![vec![1.0; n]];
    let mut coef_names = vec!["(Intercept)".to_string()];
    for f in &spec.fixed {
        let values = frame.categorical(&f.name)?;
        let levels = frame.levels(&f.name)?;
        if levels.len() < 2 {
            return Err(StatsError::InvalidSpec(format!(
                "factor '{}' needs at least 2 levels",
                f.name
            )));
        }
        let reference = match &f.reference {
            Some(r) if levels.contains(r) => r.clone(),
            Some(r) => {
                return Err(StatsError::InvalidSpec(format!(
                    "reference level '{r}' not found in factor '{}'",
                    f.name
                )))
            }
            None => levels[0].clone(),
        };
        for level in levels.iter().filter(|l| **l != reference) {
            columns.push(values.iter().map(|v| f64::from(u8::from(v == level))).collect());
            coef_names.push(format!("{}:{level}", f.name));
        }
    }
    let p = columns.len();
    if p > n {
        return Err(StatsError::RankDeficient(format!("{p} coefficients, {n} observations")));
    }
    let x = DMatrix::from_fn(n, p, |i, j| columns[j][i]);
    let (group_of, group_levels) = match &spec.random_group {
        None => (Vec::new(), Vec::new()),
        Some(g) => {
            let values = frame.categorical(g)?;
            let levels = frame.levels(g)?;
            if levels.len() < 2 {
                return Err(StatsError::SingularGroup(g.clone()));
            }
            let idx = values
                .iter()
                .map(|v| levels.binary_search(v).expect("level present"))
                .collect();
            (idx, levels)
        }
    };
    // Rank check on X through its R factor.
    let r = x.clone().qr().r();
    let diag: Vec<f64> = (0..p).map(|i| r[(i, i)].abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    if let Some(j) = diag.iter().position(|d| *d <= 1e-10 * max.max(1.0)) {
        return Err(StatsError::RankDeficient(format!(
            "column '{}' is a linear combination of earlier columns",
            coef_names[j]
        )));
    }
    Ok(Design {
        x,
        y: DVector::from_column_slice(y),
        coef_names,
        group_of,
        group_levels,
    })
}

fn gaussian_deviance(n: f64, rss: f64) -> f64 {
    n * (1.0 + (2.0 * std::f64::consts::PI * rss / n).ln())
}

/// Residual sums of squares at rounding level relative to the response are
/// treated as an exact fit, so every fitting path agrees on a deviance of -inf.
fn snap_rss(rss: f64, yty: f64) -> f64 {
    if rss <= 1e-20 * yty {
        0.0
    } else {
        rss
    }
}

/// Ordinary least squares with treatment contrasts, as an ML fit (`sigma^2 = RSS / n`).
pub fn fit_ols(spec: &ModelSpec, frame: &Frame) -> Result<LmmFit> {
    if spec.random_group.is_some() {
        return Err(StatsError::InvalidSpec(
            "fit_ols takes a model without a random group".into(),
        ));
    }
    let d = build_design(spec, frame)?;
    let n = d.y.len();
    let p = d.x.ncols();
    let qr = d.x.clone().qr();
    let qty = qr.q().transpose() * &d.y;
    let r = qr.r();
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| StatsError::RankDeficient("singular R".into()))?;
    let fitted = &d.x * &beta;
    let rss = snap_rss((&d.y - &fitted).norm_squared(), d.y.norm_squared());
    let sigma2 = rss / n as f64;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| StatsError::RankDeficient("singular R".into()))?;
    let cov = &r_inv * r_inv.transpose();
    let deviance = gaussian_deviance(n as f64, rss);
    Ok(LmmFit {
        response: spec.response.clone(),
        coef_names: d.coef_names,
        beta: beta.iter().copied().collect(),
        std_errors: (0..p).map(|i| (sigma2 * cov[(i, i)]).sqrt()).collect(),
        theta: 0.0,
        sigma_e: sigma2.sqrt(),
        sigma_b: 0.0,
        random_group: None,
        blups: Vec::new(),
        fitted: fitted.iter().copied().collect(),
        log_lik: -deviance / 2.0,
        deviance,
        n_params: p + 1,
        n_obs: n,
        data_fingerprint: fingerprint(d.y.as_slice()),
    })
}

/// Sufficient statistics of a random-intercept model, reusable across theta values.
pub struct LmmProblem {
    spec: ModelSpec,
    design: Design,
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
    group_n: Vec<f64>,
    group_xsum: Vec<DVector<f64>>,
    group_ysum: Vec<f64>,
}

struct ThetaSolution {
    beta: DVector<f64>,
    a_inv: DMatrix<f64>,
    r2: f64,
    deviance: f64,
    weights: Vec<f64>,
    group_resid: Vec<f64>,
}

impl LmmProblem {
    pub fn new(spec: &ModelSpec, frame: &Frame) -> Result<Self> {
        if spec.random_group.is_none() {
            return Err(StatsError::InvalidSpec(
                "mixed model needs a random grouping factor".into(),
            ));
        }
        let design = build_design(spec, frame)?;
        let p = design.x.ncols();
        let q = design.group_levels.len();
        let xtx = design.x.transpose() * &design.x;
        let xty = design.x.transpose() * &design.y;
        let mut group_n = vec![0.0; q];
        let mut group_xsum = vec![DVector::zeros(p); q];
        let mut group_ysum = vec![0.0; q];
        for (i, &g) in design.group_of.iter().enumerate() {
            group_n[g] += 1.0;
            group_ysum[g] += design.y[i];
            group_xsum[g] += design.x.row(i).transpose();
        }
        Ok(Self {
            spec: spec.clone(),
            design,
            xtx,
            xty,
            group_n,
            group_xsum,
            group_ysum,
        })
    }

    fn solve(&self, theta: f64) -> Option<ThetaSolution> {
        let t2 = theta * theta;
        let weights: Vec<f64> = self.group_n.iter().map(|n| t2 / (1.0 + t2 * n)).collect();
        let mut a = self.xtx.clone();
        let mut c = self.xty.clone();
        for (g, w) in weights.iter().enumerate() {
            let s = &self.group_xsum[g];
            a -= (s * s.transpose()) * *w;
            c -= s * (*w * self.group_ysum[g]);
        }
        let chol = a.cholesky()?;
        let beta = chol.solve(&c);
        let resid = &self.design.y - &self.design.x * &beta;
        let group_resid: Vec<f64> = (0..weights.len())
            .map(|g| self.group_ysum[g] - self.group_xsum[g].dot(&beta))
            .collect();
        let r2 = (resid.norm_squared()
            - weights
                .iter()
                .zip(&group_resid)
                .map(|(w, e)| w * e * e)
                .sum::<f64>())
        .max(0.0);
        let r2 = snap_rss(r2, self.design.y.norm_squared());
        let n = self.design.y.len() as f64;
        let log_det: f64 = self.group_n.iter().map(|nj| (t2 * nj).ln_1p()).sum();
        Some(ThetaSolution {
            beta,
            a_inv: chol.inverse(),
            r2,
            deviance: log_det + gaussian_deviance(n, r2),
            weights,
            group_resid,
        })
    }

    /// Profiled ML deviance at `theta`; `+inf` where the system is not positive definite.
    pub fn deviance(&self, theta: f64) -> f64 {
        self.solve(theta).map_or(f64::INFINITY, |s| s.deviance)
    }

    /// The fit with theta held fixed.
    pub fn fit_at(&self, theta: f64) -> Result<LmmFit> {
        let s = self
            .solve(theta)
            .ok_or_else(|| StatsError::RankDeficient("X' V^-1 X is not positive definite".into()))?;
        let d = &self.design;
        let n = d.y.len();
        let p = d.x.ncols();
        let sigma_e = (s.r2 / n as f64).sqrt();
        let blup: Vec<f64> = s
            .weights
            .iter()
            .zip(&s.group_resid)
            .map(|(w, e)| w * e)
            .collect();
        let fixed_part = &d.x * &s.beta;
        let fitted = fixed_part
            .iter()
            .zip(&d.group_of)
            .map(|(f, g)| f + blup[*g])
            .collect();
        Ok(LmmFit {
            response: self.spec.response.clone(),
            coef_names: d.coef_names.clone(),
            beta: s.beta.iter().copied().collect(),
            std_errors: (0..p)
                .map(|i| (sigma_e * sigma_e * s.a_inv[(i, i)]).sqrt())
                .collect(),
            theta,
            sigma_e,
            sigma_b: theta * sigma_e,
            random_group: self.spec.random_group.clone(),
            blups: d.group_levels.iter().cloned().zip(blup).collect(),
            fitted,
            log_lik: -s.deviance / 2.0,
            deviance: s.deviance,
            n_params: p + 2,
            n_obs: n,
            data_fingerprint: fingerprint(d.y.as_slice()),
        })
    }

    /// Minimizes the profiled deviance over `[0, theta_max]`: a coarse grid,
    /// denser near zero, brackets the minimum, then golden-section search refines it.
    pub fn fit(&self, opts: &LmmOptions) -> Result<LmmFit> {
        if !(opts.theta_max > 0.0) || opts.grid_points < 2 {
            return Err(StatsError::InvalidSpec("theta_max > 0 and grid_points >= 2 required".into()));
        }
        let k = opts.grid_points;
        let grid: Vec<f64> = (0..=k)
            .map(|i| opts.theta_max * (i as f64 / k as f64).powi(3))
            .collect();
        let devs: Vec<f64> = grid.iter().map(|&t| self.deviance(t)).collect();
        let best = (0..=k).fold(0, |b, i| if devs[i] < devs[b] { i } else { b });
        let (mut lo, mut hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(k)]);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let (mut f1, mut f2) = (self.deviance(x1), self.deviance(x2));
        while hi - lo > opts.theta_tol {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = self.deviance(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = self.deviance(x2);
            }
        }
        let mut theta = grid[best];
        let mut dev = devs[best];
        for t in [lo, hi, 0.5 * (lo + hi)] {
            let d = self.deviance(t);
            if d < dev {
                theta = t;
                dev = d;
            }
        }
        self.fit_at(theta)
    }
}

pub fn fit_lmm(spec: &ModelSpec, frame: &Frame) -> Result<LmmFit> {
    fit_lmm_with(spec, frame, &LmmOptions::default())
}

pub fn fit_lmm_with(spec: &ModelSpec, frame: &Frame, opts: &LmmOptions) -> Result<LmmFit> {
    LmmProblem::new(spec, frame)?.fit(opts)
}

pub fn profiled_deviance(spec: &ModelSpec, frame: &Frame, theta: f64) -> Result<f64> {
    Ok(LmmProblem::new(spec, frame)?.deviance(theta))
}

pub fn lrt(full: &LmmFit, null: &LmmFit) -> Result<TestResult> {
    lrt_with(full, null, &LrtOptions::default())
}

/// Likelihood-ratio test of `null` nested in `full`, both ML fits of the same data.
pub fn lrt_with(full: &LmmFit, null: &LmmFit, opts: &LrtOptions) -> Result<TestResult> {
    if full.n_obs != null.n_obs
        || full.response != null.response
        || full.data_fingerprint != null.data_fingerprint
    {
        return Err(StatsError::DataMismatch(format!(
            "'{}' (n = {}) vs '{}' (n = {})",
            full.response, full.n_obs, null.response, null.n_obs
        )));
    }
    let df = full.n_params as i64 - null.n_params as i64;
    let coefs_nested = null.coef_names.iter().all(|c| full.coef_names.contains(c));
    let random_nested = null.random_group.is_none() || null.random_group == full.random_group;
    if df <= 0 || !coefs_nested || !random_nested {
        return Err(StatsError::NotNested(df));
    }
    // Both deviances may be -inf for a response the model reproduces exactly.
    let diff = null.deviance - full.deviance;
    let statistic = if diff > 0.0 { diff } else { 0.0 };
    let mut p_value = chi_square_sf(statistic, df as u32)?;
    let dropped_variance = full.random_group.is_some() && null.random_group.is_none();
    if opts.boundary_correction && dropped_variance && df == 1 {
        p_value = if statistic > 0.0 { 0.5 * p_value } else { 1.0 };
    }
    Ok(TestResult {
        statistic,
        df: df as f64,
        df2: None,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(levels: &[&str], y: &[f64]) -> Frame {
        Frame::new(y.len())
            .with_categorical("f", levels.iter().map(|s| s.to_string()).collect())
            .unwrap()
            .with_numeric("y", y.to_vec())
            .unwrap()
    }

    #[test]
    fn ols_exact_fit() {
        let f = frame(&["a", "b", "c"], &[1.0, 3.0, 5.0]);
        let fit = fit_ols(&ModelSpec::new("y").fixed("f", Some("a")), &f).unwrap();
        let expect = [1.0, 2.0, 4.0];
        for (b, e) in fit.beta.iter().zip(expect) {
            assert!((b - e).abs() < 1e-12);
        }
        assert!(fit.sigma_e < 1e-12);
        assert_eq!(fit.coef_names, ["(Intercept)", "f:b", "f:c"]);
    }

    #[test]
    fn ols_intercept_only() {
        let f = frame(&["a", "b", "c"], &[1.0, 2.0, 3.0]);
        let fit = fit_ols(&ModelSpec::new("y"), &f).unwrap();
        assert!((fit.beta[0] - 2.0).abs() < 1e-12);
        assert_eq!(fit.n_params, 2);
        // RSS = 2, sigma^2 = 2/3.
        let want = -1.5 * ((2.0 * std::f64::consts::PI * 2.0 / 3.0).ln() + 1.0);
        assert!((fit.log_lik - want).abs() < 1e-12);
    }

    #[test]
    fn spec_errors() {
        let f = frame(&["a", "a", "a"], &[1.0, 2.0, 3.0]);
        assert!(matches!(
            fit_ols(&ModelSpec::new("y").fixed("f", None), &f),
            Err(StatsError::InvalidSpec(_))
        ));
        assert!(matches!(
            fit_lmm(&ModelSpec::new("y").random("f"), &f),
            Err(StatsError::SingularGroup(_))
        ));
        assert!(matches!(
            fit_ols(&ModelSpec::new("nope"), &f),
            Err(StatsError::UnknownColumn(_))
        ));
        let f = frame(&["a", "b", "c"], &[1.0, 2.0, 3.0]);
        assert!(matches!(
            fit_ols(&ModelSpec::new("y").fixed("f", Some("z")), &f),
            Err(StatsError::InvalidSpec(_))
        ));
    }

    #[test]
    fn rank_deficient_design() {
        // Two factors carrying the same partition.
        let g: Vec<String> = ["a", "a", "b", "b"].iter().map(|s| s.to_string()).collect();
        let f = Frame::new(4)
            .with_categorical("f", g.clone())
            .unwrap()
            .with_categorical("g", g)
            .unwrap()
            .with_numeric("y", vec![1.0, 2.0, 3.0, 5.0])
            .unwrap();
        let spec = ModelSpec::new("y").fixed("f", None).fixed("g", None);
        assert!(matches!(fit_ols(&spec, &f), Err(StatsError::RankDeficient(_))));
    }

    #[test]
    fn lrt_requires_nesting_and_same_data() {
        let f = frame(&["a", "b", "a", "b", "a", "b"], &[1.0, 2.5, 1.2, 2.1, 0.7, 2.9]);
        let full = fit_ols(&ModelSpec::new("y").fixed("f", None), &f).unwrap();
        let null = fit_ols(&ModelSpec::new("y"), &f).unwrap();
        assert!(matches!(lrt(&full, &full), Err(StatsError::NotNested(0))));
        assert!(matches!(lrt(&null, &full), Err(StatsError::NotNested(_))));
        let t = lrt(&full, &null).unwrap();
        assert!(t.statistic > 0.0 && t.p_value < 0.05);
        let other = frame(&["a", "b", "a", "b", "a", "b"], &[1.0, 2.5, 1.2, 2.1, 0.7, 3.0]);
        let null2 = fit_ols(&ModelSpec::new("y"), &other).unwrap();
        assert!(matches!(lrt(&full, &null2), Err(StatsError::DataMismatch(_))));
    }

    #[test]
    fn constant_response_gives_zero_statistic() {
        let levels = ["a", "b", "c", "a", "b", "c", "a", "b"];
        let g: Vec<String> = ["x", "x", "y", "y", "x", "y", "x", "y"].iter().map(|s| s.to_string()).collect();
        let f = frame(&levels, &[3.0; 8]).with_categorical("g", g).unwrap();
        let spec = ModelSpec::new("y").fixed("f", None).random("g");
        let full = fit_lmm(&spec, &f).unwrap();
        let null = fit_lmm(&spec.without_fixed(), &f).unwrap();
        let t = lrt(&full, &null).unwrap();
        assert_eq!((t.statistic, t.p_value), (0.0, 1.0));
        let t = lrt(&full, &fit_ols(&spec.without_random(), &f).unwrap()).unwrap();
        assert_eq!((t.statistic, t.p_value), (0.0, 1.0));
    }

    #[test]
    fn boundary_correction_halves_p() {
        let levels: Vec<&str> = (0..40).map(|i| ["a", "b"][i % 2]).collect();
        let groups: Vec<String> = (0..40).map(|i| format!("g{}", i / 5)).collect();
        let y: Vec<f64> = (0..40)
            .map(|i| (i % 2) as f64 + ((i / 5) as f64 * 0.7).sin() + 0.1 * ((i * 7) % 5) as f64)
            .collect();
        let f = frame(&levels, &y).with_categorical("g", groups).unwrap();
        let spec = ModelSpec::new("y").fixed("f", None).random("g");
        let full = fit_lmm(&spec, &f).unwrap();
        let null = fit_ols(&spec.without_random(), &f).unwrap();
        let plain = lrt(&full, &null).unwrap();
        let corrected = lrt_with(&full, &null, &LrtOptions { boundary_correction: true }).unwrap();
        assert!(plain.statistic > 0.0);
        assert!((corrected.p_value - 0.5 * plain.p_value).abs() < 1e-15);
    }
}
