//! Statistics: special functions, one-way ANOVA, least squares, a single
//! random-intercept linear mixed model fitted by maximum likelihood, and
//! likelihood-ratio comparison of nested fits.

mod anova;
mod frame;
mod lmm;
mod special;
mod summary;

pub use anova::{anova_oneway, TestResult};
pub use frame::Frame;
pub use lmm::{
    fit_lmm, fit_lmm_with, fit_ols, lrt, lrt_with, profiled_deviance, FixedFactor, LmmFit,
    LmmOptions, LmmProblem, LrtOptions, ModelSpec,
};
pub use special::{chi_square_sf, f_sf, ln_gamma};
pub use summary::{group_summary, GroupSummary};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("argument outside the function domain: {0}")]
    Domain(String),
    #[error("degenerate groups: {0}")]
    DegenerateGroups(String),
    #[error("design matrix is rank deficient ({0})")]
    RankDeficient(String),
    #[error("grouping factor '{0}' has a single level")]
    SingularGroup(String),
    #[error("models are not nested (df = {0})")]
    NotNested(i64),
    #[error("models were fitted to different data: {0}")]
    DataMismatch(String),
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T, E = StatsError> = std::result::Result<T, E>;
