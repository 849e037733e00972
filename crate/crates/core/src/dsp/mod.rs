//! Endpoint detection and the amplitude, duration and wavelet features.

mod endpoint;
mod features;
mod wavelet;

use std::path::PathBuf;

use crate::corpus::CorpusError;

pub use endpoint::{
    amplitude_feature, detect_endpoints, duration_feature, EndpointConfig, Endpoints,
};
pub use features::{
    approx_mean_feature, extract_features, features_to_frame, read_features_csv,
    write_features_csv, ExtractionReport, FeatureRow, RecordFailure, FEATURE_COLUMNS,
    FEATURE_HEADER,
};
pub use wavelet::{daubechies_filters, dwt_level1, dwt_with, idwt_level1, FilterPair};

#[derive(Debug, thiserror::Error)]
pub enum DspError {
    #[error("no speech detected")]
    NoSpeech,
    #[error("clip of {samples} samples is shorter than one {frame}-sample frame")]
    TooShort { samples: usize, frame: usize },
    #[error("unsupported Daubechies order {0} (expected 1..=4)")]
    UnsupportedOrder(u8),
    #[error("empty signal")]
    EmptySignal,
    #[error("coefficient length mismatch: {approx} approximation vs {detail} detail")]
    LengthMismatch { approx: usize, detail: usize },
    #[error("invalid endpoint config: {0}")]
    InvalidConfig(String),
    #[error("invalid endpoints [{start}, {end}) for clip of {clip_len} samples")]
    InvalidEndpoints {
        start: usize,
        end: usize,
        clip_len: usize,
    },
    #[error("all {0} records failed feature extraction")]
    AllRecordsFailed(usize),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("feature table {path}: {reason}")]
    Table { path: PathBuf, reason: String },
}

pub type Result<T, E = DspError> = std::result::Result<T, E>;
