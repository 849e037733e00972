use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::endpoint::{amplitude_feature, detect_endpoints, duration_feature};
use super::wavelet::{daubechies_filters, dwt_with, FilterPair};
use super::{DspError, EndpointConfig, Endpoints, Result};
use crate::corpus::{read_wav, AudioClip, CorpusManifest, Emotion, Gender};
use crate::format::sig9;
use crate::stats::Frame;

pub const FEATURE_HEADER: [&str; 11] = [
    "subject_id",
    "gender",
    "word",
    "emotion",
    "amplitude_mean",
    "duration_samples",
    "duration_s",
    "db1",
    "db2",
    "db3",
    "db4",
];

/// The six response columns, in report order.
pub const FEATURE_COLUMNS: [&str; 6] = [
    "amplitude_mean",
    "duration_samples",
    "db1",
    "db2",
    "db3",
    "db4",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub subject_id: String,
    pub gender: Gender,
    pub word: String,
    pub emotion: Emotion,
    pub amplitude_mean: f64,
    pub duration_samples: usize,
    pub duration_s: f64,
    /// Mean level-1 approximation coefficient for db1..db4.
    pub approx_means: [f64; 4],
}

impl FeatureRow {
    /// Odd-length segments get one zero sample appended before the DWT.
    pub fn dwt_padded(&self) -> bool {
        self.duration_samples % 2 == 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordFailure {
    /// Position in the manifest.
    pub index: usize,
    pub path: PathBuf,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionReport {
    pub rows: Vec<FeatureRow>,
    pub failures: Vec<RecordFailure>,
}

impl ExtractionReport {
    pub fn padded_count(&self) -> usize {
        self.rows.iter().filter(|r| r.dwt_padded()).count()
    }
}

/// Mean of the level-1 approximation coefficients of the endpointed segment.
pub fn approx_mean_feature(clip: &AudioClip, ep: &Endpoints, order: u8) -> Result<f64> {
    let filters = daubechies_filters(order)?;
    approx_mean_with(&clip.samples()[ep.start..ep.end], &filters)
}

fn approx_mean_with(segment: &[f64], filters: &FilterPair) -> Result<f64> {
    let (approx, _) = dwt_with(segment, filters)?;
    Ok(approx.iter().sum::<f64>() / approx.len() as f64)
}

/// Extracts all six features for every record, in manifest order.
///
/// Records that cannot be read or endpointed are listed in the report's
/// failures. Fails only when no record succeeds.
pub fn extract_features(
    manifest: &CorpusManifest,
    cfg: &EndpointConfig,
) -> Result<ExtractionReport> {
    cfg.validate()?;
    let filters = (1..=4)
        .map(daubechies_filters)
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<Result<FeatureRow>> = manifest
        .records
        .par_iter()
        .map(|rec| {
            let clip = read_wav(manifest.resolve(rec))?;
            let ep = detect_endpoints(&clip, cfg)?;
            let (duration_samples, duration_s) = duration_feature(&ep, clip.sample_rate());
            let segment = &clip.samples()[ep.start..ep.end];
            let mut approx_means = [0.0; 4];
            for (m, f) in approx_means.iter_mut().zip(&filters) {
                *m = approx_mean_with(segment, f)?;
            }
            Ok(FeatureRow {
                subject_id: rec.subject_id.clone(),
                gender: rec.gender,
                word: rec.word.clone(),
                emotion: rec.emotion,
                amplitude_mean: amplitude_feature(&clip, &ep),
                duration_samples,
                duration_s,
                approx_means,
            })
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (index, (res, rec)) in results.into_iter().zip(&manifest.records).enumerate() {
        match res {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(RecordFailure {
                index,
                path: rec.path.clone(),
                error: e.to_string(),
            }),
        }
    }
    if rows.is_empty() {
        return Err(DspError::AllRecordsFailed(failures.len()));
    }
    Ok(ExtractionReport { rows, failures })
}

fn table_err(path: &Path, reason: impl Into<String>) -> DspError {
    DspError::Table {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

pub fn write_features_csv(rows: &[FeatureRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e: std::io::Error| table_err(path, e.to_string());
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{}", FEATURE_HEADER.join(",")).map_err(io)?;
    for r in rows {
        let [d1, d2, d3, d4] = r.approx_means.map(sig9);
        writeln!(
            w,
            "{},{},{},{},{},{},{},{d1},{d2},{d3},{d4}",
            r.subject_id,
            r.gender,
            r.word,
            r.emotion,
            sig9(r.amplitude_mean),
            r.duration_samples,
            sig9(r.duration_s),
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_features_csv(path: impl AsRef<Path>) -> Result<Vec<FeatureRow>> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| table_err(path, e.to_string()))?;
    let header = rdr.headers().map_err(|e| table_err(path, e.to_string()))?;
    if header.iter().ne(FEATURE_HEADER) {
        return Err(table_err(
            path,
            format!("expected header '{}'", FEATURE_HEADER.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| table_err(path, e.to_string()))?;
        let bad = |what: &str| table_err(path, format!("line {line}: bad {what}"));
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(FEATURE_HEADER[k]))
        };
        let row = FeatureRow {
            subject_id: rec[0].to_string(),
            gender: rec[1].parse().map_err(|_| bad("gender"))?,
            word: rec[2].to_string(),
            emotion: rec[3].parse().map_err(|_| bad("emotion"))?,
            amplitude_mean: num(4)?,
            duration_samples: rec[5].parse().map_err(|_| bad("duration_samples"))?,
            duration_s: num(6)?,
            approx_means: [num(7)?, num(8)?, num(9)?, num(10)?],
        };
        if row.subject_id.is_empty() || row.word.is_empty() {
            return Err(bad("key field"));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(table_err(path, "no rows"));
    }
    Ok(rows)
}

/// Builds an analysis frame with the key columns as factors and every feature as a numeric column.
pub fn features_to_frame(rows: &[FeatureRow]) -> Result<Frame, crate::stats::StatsError> {
    let col = |f: fn(&FeatureRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    Frame::new(rows.len())
        .with_categorical("subject_id", rows.iter().map(|r| r.subject_id.clone()).collect())?
        .with_categorical("gender", rows.iter().map(|r| r.gender.to_string()).collect())?
        .with_categorical("word", rows.iter().map(|r| r.word.clone()).collect())?
        .with_categorical("emotion", rows.iter().map(|r| r.emotion.to_string()).collect())?
        .with_numeric("amplitude_mean", col(|r| r.amplitude_mean))?
        .with_numeric("duration_samples", col(|r| r.duration_samples as f64))?
        .with_numeric("duration_s", col(|r| r.duration_s))?
        .with_numeric("db1", col(|r| r.approx_means[0]))?
        .with_numeric("db2", col(|r| r.approx_means[1]))?
        .with_numeric("db3", col(|r| r.approx_means[2]))?
        .with_numeric("db4", col(|r| r.approx_means[3]))
}
