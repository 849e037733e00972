//! Corpus handling: utterance manifests, 16-bit PCM WAV I/O, DES questionnaire
//! validation and the synthetic corpus generator.

mod des;
mod manifest;
mod synth;
mod wav;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use des::{
    des_validate, des_validate_per_subject, read_des_csv, targeted_score_index, DesPhase,
    DesRecord, ValidationVerdict, DES_EMOTIONS,
};
pub use manifest::{load_manifest, write_manifest, CorpusManifest, MANIFEST_HEADER};
pub use synth::{
    planned_burst_lengths, render_utterance, synth_corpus, AmplitudeModel, DurationModel,
    SignalModel, SynthConfig, WORD_LIST,
};
pub use wav::{read_wav, write_wav};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("file not found: {0}")]
    NotFound(PathBuf),
    #[error("unsupported WAV format in {path}: {reason}")]
    BadFormat { path: PathBuf, reason: String },
    #[error("WAV file {0} contains no samples")]
    Empty(PathBuf),
    #[error("invalid audio clip: {0}")]
    InvalidClip(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("duplicate record for subject {subject}, word {word}, emotion {emotion}")]
    DuplicateRecord {
        subject: String,
        word: String,
        emotion: Emotion,
    },
    #[error(
        "manifest shape mismatch: {subjects} subjects x {words} words x {emotions} emotions \
         = {expected}, but {records} records"
    )]
    ShapeMismatch {
        subjects: usize,
        words: usize,
        emotions: usize,
        expected: usize,
        records: usize,
    },
    #[error("DES subject mismatch: {0}")]
    SubjectMismatch(String),
    #[error("DES group has fewer than 2 observations: {0}")]
    DegenerateGroups(String),
    #[error("bad synthesis config: {0}")]
    BadConfig(String),
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gender {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "male" => Ok(Gender::Male),
            "female" => Ok(Gender::Female),
            other => Err(CorpusError::Parse(format!("unknown gender '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emotion {
    Happy,
    Neutral,
    Sad,
}

impl Emotion {
    pub const ALL: [Emotion; 3] = [Emotion::Happy, Emotion::Neutral, Emotion::Sad];

    pub fn as_str(self) -> &'static str {
        match self {
            Emotion::Happy => "happy",
            Emotion::Neutral => "neutral",
            Emotion::Sad => "sad",
        }
    }

    /// Happy and sad speech form the "emotional" class; neutral is "non-emotional".
    pub fn is_emotional(self) -> bool {
        !matches!(self, Emotion::Neutral)
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Emotion {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "happy" => Ok(Emotion::Happy),
            "neutral" => Ok(Emotion::Neutral),
            "sad" => Ok(Emotion::Sad),
            other => Err(CorpusError::Parse(format!("unknown emotion '{other}'"))),
        }
    }
}

/// Mono sample buffer normalized to [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(CorpusError::InvalidClip("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(CorpusError::InvalidClip("clip has no samples".into()));
        }
        if let Some((i, s)) = samples
            .iter()
            .enumerate()
            .find(|(_, s)| !(-1.0..=1.0).contains(*s))
        {
            return Err(CorpusError::InvalidClip(format!(
                "sample {i} = {s} outside [-1, 1]"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// One labeled utterance of the corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub path: PathBuf,
    pub subject_id: String,
    pub gender: Gender,
    pub word: String,
    pub emotion: Emotion,
}
