use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use super::{CorpusError, Emotion, Result, UtteranceRecord};

pub const MANIFEST_HEADER: [&str; 5] = ["path", "subject_id", "gender", "word", "emotion"];

/// The dataset description: a root directory and the utterances under it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusManifest {
    pub root: PathBuf,
    pub records: Vec<UtteranceRecord>,
}

impl CorpusManifest {
    /// Absolute (root-joined) location of a record's WAV file.
    pub fn resolve(&self, record: &UtteranceRecord) -> PathBuf {
        self.root.join(&record.path)
    }

    pub fn subjects(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.subject_id.as_str()).collect()
    }

    pub fn words(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.word.as_str()).collect()
    }

    pub fn emotions(&self) -> BTreeSet<Emotion> {
        self.records.iter().map(|r| r.emotion).collect()
    }

    /// Rejects repeated (subject, word, emotion) triples.
    pub fn check_unique(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.records.len());
        for r in &self.records {
            if !seen.insert((r.subject_id.as_str(), r.word.as_str(), r.emotion)) {
                return Err(CorpusError::DuplicateRecord {
                    subject: r.subject_id.clone(),
                    word: r.word.clone(),
                    emotion: r.emotion,
                });
            }
        }
        Ok(())
    }

    /// Full-factorial check: subjects x words x emotions must equal the record count.
    pub fn check_shape(&self) -> Result<()> {
        let (subjects, words, emotions) =
            (self.subjects().len(), self.words().len(), self.emotions().len());
        let expected = subjects * words * emotions;
        if expected != self.records.len() {
            return Err(CorpusError::ShapeMismatch {
                subjects,
                words,
                emotions,
                expected,
                records: self.records.len(),
            });
        }
        Ok(())
    }
}

pub fn load_manifest(path: impl AsRef<Path>, strict_shape: bool) -> Result<CorpusManifest> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(CorpusError::NotFound(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CorpusError::Parse(e.to_string()))?;
    let header = reader
        .headers()
        .map_err(|e| CorpusError::Parse(e.to_string()))?
        .clone();
    if header.iter().ne(MANIFEST_HEADER.iter().copied()) {
        return Err(CorpusError::Parse(format!(
            "manifest header must be '{}', found '{}'",
            MANIFEST_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| CorpusError::Parse(format!("line {line}: {e}")))?;
        if row.len() != MANIFEST_HEADER.len() || row.iter().any(str::is_empty) {
            return Err(CorpusError::Parse(format!("line {line}: malformed row")));
        }
        let field_err = |e: CorpusError| CorpusError::Parse(format!("line {line}: {e}"));
        records.push(UtteranceRecord {
            path: PathBuf::from(&row[0]),
            subject_id: row[1].to_string(),
            gender: row[2].parse().map_err(field_err)?,
            word: row[3].to_string(),
            emotion: row[4].parse().map_err(field_err)?,
        });
    }
    if records.is_empty() {
        return Err(CorpusError::Parse("manifest has no records".into()));
    }
    let manifest = CorpusManifest {
        root: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        records,
    };
    manifest.check_unique()?;
    if strict_shape {
        manifest.check_shape()?;
    }
    Ok(manifest)
}

/// Writes `manifest.records` as CSV. Paths are written as stored (relative to the root).
pub fn write_manifest(manifest: &CorpusManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e: csv::Error| CorpusError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(MANIFEST_HEADER).map_err(io)?;
    for r in &manifest.records {
        let p = r.path.to_string_lossy().replace('\\', "/");
        w.write_record([
            p.as_str(),
            &r.subject_id,
            r.gender.as_str(),
            &r.word,
            r.emotion.as_str(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}
