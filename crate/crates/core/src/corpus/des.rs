//! Differential Emotions Scale (DES) questionnaire validation.
//!
//! Each participant fills the 16-item questionnaire before (`pre`) and after (`post`)
//! the elicitation of a targeted emotion. A session is valid when the targeted score
//! changed between phases and the post targeted score stands apart from the other
//! fifteen post scores, both by one-way ANOVA at level `alpha`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Emotion, Result};
use crate::stats::anova_oneway;

/// The sixteen DES items, in questionnaire (column) order.
pub const DES_EMOTIONS: [&str; 16] = [
    "surprise",
    "anger",
    "anxiety",
    "calm",
    "confusion",
    "contempt",
    "disgust",
    "embarrassment",
    "enthusiasm",
    "fear",
    "shame",
    "happiness",
    "interest",
    "love",
    "pride",
    "sadness",
];

/// DES item scored for a targeted emotion. Neutral elicitation targets "calm".
pub fn targeted_score_index(emotion: Emotion) -> usize {
    match emotion {
        Emotion::Happy => 11,
        Emotion::Neutral => 3,
        Emotion::Sad => 15,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesPhase {
    Pre,
    Post,
}

impl FromStr for DesPhase {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pre" => Ok(DesPhase::Pre),
            "post" => Ok(DesPhase::Post),
            other => Err(CorpusError::Parse(format!("unknown DES phase '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesRecord {
    pub subject_id: String,
    pub phase: DesPhase,
    pub targeted_emotion: Emotion,
    pub scores: [u8; 16],
}

impl DesRecord {
    pub fn new(
        subject_id: impl Into<String>,
        phase: DesPhase,
        targeted_emotion: Emotion,
        scores: [u8; 16],
    ) -> Result<Self> {
        if let Some(bad) = scores.iter().find(|s| !(1..=5).contains(*s)) {
            return Err(CorpusError::Parse(format!("DES score {bad} outside 1..=5")));
        }
        Ok(Self {
            subject_id: subject_id.into(),
            phase,
            targeted_emotion,
            scores,
        })
    }

    fn targeted(&self) -> f64 {
        f64::from(self.scores[targeted_score_index(self.targeted_emotion)])
    }

    fn non_targeted(&self) -> impl Iterator<Item = f64> + '_ {
        let t = targeted_score_index(self.targeted_emotion);
        self.scores
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != t)
            .map(|(_, &s)| f64::from(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationVerdict {
    pub condition1_f: f64,
    pub condition1_p: f64,
    pub condition2_f: f64,
    pub condition2_p: f64,
    pub alpha: f64,
    pub valid: bool,
}

impl ValidationVerdict {
    fn new(c1: (f64, f64), c2: (f64, f64), alpha: f64) -> Self {
        Self {
            condition1_f: c1.0,
            condition1_p: c1.1,
            condition2_f: c2.0,
            condition2_p: c2.1,
            alpha,
            valid: c1.1 <= alpha && c2.1 <= alpha,
        }
    }
}

fn check_phase(records: &[DesRecord], phase: DesPhase) -> Result<()> {
    match records.iter().find(|r| r.phase != phase) {
        Some(r) => Err(CorpusError::Parse(format!(
            "record for subject {} has phase {:?} in the {:?} list",
            r.subject_id, r.phase, phase
        ))),
        None => Ok(()),
    }
}

fn anova(groups: &[Vec<f64>], what: &str) -> Result<(f64, f64)> {
    if let Some(g) = groups.iter().find(|g| g.len() < 2) {
        return Err(CorpusError::DegenerateGroups(format!(
            "{what}: group of {} observation(s)",
            g.len()
        )));
    }
    let t = anova_oneway(groups).map_err(|e| CorpusError::DegenerateGroups(e.to_string()))?;
    Ok((t.statistic, t.p_value))
}

/// Pooled validation across participants for one targeted emotion.
///
/// Records of other targeted emotions are ignored. Condition 1 compares the
/// targeted score pre vs. post; condition 2 compares post targeted scores with
/// the pooled post scores of the fifteen non-targeted items.
pub fn des_validate(
    pre: &[DesRecord],
    post: &[DesRecord],
    targeted: Emotion,
    alpha: f64,
) -> Result<ValidationVerdict> {
    check_phase(pre, DesPhase::Pre)?;
    check_phase(post, DesPhase::Post)?;
    let pre: Vec<_> = pre.iter().filter(|r| r.targeted_emotion == targeted).collect();
    let post: Vec<_> = post.iter().filter(|r| r.targeted_emotion == targeted).collect();
    let subjects = |rs: &[&DesRecord]| -> Result<BTreeSet<String>> {
        let mut set = BTreeSet::new();
        for r in rs {
            if !set.insert(r.subject_id.clone()) {
                return Err(CorpusError::SubjectMismatch(format!(
                    "subject {} appears twice for {targeted}",
                    r.subject_id
                )));
            }
        }
        Ok(set)
    };
    let (s_pre, s_post) = (subjects(&pre)?, subjects(&post)?);
    if s_pre != s_post {
        let missing: Vec<_> = s_pre.symmetric_difference(&s_post).cloned().collect();
        return Err(CorpusError::SubjectMismatch(format!(
            "subjects not present in both phases: {}",
            missing.join(", ")
        )));
    }
    let pre_t: Vec<f64> = pre.iter().map(|r| r.targeted()).collect();
    let post_t: Vec<f64> = post.iter().map(|r| r.targeted()).collect();
    let post_other: Vec<f64> = post.iter().flat_map(|r| r.non_targeted()).collect();
    let c1 = anova(&[pre_t, post_t.clone()], "condition 1")?;
    let c2 = anova(&[post_t, post_other], "condition 2")?;
    Ok(ValidationVerdict::new(c1, c2, alpha))
}

/// Per-participant validation: each subject's sessions (one per targeted emotion)
/// form the groups, so a subject needs at least two sessions.
pub fn des_validate_per_subject(
    pre: &[DesRecord],
    post: &[DesRecord],
    alpha: f64,
) -> Result<BTreeMap<String, ValidationVerdict>> {
    check_phase(pre, DesPhase::Pre)?;
    check_phase(post, DesPhase::Post)?;
    let key = |r: &DesRecord| (r.subject_id.clone(), r.targeted_emotion);
    let pre_keys: BTreeSet<_> = pre.iter().map(key).collect();
    let post_keys: BTreeSet<_> = post.iter().map(key).collect();
    if pre_keys.len() != pre.len() || post_keys.len() != post.len() {
        return Err(CorpusError::SubjectMismatch(
            "a subject has two records for the same phase and targeted emotion".into(),
        ));
    }
    if pre_keys != post_keys {
        let diff: Vec<_> = pre_keys
            .symmetric_difference(&post_keys)
            .map(|(s, e)| format!("{s}/{e}"))
            .collect();
        return Err(CorpusError::SubjectMismatch(format!(
            "sessions not present in both phases: {}",
            diff.join(", ")
        )));
    }
    let subjects: BTreeSet<&str> = pre.iter().map(|r| r.subject_id.as_str()).collect();
    let mut out = BTreeMap::new();
    for s in subjects {
        let pre_t: Vec<f64> = pre
            .iter()
            .filter(|r| r.subject_id == s)
            .map(DesRecord::targeted)
            .collect();
        let post_s: Vec<&DesRecord> = post.iter().filter(|r| r.subject_id == s).collect();
        let post_t: Vec<f64> = post_s.iter().map(|r| r.targeted()).collect();
        let post_other: Vec<f64> = post_s.iter().flat_map(|r| r.non_targeted()).collect();
        let c1 = anova(&[pre_t, post_t.clone()], s)?;
        let c2 = anova(&[post_t, post_other], s)?;
        out.insert(s.to_string(), ValidationVerdict::new(c1, c2, alpha));
    }
    Ok(out)
}

/// Reads a DES CSV with header `subject_id,phase,targeted_emotion,s01..s16`.
pub fn read_des_csv(path: impl AsRef<Path>) -> Result<Vec<DesRecord>> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(CorpusError::NotFound(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CorpusError::Parse(e.to_string()))?;
    let expected: Vec<String> = ["subject_id", "phase", "targeted_emotion"]
        .iter()
        .map(|s| s.to_string())
        .chain((1..=16).map(|i| format!("s{i:02}")))
        .collect();
    let header = reader
        .headers()
        .map_err(|e| CorpusError::Parse(e.to_string()))?;
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(CorpusError::Parse(format!(
            "DES header must be '{}'",
            expected.join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| CorpusError::Parse(format!("line {line}: {e}")))?;
        let ctx = |e: CorpusError| CorpusError::Parse(format!("line {line}: {e}"));
        let mut scores = [0u8; 16];
        for (k, s) in scores.iter_mut().enumerate() {
            *s = row[3 + k]
                .parse()
                .map_err(|_| CorpusError::Parse(format!("line {line}: bad score '{}'", &row[3 + k])))?;
        }
        out.push(
            DesRecord::new(
                &row[0],
                row[1].parse().map_err(ctx)?,
                row[2].parse().map_err(ctx)?,
                scores,
            )
            .map_err(ctx)?,
        );
    }
    Ok(out)
}
