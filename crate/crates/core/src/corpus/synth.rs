//! Deterministic synthetic corpus generator.
//!
//! Every utterance is silence, then a burst of amplitude-modulated band-limited
//! noise, then silence. Burst lengths follow a linear model with emotion and
//! gender offsets plus Gaussian subject, word and residual terms; burst levels
//! follow a log-normal model with no emotion effect.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    write_manifest, write_wav, AudioClip, CorpusError, CorpusManifest, Emotion, Gender, Result,
    UtteranceRecord,
};

/// The thirty corpus words, in table order.
pub const WORD_LIST: [&str; 30] = [
    "perut", "kamera", "tangan", "mobil", "darat", "momen", "permen", "waktu", "batik", "hujan",
    "rumah", "negara", "akris", "ikan", "baja", "kelapa", "album", "surat", "kabin", "pasar",
    "calon", "garam", "motor", "payung", "soda", "swasta", "warga", "eksport", "acara", "daerah",
];

/// Utterance duration model, in samples at the corpus rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DurationModel {
    /// Mean duration of happy speech (the reference level).
    pub intercept: f64,
    pub neutral_offset: f64,
    pub sad_offset: f64,
    pub male_offset: f64,
    pub female_offset: f64,
    pub subject_sd: f64,
    pub word_sd: f64,
    pub residual_sd: f64,
    /// Subtracted from each drawn duration to get the burst length, so that the
    /// span reported by the default endpointer (which extends past the burst by
    /// roughly this much) follows the model.
    pub endpoint_padding: f64,
    /// Shortest burst ever generated.
    pub min_burst: f64,
}

impl Default for DurationModel {
    fn default() -> Self {
        Self {
            intercept: 9331.8,
            neutral_offset: -282.0,
            sad_offset: 32.5,
            male_offset: -1440.0,
            female_offset: 1440.0,
            subject_sd: 150.0,
            word_sd: 0.0,
            residual_sd: 200.0,
            endpoint_padding: 1213.0,
            min_burst: 1600.0,
        }
    }
}

impl DurationModel {
    /// Expected (noise-free) duration for a cell of the design.
    pub fn mean(&self, emotion: Emotion, gender: Gender) -> f64 {
        let e = match emotion {
            Emotion::Happy => 0.0,
            Emotion::Neutral => self.neutral_offset,
            Emotion::Sad => self.sad_offset,
        };
        let g = match gender {
            Gender::Male => self.male_offset,
            Gender::Female => self.female_offset,
        };
        self.intercept + e + g
    }
}

/// Burst level model: log-normal around `level` (peak envelope, RMS-normalized noise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmplitudeModel {
    pub level: f64,
    pub subject_log_sd: f64,
    pub utterance_log_sd: f64,
}

impl Default for AmplitudeModel {
    fn default() -> Self {
        Self {
            level: 0.12,
            subject_log_sd: 0.2,
            utterance_log_sd: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalModel {
    pub lead_silence_s: f64,
    pub tail_silence_s: f64,
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub ramp_s: f64,
    pub am_rate_hz: f64,
    pub am_depth: f64,
}

impl Default for SignalModel {
    fn default() -> Self {
        Self {
            lead_silence_s: 0.25,
            tail_silence_s: 0.25,
            band_low_hz: 200.0,
            band_high_hz: 3400.0,
            ramp_s: 0.010,
            am_rate_hz: 4.0,
            am_depth: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub subjects: usize,
    pub words: usize,
    pub sample_rate: u32,
    pub duration: DurationModel,
    pub amplitude: AmplitudeModel,
    pub signal: SignalModel,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            subjects: 38,
            words: 30,
            sample_rate: 16000,
            duration: DurationModel::default(),
            amplitude: AmplitudeModel::default(),
            signal: SignalModel::default(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CorpusError::BadConfig(m.to_string()));
        if self.subjects == 0 {
            return bad("subjects must be positive");
        }
        if self.words == 0 {
            return bad("words must be positive");
        }
        if self.sample_rate == 0 {
            return bad("sample_rate must be positive");
        }
        let d = &self.duration;
        for (name, v) in [
            ("duration.subject_sd", d.subject_sd),
            ("duration.word_sd", d.word_sd),
            ("duration.residual_sd", d.residual_sd),
            ("amplitude.subject_log_sd", self.amplitude.subject_log_sd),
            ("amplitude.utterance_log_sd", self.amplitude.utterance_log_sd),
            ("signal.lead_silence_s", self.signal.lead_silence_s),
            ("signal.tail_silence_s", self.signal.tail_silence_s),
            ("signal.ramp_s", self.signal.ramp_s),
            ("signal.am_rate_hz", self.signal.am_rate_hz),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CorpusError::BadConfig(format!(
                    "{name} must be a finite non-negative number, got {v}"
                )));
            }
        }
        if !(d.min_burst >= 1.0) || !d.intercept.is_finite() {
            return bad("duration.min_burst must be >= 1 and intercept finite");
        }
        if !(self.amplitude.level > 0.0 && self.amplitude.level < 1.0) {
            return bad("amplitude.level must lie in (0, 1)");
        }
        if !(0.0..1.0).contains(&self.signal.am_depth) {
            return bad("signal.am_depth must lie in [0, 1)");
        }
        let nyquist = f64::from(self.sample_rate) / 2.0;
        let s = &self.signal;
        if !(s.band_low_hz > 0.0 && s.band_low_hz < s.band_high_hz && s.band_high_hz < nyquist) {
            return bad("signal band must satisfy 0 < band_low_hz < band_high_hz < sample_rate/2");
        }
        Ok(())
    }

    fn word_names(&self) -> Vec<String> {
        (0..self.words)
            .map(|i| match WORD_LIST.get(i) {
                Some(w) => w.to_string(),
                None => format!("word{:02}", i + 1),
            })
            .collect()
    }
}

/// Second-order section, transposed direct form II.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    fn butterworth(cutoff: f64, rate: f64, highpass: bool) -> Self {
        let w0 = 2.0 * PI * cutoff / rate;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * std::f64::consts::FRAC_1_SQRT_2);
        let a0 = 1.0 + alpha;
        let b = if highpass {
            [(1.0 + cos) / 2.0, -(1.0 + cos), (1.0 + cos) / 2.0]
        } else {
            [(1.0 - cos) / 2.0, 1.0 - cos, (1.0 - cos) / 2.0]
        };
        Self {
            b: [b[0] / a0, b[1] / a0, b[2] / a0],
            a: [-2.0 * cos / a0, (1.0 - alpha) / a0],
        }
    }

    fn run(&self, x: &mut [f64]) {
        let (mut z1, mut z2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let y = self.b[0] * *v + z1;
            z1 = self.b[1] * *v - self.a[0] * y + z2;
            z2 = self.b[2] * *v - self.a[1] * y;
            *v = y;
        }
    }
}

const FILTER_WARMUP: usize = 1024;

fn burst(cfg: &SynthConfig, len: usize, level: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let rate = f64::from(cfg.sample_rate);
    let s = &cfg.signal;
    let mut x: Vec<f64> = (0..len + FILTER_WARMUP)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    for (f, hp) in [(s.band_low_hz, true), (s.band_high_hz, false)] {
        let q = Biquad::butterworth(f, rate, hp);
        q.run(&mut x);
        q.run(&mut x);
    }
    let mut x = x.split_off(FILTER_WARMUP);
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / len as f64).sqrt();
    let ramp = ((s.ramp_s * rate).round() as usize).min(len / 2);
    let phase = rng.gen::<f64>() * 2.0 * PI;
    let omega = 2.0 * PI * s.am_rate_hz / rate;
    for (i, v) in x.iter_mut().enumerate() {
        let am = (1.0 + s.am_depth * (omega * i as f64 + phase).sin()) / (1.0 + s.am_depth);
        let edge = i.min(len - 1 - i);
        let r = if edge < ramp {
            0.5 * (1.0 - (PI * (edge as f64 + 0.5) / ramp as f64).cos())
        } else {
            1.0
        };
        *v = (level * am * r * *v / rms).clamp(-1.0, 1.0);
    }
    x
}

fn record_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Deterministic description of one generated utterance.
#[derive(Debug, Clone)]
struct Plan {
    record: UtteranceRecord,
    burst_len: usize,
    level: f64,
    rng: ChaCha8Rng,
}

fn plan(cfg: &SynthConfig, seed: u64) -> Vec<Plan> {
    let d = &cfg.duration;
    let a = &cfg.amplitude;
    let mut rng = record_rng(seed, 0);
    let normal = |sd: f64| Normal::new(0.0, sd).expect("validated sd");
    let subj_dur: Vec<f64> = (0..cfg.subjects).map(|_| normal(d.subject_sd).sample(&mut rng)).collect();
    let subj_amp: Vec<f64> = (0..cfg.subjects)
        .map(|_| normal(a.subject_log_sd).sample(&mut rng))
        .collect();
    let word_dur: Vec<f64> = (0..cfg.words).map(|_| normal(d.word_sd).sample(&mut rng)).collect();
    let words = cfg.word_names();
    let width = cfg.subjects.to_string().len().max(2);
    let mut out = Vec::with_capacity(cfg.subjects * cfg.words * 3);
    for s in 0..cfg.subjects {
        let subject_id = format!("S{:0width$}", s + 1);
        let gender = if s % 2 == 0 { Gender::Male } else { Gender::Female };
        for (w, word) in words.iter().enumerate() {
            for emotion in Emotion::ALL {
                let stream = 1 + out.len() as u64;
                let mut r = record_rng(seed, stream);
                let dur = d.mean(emotion, gender)
                    + subj_dur[s]
                    + word_dur[w]
                    + normal(d.residual_sd).sample(&mut r);
                let burst_len = (dur - d.endpoint_padding).max(d.min_burst).round() as usize;
                let level = (a.level.ln() + subj_amp[s] + normal(a.utterance_log_sd).sample(&mut r))
                    .exp()
                    .min(0.9);
                let path = PathBuf::from("wav")
                    .join(&subject_id)
                    .join(format!("{subject_id}_{word}_{emotion}.wav"));
                out.push(Plan {
                    record: UtteranceRecord {
                        path,
                        subject_id: subject_id.clone(),
                        gender,
                        word: word.clone(),
                        emotion,
                    },
                    burst_len,
                    level,
                    rng: r,
                });
            }
        }
    }
    out
}

fn render(cfg: &SynthConfig, p: &Plan) -> AudioClip {
    let rate = f64::from(cfg.sample_rate);
    let lead = (cfg.signal.lead_silence_s * rate).round() as usize;
    let tail = (cfg.signal.tail_silence_s * rate).round() as usize;
    let mut rng = p.rng.clone();
    let mut samples = vec![0.0; lead];
    samples.extend(burst(cfg, p.burst_len, p.level, &mut rng));
    samples.resize(samples.len() + tail, 0.0);
    AudioClip::new(samples, cfg.sample_rate).expect("clamped samples")
}

/// Generates the corpus under `out_dir` (`manifest.csv` plus `wav/<subject>/*.wav`).
pub fn synth_corpus(cfg: &SynthConfig, seed: u64, out_dir: impl AsRef<Path>) -> Result<CorpusManifest> {
    cfg.validate()?;
    let root = out_dir.as_ref();
    let plans = plan(cfg, seed);
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CorpusError::Io { path, source }
    };
    for p in &plans {
        let dir = root.join(&p.record.path);
        let dir = dir.parent().expect("record path has a parent");
        std::fs::create_dir_all(dir).map_err(io(dir))?;
    }
    plans
        .par_iter()
        .try_for_each(|p| write_wav(&render(cfg, p), root.join(&p.record.path)))?;
    let manifest = CorpusManifest {
        root: root.to_path_buf(),
        records: plans.into_iter().map(|p| p.record).collect(),
    };
    write_manifest(&manifest, root.join("manifest.csv"))?;
    Ok(manifest)
}

/// Burst lengths the generator would use, in manifest order. Exposed for calibration checks.
pub fn planned_burst_lengths(cfg: &SynthConfig, seed: u64) -> Result<Vec<usize>> {
    cfg.validate()?;
    Ok(plan(cfg, seed).into_iter().map(|p| p.burst_len).collect())
}

/// Renders a single utterance in memory without touching the filesystem.
pub fn render_utterance(cfg: &SynthConfig, seed: u64, index: usize) -> Result<(UtteranceRecord, AudioClip)> {
    cfg.validate()?;
    let plans = plan(cfg, seed);
    let p = plans
        .get(index)
        .ok_or_else(|| CorpusError::BadConfig(format!("utterance index {index} out of range")))?;
    Ok((p.record.clone(), render(cfg, p)))
}
