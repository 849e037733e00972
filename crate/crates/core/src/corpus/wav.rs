use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{AudioClip, CorpusError, Result};

/// Reads a 16-bit PCM mono WAV file. Integer samples are divided by 32768.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(CorpusError::NotFound(path.to_path_buf()));
    }
    let bad = |reason: String| CorpusError::BadFormat {
        path: path.to_path_buf(),
        reason,
    };
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(source) => CorpusError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => bad(other.to_string()),
    })?;
    let spec = reader.spec();
    if spec.sample_format != SampleFormat::Int {
        return Err(bad("not integer PCM".into()));
    }
    if spec.bits_per_sample != 16 {
        return Err(bad(format!("{} bits per sample, expected 16", spec.bits_per_sample)));
    }
    if spec.channels != 1 {
        return Err(bad(format!("{} channels, expected mono", spec.channels)));
    }
    if spec.sample_rate == 0 {
        return Err(bad("zero sample rate".into()));
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| f64::from(v) / 32768.0))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| bad(e.to_string()))?;
    if samples.is_empty() {
        return Err(CorpusError::Empty(path.to_path_buf()));
    }
    AudioClip::new(samples, spec.sample_rate)
}

/// Writes `clip` as 16-bit PCM mono: clamp to [-1, 1], scale by 32767, round to nearest.
pub fn write_wav(clip: &AudioClip, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |e: hound::Error| match e {
        hound::Error::IoError(source) => CorpusError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CorpusError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(other.to_string()),
        },
    };
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(io_err)?;
    {
        let mut w = writer.get_i16_writer(clip.len() as u32);
        for &s in clip.samples() {
            w.write_sample(quantize(s));
        }
        w.flush().map_err(io_err)?;
    }
    writer.finalize().map_err(io_err)
}

pub(crate) fn quantize(s: f64) -> i16 {
    (s.clamp(-1.0, 1.0) * 32767.0).round() as i16
}
