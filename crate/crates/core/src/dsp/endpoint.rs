use serde::{Deserialize, Serialize};

use super::{DspError, Result};
use crate::corpus::AudioClip;

/// Short-time-energy endpointer settings. Durations are in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndpointConfig {
    pub frame_len: f64,
    pub hop: f64,
    /// Frame energy threshold as a fraction of the loudest frame's energy.
    pub rel_threshold: f64,
    /// Consecutive above-threshold frames needed to declare an onset.
    pub min_onset_frames: usize,
    /// Frames appended after the last above-threshold frame.
    pub hangover_frames: usize,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        Self {
            frame_len: 0.025,
            hop: 0.010,
            rel_threshold: 0.01,
            min_onset_frames: 3,
            hangover_frames: 5,
        }
    }
}

impl EndpointConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.hop > 0.0
            && self.frame_len >= self.hop
            && self.frame_len.is_finite()
            && self.rel_threshold > 0.0
            && self.rel_threshold < 1.0
            && self.min_onset_frames >= 1
            && self.hangover_frames >= 1;
        if ok {
            Ok(())
        } else {
            Err(DspError::InvalidConfig(format!("{self:?}")))
        }
    }

    /// Frame length and hop in samples at `rate`.
    pub fn frame_samples(&self, rate: u32) -> (usize, usize) {
        let to = |s: f64| ((s * f64::from(rate)).round() as usize).max(1);
        (to(self.frame_len), to(self.hop))
    }
}

/// Half-open sample range `[start, end)` of the detected utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endpoints {
    pub start: usize,
    pub end: usize,
}

impl Endpoints {
    pub fn new(start: usize, end: usize, clip_len: usize) -> Result<Self> {
        if start < end && end <= clip_len {
            Ok(Self { start, end })
        } else {
            Err(DspError::InvalidEndpoints { start, end, clip_len })
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Locates the utterance by thresholding frame energies relative to the peak frame.
///
/// The start is the first sample of the first run of `min_onset_frames`
/// above-threshold frames; the end is one past the last sample of the last
/// above-threshold frame, extended by `hangover_frames` hops and clamped to the clip.
pub fn detect_endpoints(clip: &AudioClip, cfg: &EndpointConfig) -> Result<Endpoints> {
    cfg.validate()?;
    let x = clip.samples();
    let (frame, hop) = cfg.frame_samples(clip.sample_rate());
    if x.len() < frame {
        return Err(DspError::TooShort {
            samples: x.len(),
            frame,
        });
    }
    let n_frames = (x.len() - frame) / hop + 1;
    let energy: Vec<f64> = (0..n_frames)
        .map(|i| x[i * hop..i * hop + frame].iter().map(|v| v * v).sum())
        .collect();
    let peak = energy.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(DspError::NoSpeech);
    }
    let threshold = cfg.rel_threshold * peak;
    let above: Vec<bool> = energy.iter().map(|&e| e > threshold).collect();
    let run = cfg.min_onset_frames;
    let onset = above
        .windows(run.min(n_frames))
        .position(|w| w.len() == run && w.iter().all(|&a| a))
        .ok_or(DspError::NoSpeech)?;
    let last = above.iter().rposition(|&a| a).expect("onset frame is above threshold");
    let end = (last * hop + frame + cfg.hangover_frames * hop).min(x.len());
    Endpoints::new(onset * hop, end, x.len())
}

/// Utterance length in samples and seconds.
pub fn duration_feature(ep: &Endpoints, sample_rate: u32) -> (usize, f64) {
    let n = ep.len();
    (n, n as f64 / f64::from(sample_rate))
}

/// Mean absolute amplitude over the endpointed region.
pub fn amplitude_feature(clip: &AudioClip, ep: &Endpoints) -> f64 {
    let seg = &clip.samples()[ep.start..ep.end];
    seg.iter().map(|v| v.abs()).sum::<f64>() / seg.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clip(samples: Vec<f64>) -> AudioClip {
        AudioClip::new(samples, 16000).unwrap()
    }

    fn burst_clip(len: usize, start: usize, end: usize, amp: f64) -> AudioClip {
        clip((0..len)
            .map(|i| {
                if (start..end).contains(&i) {
                    amp * (i as f64 * 0.3).sin()
                } else {
                    0.0
                }
            })
            .collect())
    }

    #[test]
    fn silence_has_no_speech() {
        let c = clip(vec![0.0; 16000]);
        assert!(matches!(
            detect_endpoints(&c, &EndpointConfig::default()),
            Err(DspError::NoSpeech)
        ));
    }

    #[test]
    fn too_short() {
        let c = clip(vec![0.5; 100]);
        assert!(matches!(
            detect_endpoints(&c, &EndpointConfig::default()),
            Err(DspError::TooShort { .. })
        ));
    }

    #[test]
    fn full_clip_burst() {
        let c = burst_clip(8000, 0, 8000, 0.5);
        let ep = detect_endpoints(&c, &EndpointConfig::default()).unwrap();
        assert_eq!((ep.start, ep.end), (0, 8000));
    }

    #[test]
    fn isolated_click_is_not_an_onset() {
        // A short click covered by only two frames, then a sustained burst.
        let mut s = vec![0.0; 32000];
        for v in &mut s[1105..1115] {
            *v = 0.9;
        }
        for (i, v) in s[10000..20000].iter_mut().enumerate() {
            *v = 0.5 * (i as f64 * 0.2).sin();
        }
        let ep = detect_endpoints(&clip(s), &EndpointConfig::default()).unwrap();
        assert!(ep.start >= 9600 && ep.start <= 10000, "{ep:?}");
    }

    #[test]
    fn durations() {
        let ep = Endpoints::new(0, 16000, 16000).unwrap();
        assert_eq!(duration_feature(&ep, 16000), (16000, 1.0));
        let ep = Endpoints::new(8000, 16000, 16000).unwrap();
        assert_eq!(duration_feature(&ep, 16000), (8000, 0.5));
        assert!(Endpoints::new(5, 5, 10).is_err());
        assert!(Endpoints::new(0, 11, 10).is_err());
    }

    #[test]
    fn amplitude_constant_and_sine() {
        let c = clip(vec![0.25; 1000]);
        let ep = Endpoints::new(100, 900, 1000).unwrap();
        assert!((amplitude_feature(&c, &ep) - 0.25).abs() < 1e-15);
        // 200 full periods of a 0.8-amplitude sine, 80 samples per period.
        let n = 16000;
        let c = clip((0..n)
            .map(|i| 0.8 * (2.0 * std::f64::consts::PI * i as f64 / 80.0).sin())
            .collect());
        let ep = Endpoints::new(0, n, n).unwrap();
        let want = 2.0 * 0.8 / std::f64::consts::PI;
        assert!((amplitude_feature(&c, &ep) - want).abs() < 1e-3);
    }

    #[test]
    fn config_validation() {
        let bad = [
            EndpointConfig { hop: 0.0, ..Default::default() },
            EndpointConfig { frame_len: 0.005, ..Default::default() },
            EndpointConfig { rel_threshold: 1.0, ..Default::default() },
            EndpointConfig { min_onset_frames: 0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn gain_invariance(
            start in 0usize..12000,
            len in 2000usize..12000,
            exp in -6i32..=0,
        ) {
            let c = burst_clip(32000, start, (start + len).min(32000), 0.9);
            let gain = 2f64.powi(exp);
            let scaled = clip(c.samples().iter().map(|v| v * gain).collect());
            let cfg = EndpointConfig::default();
            let a = detect_endpoints(&c, &cfg).unwrap();
            let b = detect_endpoints(&scaled, &cfg).unwrap();
            prop_assert_eq!(a, b);
            let ra = amplitude_feature(&c, &a);
            prop_assert!((amplitude_feature(&scaled, &b) - gain * ra).abs() <= 1e-15 * ra.max(1.0));
        }
    }
}
