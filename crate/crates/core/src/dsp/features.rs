use std::collections::VecDeque;

use log::trace;
use serde::{Deserialize, Serialize};

use super::spectrum::{alpha_subbands, band_power, Band, SpectrumAnalyzer, Taper};
use crate::error::{Error, Result};
use crate::label::{BrainState, FEATURE_DIM, NUM_BANDS, NUM_CHANNELS};
use crate::synth::RawChunk;

/// 20 band-power values, channel-major: `Fp1[d,t,a,b,g], Fp2[..], T3[..], T4[..]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub index: u64,
    pub values: [f64; FEATURE_DIM],
    pub truth: Option<BrainState>,
}

impl FeatureVector {
    pub fn get(&self, channel: usize, band: Band) -> f64 {
        self.values[channel * NUM_BANDS + band.index()]
    }

    pub fn channel(&self, channel: usize) -> &[f64] {
        &self.values[channel * NUM_BANDS..(channel + 1) * NUM_BANDS]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub rate: f64,
    pub win_len: usize,
    pub hop: usize,
    pub taper: Taper,
}

impl Default for FeatureConfig {
    /// 256-sample Hann window, hop 5 at 200 Hz: 40 frames per second.
    fn default() -> Self {
        Self { rate: 200.0, win_len: 256, hop: 5, taper: Taper::Hann }
    }
}

impl FeatureConfig {
    pub fn frame_rate(&self) -> f64 {
        self.rate / self.hop as f64
    }
}

/// Scales each channel's five band powers to sum to one. A channel with
/// no power at all maps to a flat `1/5` profile.
pub fn normalize_band_powers(powers: [[f64; NUM_CHANNELS]; NUM_BANDS]) -> [f64; FEATURE_DIM] {
    let mut out = [0.0; FEATURE_DIM];
    for c in 0..NUM_CHANNELS {
        let total: f64 = (0..NUM_BANDS).map(|b| powers[b][c]).sum();
        for b in 0..NUM_BANDS {
            out[c * NUM_BANDS + b] = if total > 0.0 { powers[b][c] / total } else { 1.0 / NUM_BANDS as f64 };
        }
    }
    out
}

/// Sliding-window feature extractor over a cleaned sample stream.
///
/// Frame `k` covers samples `[k * hop, k * hop + win_len)` of the stream,
/// and carries the truth label of its last sample.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    cfg: FeatureConfig,
    analyzer: SpectrumAnalyzer,
    buf: VecDeque<([f64; NUM_CHANNELS], Option<BrainState>)>,
    next_frame: u64,
}

impl FeatureExtractor {
    pub fn new(cfg: FeatureConfig) -> Result<Self> {
        if cfg.hop == 0 {
            return Err(Error::Config("hop must be at least 1".into()));
        }
        let analyzer = SpectrumAnalyzer::new(cfg.win_len, cfg.rate, cfg.taper)?;
        Ok(Self { cfg, analyzer, buf: VecDeque::with_capacity(cfg.win_len + cfg.hop), next_frame: 0 })
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.cfg
    }

    /// Index the next emitted frame will carry.
    pub fn next_frame_index(&self) -> u64 {
        self.next_frame
    }

    pub fn push_chunk(&mut self, chunk: &RawChunk) -> Result<Vec<FeatureVector>> {
        if chunk.rate != self.cfg.rate {
            return Err(Error::Config(format!(
                "chunk rate {} Hz does not match feature rate {} Hz",
                chunk.rate, self.cfg.rate
            )));
        }
        let mut out = Vec::new();
        for s in &chunk.samples {
            if let Some(fv) = self.push_sample(*s, Some(chunk.truth))? {
                out.push(fv);
            }
        }
        Ok(out)
    }

    pub fn push_sample(&mut self, s: [f64; NUM_CHANNELS], truth: Option<BrainState>) -> Result<Option<FeatureVector>> {
        self.buf.push_back((s, truth));
        if self.buf.len() < self.cfg.win_len {
            return Ok(None);
        }
        let spec = self.analyzer.analyze(self.buf.iter().map(|(s, _)| s))?;
        let powers: [[f64; NUM_CHANNELS]; NUM_BANDS] = Band::ALL.map(|b| band_power(&spec, b));
        trace!("frame {} alpha sub-bands {:?}", self.next_frame, alpha_subbands(&spec));
        let fv = FeatureVector {
            index: self.next_frame,
            values: normalize_band_powers(powers),
            truth: self.buf.back().and_then(|(_, t)| *t),
        };
        self.next_frame += 1;
        self.buf.drain(..self.cfg.hop.min(self.buf.len()));
        Ok(Some(fv))
    }
}

/// Batch form of [`FeatureExtractor`]. Streams shorter than one window
/// produce no frames.
pub fn extract_features(samples: &[[f64; NUM_CHANNELS]], cfg: FeatureConfig) -> Result<Vec<FeatureVector>> {
    let mut ex = FeatureExtractor::new(cfg)?;
    let mut out = Vec::new();
    for s in samples {
        if let Some(fv) = ex.push_sample(*s, None)? {
            out.push(fv);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusMetrics {
    pub relaxation: f64,
    pub concentration: f64,
}

/// Relaxation is the mean over channels of `alpha / (alpha + beta)`;
/// concentration is its complement. Channels with no alpha or beta power
/// are skipped, and if every channel is empty both metrics are 0.5.
pub fn focus_metrics(fv: &FeatureVector) -> FocusMetrics {
    let ratios: Vec<f64> = (0..NUM_CHANNELS)
        .filter_map(|c| {
            let (a, b) = (fv.get(c, Band::Alpha), fv.get(c, Band::Beta));
            (a + b > 0.0).then(|| a / (a + b))
        })
        .collect();
    if ratios.is_empty() {
        return FocusMetrics { relaxation: 0.5, concentration: 0.5 };
    }
    let relaxation = ratios.iter().sum::<f64>() / ratios.len() as f64;
    FocusMetrics { relaxation, concentration: 1.0 - relaxation }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn frame_from_channel(bands: [f64; NUM_BANDS]) -> FeatureVector {
        let mut values = [0.0; FEATURE_DIM];
        for c in 0..NUM_CHANNELS {
            values[c * NUM_BANDS..(c + 1) * NUM_BANDS].copy_from_slice(&bands);
        }
        FeatureVector { index: 0, values, truth: None }
    }

    fn noisy_stream(n: usize, seed: u64) -> Vec<[f64; NUM_CHANNELS]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| std::array::from_fn(|_| rng.random_range(-10.0..10.0))).collect()
    }

    #[test]
    fn pure_alpha_channel_maps_to_unit_alpha() {
        let samples: Vec<[f64; 4]> = (0..600)
            .map(|k| {
                let v = 5.0 * (TAU * 10.0 * k as f64 / 200.0).sin();
                [v, v, v, v]
            })
            .collect();
        let frames = extract_features(&samples, FeatureConfig::default()).unwrap();
        assert!(!frames.is_empty());
        for f in &frames {
            let alpha = f.channel(0);
            assert!(alpha[2] > 0.95, "{alpha:?}");
        }
    }

    #[test]
    fn every_channel_sums_to_one() {
        let frames = extract_features(&noisy_stream(800, 1), FeatureConfig::default()).unwrap();
        for f in &frames {
            for c in 0..NUM_CHANNELS {
                assert!((f.channel(c).iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(f.channel(c).iter().all(|v| *v >= 0.0 && v.is_finite()));
            }
        }
    }

    #[test]
    fn forty_frames_per_second() {
        let cfg = FeatureConfig::default();
        assert_eq!(cfg.frame_rate(), 40.0);
        let frames = extract_features(&noisy_stream(256 + 200 - 1, 2), cfg).unwrap();
        // first frame at sample 256, then one per 5 samples
        assert_eq!(frames.len(), 40);
        assert!(frames.iter().enumerate().all(|(i, f)| f.index == i as u64));
    }

    #[test]
    fn short_stream_yields_nothing() {
        assert!(extract_features(&noisy_stream(255, 3), FeatureConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn shifting_by_hop_shifts_one_frame() {
        let cfg = FeatureConfig::default();
        let s = noisy_stream(700, 4);
        let a = extract_features(&s, cfg).unwrap();
        let b = extract_features(&s[cfg.hop..], cfg).unwrap();
        assert_eq!(a.len(), b.len() + 1);
        for (x, y) in a[1..].iter().zip(&b) {
            assert_eq!(x.values, y.values);
        }
    }

    #[test]
    fn zero_hop_rejected() {
        let cfg = FeatureConfig { hop: 0, ..FeatureConfig::default() };
        assert!(FeatureExtractor::new(cfg).is_err());
    }

    #[test]
    fn silent_channel_is_flat() {
        let frames = extract_features(&vec![[0.0; 4]; 256], FeatureConfig::default()).unwrap();
        assert_eq!(frames[0].values, [0.2; FEATURE_DIM]);
    }

    #[test]
    fn focus_metric_limits() {
        let m = focus_metrics(&frame_from_channel([0.0, 0.0, 1.0, 0.0, 0.0]));
        assert_eq!((m.relaxation, m.concentration), (1.0, 0.0));
        let m = focus_metrics(&frame_from_channel([0.0, 0.0, 0.0, 1.0, 0.0]));
        assert_eq!(m.concentration, 1.0);
        let m = focus_metrics(&frame_from_channel([0.1, 0.1, 0.3, 0.3, 0.2]));
        assert_eq!(m.relaxation, 0.5);
        let m = focus_metrics(&frame_from_channel([0.5, 0.5, 0.0, 0.0, 0.0]));
        assert_eq!((m.relaxation, m.concentration), (0.5, 0.5));
    }

    #[test]
    fn truth_follows_last_sample() {
        let mut ex = FeatureExtractor::new(FeatureConfig::default()).unwrap();
        let mk = |truth, start| RawChunk { samples: vec![[1.0; 4]; 256], start_index: start, rate: 200.0, truth };
        let a = ex.push_chunk(&mk(BrainState::Idle, 0)).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].truth, Some(BrainState::Idle));
        let b = ex.push_chunk(&mk(BrainState::ConcentratedCup, 256)).unwrap();
        assert!(b.iter().all(|f| f.truth == Some(BrainState::ConcentratedCup)));
    }
}
