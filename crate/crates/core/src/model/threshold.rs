//! Focus-metric threshold baseline.

use serde::{Deserialize, Serialize};

use crate::dsp::{focus_metrics, ArtifactCleaner, FeatureConfig, FeatureExtractor, FocusMetrics};
use crate::error::{Error, Result};
use crate::label::BrainState;
use crate::synth::{NoiseSpec, SignalGenerator, StateProfiles};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub metric_threshold: f64,
}

impl ThresholdConfig {
    pub fn new(metric_threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&metric_threshold) {
            return Err(Error::Config(format!("threshold {metric_threshold} outside [0, 1]")));
        }
        Ok(Self { metric_threshold })
    }
}

/// Relaxed if relaxation clears the threshold, concentrated if
/// concentration does, idle otherwise. When both clear it (thresholds
/// at or below 0.5) the states are indistinguishable and the result is idle.
pub fn threshold_classify(m: FocusMetrics, cfg: ThresholdConfig) -> BrainState {
    let relaxed = m.relaxation >= cfg.metric_threshold;
    let focused = m.concentration >= cfg.metric_threshold;
    match (relaxed, focused) {
        (true, false) => BrainState::RelaxedHandshake,
        (false, true) => BrainState::ConcentratedCup,
        _ => BrainState::Idle,
    }
}

/// Successful detections out of `attempts` for each threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub threshold: f64,
    pub attempts: usize,
    pub handshake_successes: usize,
    pub cup_successes: usize,
}

/// Each attempt records 2 s of a fresh session in the target state
/// (after one analysis window of warm-up), averages the focus metrics over
/// the frames and applies the threshold rule.
pub fn threshold_sweep(
    profiles: &StateProfiles,
    noise: NoiseSpec,
    features: FeatureConfig,
    thresholds: &[f64],
    attempts: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    let mut metrics = Vec::with_capacity(attempts * 2);
    for attempt in 0..attempts {
        for target in [BrainState::RelaxedHandshake, BrainState::ConcentratedCup] {
            let mut gen = SignalGenerator::new(profiles, noise, seed.wrapping_add(attempt as u64), features.rate)?;
            gen.set_state(target);
            let mut cleaner = ArtifactCleaner::new(features.rate, noise.mains_freq)?;
            let mut ex = FeatureExtractor::new(features)?;
            let n = features.win_len + (2.0 * features.rate) as usize;
            let frames = ex.push_chunk(&cleaner.process(&gen.next_chunk(n))?)?;
            let k = frames.len().max(1) as f64;
            let relaxation = frames.iter().map(|f| focus_metrics(f).relaxation).sum::<f64>() / k;
            metrics.push((target, FocusMetrics { relaxation, concentration: 1.0 - relaxation }));
        }
    }
    thresholds
        .iter()
        .map(|&t| {
            let cfg = ThresholdConfig::new(t)?;
            let hits =
                |state| metrics.iter().filter(|(s, m)| *s == state && threshold_classify(*m, cfg) == state).count();
            Ok(SweepPoint {
                threshold: t,
                attempts,
                handshake_successes: hits(BrainState::RelaxedHandshake),
                cup_successes: hits(BrainState::ConcentratedCup),
            })
        })
        .collect()
}
