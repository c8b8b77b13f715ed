//! Harness configuration, read from a TOML file. Every key is optional;
//! `neuroarm config` prints the full default file.

use std::path::Path;

use neuroarm_core::actuator::ActuatorConfig;
use neuroarm_core::dataset::{OverlapMode, SplitConfig};
use neuroarm_core::dsp::FeatureConfig;
use neuroarm_core::model::{FfnnConfig, TrainConfig, TransformerConfig};
use neuroarm_core::synth::{default_profiles, NoiseSpec, StateProfiles};
use neuroarm_core::{BrainState, FEATURE_DIM, NUM_CLASSES};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    /// Master seed; every generator, split and model seed derives from it.
    pub seed: u64,
    pub features: FeatureConfig,
    pub noise: NoiseSpec,
    pub transport: TransportConfig,
    pub collect: CollectConfig,
    pub split: SplitSettings,
    pub model: ModelSettings,
    pub train: TrainSettings,
    pub run: RunConfig,
    pub actuator: ActuatorConfig,
    /// Band amplitudes per brain state; built-in profiles when absent.
    pub profiles: Option<StateProfiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportConfig {
    pub host: String,
    /// 0 picks a free port.
    pub port: u16,
    pub serial_latency_ms: u64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self { host: "127.0.0.1".into(), port: 0, serial_latency_ms: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollectConfig {
    pub seconds_per_action: f64,
    /// Session seconds per wall-clock second.
    pub time_scale: f64,
}

impl Default for CollectConfig {
    fn default() -> Self {
        Self { seconds_per_action: 100.0, time_scale: 20.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSettings {
    pub win_size: usize,
    pub test_fraction: f64,
    pub overlap: OverlapMode,
}

impl Default for SplitSettings {
    fn default() -> Self {
        let d = SplitConfig::default();
        Self { win_size: d.win_size, test_fraction: d.test_fraction, overlap: d.overlap }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSettings {
    pub model_dim: usize,
    pub heads: usize,
    pub ff_dim: usize,
    pub ffnn_hidden: usize,
}

impl Default for ModelSettings {
    fn default() -> Self {
        let t = TransformerConfig::default();
        Self { model_dim: t.model_dim, heads: t.heads, ff_dim: t.ff_dim, ffnn_hidden: FfnnConfig::default().hidden }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    /// Also train the feed-forward baseline and write a comparison table.
    pub compare_ffnn: bool,
    /// Window sizes for the window-size study; empty skips it.
    pub window_sweep: Vec<usize>,
    /// Thresholds for the band-power baseline sweep; empty skips it.
    pub threshold_sweep: Vec<f64>,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            epochs: t.epochs,
            lr: t.lr,
            batch_size: t.batch_size,
            compare_ffnn: false,
            window_sweep: Vec::new(),
            threshold_sweep: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub duration_s: f64,
    /// Seconds each scripted state is held.
    pub hold_s: f64,
    /// Cycled for the length of the session.
    pub script: Vec<BrainState>,
    pub time_scale: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            duration_s: 300.0,
            hold_s: 30.0,
            script: vec![BrainState::Idle, BrainState::ConcentratedCup, BrainState::RelaxedHandshake],
            time_scale: 20.0,
        }
    }
}

impl RunConfig {
    /// Scripted state at session time `t` seconds.
    pub fn state_at(&self, t: f64) -> BrainState {
        let slot = (t.max(0.0) / self.hold_s).floor() as usize;
        self.script[slot % self.script.len()]
    }
}

impl HarnessConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn profiles(&self) -> StateProfiles {
        self.profiles.clone().unwrap_or_else(default_profiles)
    }

    pub fn split_config(&self) -> SplitConfig {
        SplitConfig {
            win_size: self.split.win_size,
            test_fraction: self.split.test_fraction,
            seed: self.seed,
            overlap: self.split.overlap,
        }
    }

    pub fn transformer_config(&self, win_size: usize) -> TransformerConfig {
        TransformerConfig {
            win_size,
            feat_dim: FEATURE_DIM,
            model_dim: self.model.model_dim,
            heads: self.model.heads,
            ff_dim: self.model.ff_dim,
            classes: NUM_CLASSES,
            seed: self.seed,
        }
    }

    pub fn ffnn_config(&self, win_size: usize) -> FfnnConfig {
        FfnnConfig { win_size, hidden: self.model.ffnn_hidden, seed: self.seed }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { epochs: self.train.epochs, lr: self.train.lr, batch_size: self.train.batch_size, seed: self.seed }
    }

    /// Generator seed for one collection or run stream.
    pub fn stream_seed(&self, stream: u64) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stream)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.noise.validate()?;
        for p in self.profiles().values() {
            p.validate()?;
        }
        if let Some(p) = &self.profiles {
            if p.len() != BrainState::ALL.len() {
                return bad("profiles must define every brain state".into());
            }
        }
        self.transformer_config(self.split.win_size).validate()?;
        if !(self.collect.seconds_per_action > 0.0 && self.collect.time_scale > 0.0) {
            return bad("collect.seconds_per_action and collect.time_scale must be positive".into());
        }
        if !(self.run.duration_s > 0.0 && self.run.hold_s > 0.0 && self.run.time_scale > 0.0) {
            return bad("run.duration_s, run.hold_s and run.time_scale must be positive".into());
        }
        if self.run.script.is_empty() {
            return bad("run.script must not be empty".into());
        }
        if self.train.threshold_sweep.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return bad("threshold_sweep values must lie in [0, 1]".into());
        }
        if self.features.rate <= 2.0 * self.noise.mains_freq {
            return bad(format!(
                "sampling rate {} Hz is too low for {} Hz mains",
                self.features.rate, self.noise.mains_freq
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let cfg = HarnessConfig { profiles: Some(default_profiles()), ..Default::default() };
        let text = cfg.to_toml();
        assert_eq!(HarnessConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = HarnessConfig::from_toml("seed = 7\n[train]\nepochs = 3\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.train.epochs, 3);
        assert_eq!(cfg.train.batch_size, 16);
        assert_eq!(cfg.split.win_size, 80);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(HarnessConfig::from_toml("sed = 1"), Err(CliError::Config(_))));
        assert!(HarnessConfig::from_toml("[noise]\nmains_freq = 55.0").is_err());
        assert!(HarnessConfig::from_toml("[model]\nmodel_dim = 30\nheads = 4").is_err());
        assert!(HarnessConfig::from_toml("[run]\nscript = []").is_err());
    }

    #[test]
    fn script_cycles() {
        let r = RunConfig::default();
        assert_eq!(r.state_at(0.0), BrainState::Idle);
        assert_eq!(r.state_at(45.0), BrainState::ConcentratedCup);
        assert_eq!(r.state_at(89.9), BrainState::RelaxedHandshake);
        assert_eq!(r.state_at(90.0), BrainState::Idle);
    }
}
