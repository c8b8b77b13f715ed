//! Seedable multi-channel EEG stand-in.
//!
//! Each channel is a sum of one sinusoid per frequency band, with the
//! per-band amplitude taken from the profile of the current [`BrainState`],
//! plus optional mains hum and white Gaussian noise. The noise and phase
//! streams come from `ChaCha8Rng`, so a `(profiles, noise, seed)` triple
//! always yields the same samples on every platform.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dsp::Band;
use crate::error::{Error, Result};
use crate::label::{BrainState, NUM_BANDS, NUM_CHANNELS};

/// Board sampling rate in Hz.
pub const DEFAULT_RATE: f64 = 200.0;

/// Test-tone frequency used to synthesize each band (the band midpoint,
/// with gamma kept well below the 100 Hz Nyquist limit).
pub fn tone_frequency(band: Band) -> f64 {
    match band {
        Band::Delta => 2.5,
        Band::Theta => 6.0,
        Band::Alpha => 10.0,
        Band::Beta => 20.0,
        Band::Gamma => 40.0,
    }
}

/// Per-band, per-channel sinusoid amplitudes in microvolts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandProfile {
    pub delta: [f64; NUM_CHANNELS],
    pub theta: [f64; NUM_CHANNELS],
    pub alpha: [f64; NUM_CHANNELS],
    pub beta: [f64; NUM_CHANNELS],
    pub gamma: [f64; NUM_CHANNELS],
}

impl BandProfile {
    pub fn zeros() -> Self {
        Self::uniform([0.0; NUM_BANDS])
    }

    /// Same amplitude on every channel for each band (delta..gamma order).
    pub fn uniform(amps: [f64; NUM_BANDS]) -> Self {
        let mut p = Self {
            delta: [0.0; NUM_CHANNELS],
            theta: [0.0; NUM_CHANNELS],
            alpha: [0.0; NUM_CHANNELS],
            beta: [0.0; NUM_CHANNELS],
            gamma: [0.0; NUM_CHANNELS],
        };
        for band in Band::ALL {
            *p.band_mut(band) = [amps[band.index()]; NUM_CHANNELS];
        }
        p
    }

    pub fn band(&self, band: Band) -> &[f64; NUM_CHANNELS] {
        match band {
            Band::Delta => &self.delta,
            Band::Theta => &self.theta,
            Band::Alpha => &self.alpha,
            Band::Beta => &self.beta,
            Band::Gamma => &self.gamma,
        }
    }

    pub fn band_mut(&mut self, band: Band) -> &mut [f64; NUM_CHANNELS] {
        match band {
            Band::Delta => &mut self.delta,
            Band::Theta => &mut self.theta,
            Band::Alpha => &mut self.alpha,
            Band::Beta => &mut self.beta,
            Band::Gamma => &mut self.gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for band in Band::ALL {
            if let Some(a) = self.band(band).iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
                return Err(Error::Config(format!("{band:?} amplitude {a} must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

/// Mains interference and sensor noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    pub mains_freq: f64,
    pub mains_amp: f64,
    pub white_sigma: f64,
}

impl NoiseSpec {
    pub fn silent(mains_freq: f64) -> Self {
        Self { mains_freq, mains_amp: 0.0, white_sigma: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mains_freq != 50.0 && self.mains_freq != 60.0 {
            return Err(Error::Config(format!("mains frequency must be 50 or 60 Hz, got {}", self.mains_freq)));
        }
        if !(self.mains_amp >= 0.0 && self.white_sigma >= 0.0)
            || !self.mains_amp.is_finite()
            || !self.white_sigma.is_finite()
        {
            return Err(Error::Config("noise amplitudes must be finite and non-negative".into()));
        }
        Ok(())
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { mains_freq: 50.0, mains_amp: 10.0, white_sigma: 2.0 }
    }
}

pub type StateProfiles = BTreeMap<BrainState, BandProfile>;

/// Separable defaults: relaxation raises alpha, concentration raises
/// beta and gamma, idle is low and broadband.
pub fn default_profiles() -> StateProfiles {
    let mut relaxed = BandProfile::uniform([3.0, 4.0, 20.0, 3.0, 1.5]);
    relaxed.alpha = [22.0, 22.0, 16.0, 16.0];
    let mut concentrated = BandProfile::uniform([3.0, 3.0, 3.0, 12.0, 8.0]);
    concentrated.gamma = [9.0, 9.0, 7.0, 7.0];
    let idle = BandProfile::uniform([4.0, 3.0, 3.0, 2.5, 1.5]);
    BTreeMap::from([
        (BrainState::RelaxedHandshake, relaxed),
        (BrainState::ConcentratedCup, concentrated),
        (BrainState::Idle, idle),
    ])
}

/// A block of consecutive raw samples from one generator.
#[derive(Debug, Clone, PartialEq)]
pub struct RawChunk {
    pub samples: Vec<[f64; NUM_CHANNELS]>,
    /// Global index of `samples[0]`.
    pub start_index: u64,
    pub rate: f64,
    pub truth: BrainState,
}

impl RawChunk {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Index one past the last sample.
    pub fn end_index(&self) -> u64 {
        self.start_index + self.samples.len() as u64
    }

    pub fn channel(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(move |s| s[c])
    }
}

#[derive(Debug, Clone)]
pub struct SignalGenerator {
    profiles: [BandProfile; 3],
    noise: NoiseSpec,
    rate: f64,
    /// Phase offset per (band, channel), drawn once from the seed.
    phases: [[f64; NUM_CHANNELS]; NUM_BANDS],
    rng: ChaCha8Rng,
    white: Option<Normal<f64>>,
    state: BrainState,
    next_index: u64,
}

fn state_slot(s: BrainState) -> usize {
    match s {
        BrainState::RelaxedHandshake => 0,
        BrainState::ConcentratedCup => 1,
        BrainState::Idle => 2,
    }
}

/// Builds a generator at the default 200 Hz rate, starting in `Idle`.
pub fn make_generator(profiles: &StateProfiles, noise: NoiseSpec, seed: u64) -> Result<SignalGenerator> {
    SignalGenerator::new(profiles, noise, seed, DEFAULT_RATE)
}

impl SignalGenerator {
    pub fn new(profiles: &StateProfiles, noise: NoiseSpec, seed: u64, rate: f64) -> Result<Self> {
        noise.validate()?;
        if !(rate.is_finite() && rate > 2.0 * tone_frequency(Band::Gamma)) {
            return Err(Error::Config(format!("sampling rate {rate} Hz too low for synthesis")));
        }
        let mut table = [BandProfile::zeros(); 3];
        for state in BrainState::ALL {
            let p = profiles.get(&state).ok_or_else(|| Error::Config(format!("missing profile for {state:?}")))?;
            p.validate()?;
            table[state_slot(state)] = *p;
        }

        // Phases use their own stream so they do not shift the noise sequence.
        let mut phase_rng = ChaCha8Rng::seed_from_u64(seed);
        phase_rng.set_stream(1);
        let mut phases = [[0.0; NUM_CHANNELS]; NUM_BANDS];
        for row in phases.iter_mut() {
            for p in row.iter_mut() {
                *p = phase_rng.random::<f64>() * TAU;
            }
        }

        let white = if noise.white_sigma > 0.0 {
            Some(Normal::new(0.0, noise.white_sigma).map_err(|e| Error::Config(e.to_string()))?)
        } else {
            None
        };

        Ok(Self {
            profiles: table,
            noise,
            rate,
            phases,
            rng: ChaCha8Rng::seed_from_u64(seed),
            white,
            state: BrainState::Idle,
            next_index: 0,
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn state(&self) -> BrainState {
        self.state
    }

    /// Index of the next sample to be generated.
    pub fn position(&self) -> u64 {
        self.next_index
    }

    /// Takes effect at the next sample. Phases are time-based, so switching
    /// to the current state is seamless.
    pub fn set_state(&mut self, state: BrainState) {
        self.state = state;
    }

    pub fn next_chunk(&mut self, n: usize) -> RawChunk {
        let profile = self.profiles[state_slot(self.state)];
        let start = self.next_index;
        let mut samples = Vec::with_capacity(n);
        for k in 0..n as u64 {
            let t = (start + k) as f64 / self.rate;
            let mains = self.noise.mains_amp * (TAU * self.noise.mains_freq * t).sin();
            let mut s = [0.0; NUM_CHANNELS];
            for (c, out) in s.iter_mut().enumerate() {
                let mut v = mains;
                for band in Band::ALL {
                    let amp = profile.band(band)[c];
                    if amp != 0.0 {
                        v += amp * (TAU * tone_frequency(band) * t + self.phases[band.index()][c]).sin();
                    }
                }
                if let Some(white) = &self.white {
                    v += white.sample(&mut self.rng);
                }
                *out = v;
            }
            samples.push(s);
        }
        self.next_index += n as u64;
        RawChunk { samples, start_index: start, rate: self.rate, truth: self.state }
    }
}

/// Debug dump: `index,ch1,ch2,ch3,ch4,truth`.
pub fn write_raw_csv<'a, W: Write>(out: W, chunks: impl IntoIterator<Item = &'a RawChunk>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "ch1", "ch2", "ch3", "ch4", "truth"])?;
    for chunk in chunks {
        let truth = chunk.truth.action().index().to_string();
        for (k, s) in chunk.samples.iter().enumerate() {
            let idx = (chunk.start_index + k as u64).to_string();
            w.write_record([
                idx.as_str(),
                &s[0].to_string(),
                &s[1].to_string(),
                &s[2].to_string(),
                &s[3].to_string(),
                truth.as_str(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{band_power, spectrum, Taper};

    fn alpha_only_idle() -> StateProfiles {
        let mut p = default_profiles();
        let mut idle = BandProfile::zeros();
        idle.alpha[0] = 10.0;
        p.insert(BrainState::Idle, idle);
        p
    }

    #[test]
    fn identical_seeds_give_identical_streams() {
        let mut a = make_generator(&default_profiles(), NoiseSpec::silent(50.0), 7).unwrap();
        let mut b = make_generator(&default_profiles(), NoiseSpec::silent(50.0), 7).unwrap();
        for _ in 0..5 {
            let (x, y) = (a.next_chunk(97), b.next_chunk(97));
            for (p, q) in x.samples.iter().zip(&y.samples) {
                for c in 0..NUM_CHANNELS {
                    assert_eq!(p[c].to_bits(), q[c].to_bits());
                }
            }
        }
    }

    #[test]
    fn zero_profile_and_noise_is_silent() {
        let mut p = default_profiles();
        p.insert(BrainState::Idle, BandProfile::zeros());
        let mut g = make_generator(&p, NoiseSpec::silent(60.0), 1).unwrap();
        assert!(g.next_chunk(400).samples.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn different_seeds_differ_in_noise() {
        let noise = NoiseSpec { mains_freq: 50.0, mains_amp: 0.0, white_sigma: 2.0 };
        let mut a = make_generator(&default_profiles(), noise, 7).unwrap();
        let mut b = make_generator(&default_profiles(), noise, 8).unwrap();
        let (x, y) = (a.next_chunk(200), b.next_chunk(200));
        let differing = x.samples.iter().zip(&y.samples).filter(|(p, q)| p != q).count();
        assert_eq!(differing, 200);
    }

    #[test]
    fn missing_profile_is_a_config_error() {
        let mut p = default_profiles();
        p.remove(&BrainState::ConcentratedCup);
        assert!(matches!(make_generator(&p, NoiseSpec::default(), 0), Err(Error::Config(_))));
    }

    #[test]
    fn bad_noise_spec_rejected() {
        let n = NoiseSpec { mains_freq: 55.0, ..NoiseSpec::default() };
        assert!(make_generator(&default_profiles(), n, 0).is_err());
        let n = NoiseSpec { white_sigma: -1.0, ..NoiseSpec::default() };
        assert!(make_generator(&default_profiles(), n, 0).is_err());
    }

    #[test]
    fn one_second_chunk_bookkeeping() {
        let mut g = make_generator(&default_profiles(), NoiseSpec::default(), 3).unwrap();
        let c = g.next_chunk(200);
        assert_eq!(c.len(), 200);
        assert_eq!(c.start_index, 0);
        assert_eq!(c.len() as f64 / c.rate, 1.0);
        assert_eq!(g.position(), 200);
        assert_eq!(g.next_chunk(1).start_index, 200);
    }

    #[test]
    fn alpha_only_channel_is_pure_ten_hz() {
        let mut g = make_generator(&alpha_only_idle(), NoiseSpec::silent(50.0), 11).unwrap();
        let chunk = g.next_chunk(256);
        // closed form: 10 sin(2 pi 10 t + phi)
        let phi = g.phases[Band::Alpha.index()][0];
        for (k, s) in chunk.samples.iter().enumerate() {
            let t = k as f64 / 200.0;
            assert!((s[0] - 10.0 * (TAU * 10.0 * t + phi).sin()).abs() < 1e-9);
            assert_eq!(s[1], 0.0);
        }
        let spec = spectrum(&chunk.samples, 200.0, Taper::Rectangular).unwrap();
        let peak = spec.peak_bin(0);
        // bin width 200/256 Hz: 10 Hz falls between bins 12 and 13
        assert!((spec.bin_freqs[peak] - 10.0).abs() <= 200.0 / 256.0);
    }

    #[test]
    fn mains_shows_up_before_cleaning() {
        let mut p = default_profiles();
        p.insert(BrainState::Idle, BandProfile::zeros());
        let noise = NoiseSpec { mains_freq: 50.0, mains_amp: 20.0, white_sigma: 0.0 };
        let mut g = make_generator(&p, noise, 5).unwrap();
        let chunk = g.next_chunk(256);
        let spec = spectrum(&chunk.samples, 200.0, Taper::Hann).unwrap();
        for c in 0..NUM_CHANNELS {
            assert_eq!(spec.bin_freqs[spec.peak_bin(c)], 50.0);
        }
    }

    #[test]
    fn state_changes_apply_at_next_chunk() {
        let mut g = make_generator(&default_profiles(), NoiseSpec::default(), 2).unwrap();
        assert_eq!(g.next_chunk(10).truth, BrainState::Idle);
        g.set_state(BrainState::ConcentratedCup);
        assert_eq!(g.next_chunk(10).truth, BrainState::ConcentratedCup);
    }

    #[test]
    fn resetting_same_state_is_seamless() {
        let p = default_profiles();
        let mut a = make_generator(&p, NoiseSpec::silent(50.0), 9).unwrap();
        let mut b = make_generator(&p, NoiseSpec::silent(50.0), 9).unwrap();
        a.set_state(BrainState::RelaxedHandshake);
        b.set_state(BrainState::RelaxedHandshake);
        let mut x = a.next_chunk(100).samples;
        x.extend(a.next_chunk(100).samples);
        let y = {
            let first = b.next_chunk(100).samples;
            b.set_state(BrainState::RelaxedHandshake);
            let mut f = first;
            f.extend(b.next_chunk(100).samples);
            f
        };
        assert_eq!(x, y);
    }

    #[test]
    fn scripted_alternation_tracks_truth() {
        let mut g = make_generator(&default_profiles(), NoiseSpec::default(), 4).unwrap();
        let script = [BrainState::Idle, BrainState::RelaxedHandshake];
        let mut expected_start = 0;
        for step in 0..6 {
            g.set_state(script[step % 2]);
            let c = g.next_chunk(400);
            assert_eq!(c.truth, script[step % 2]);
            assert_eq!(c.start_index, expected_start);
            expected_start = c.end_index();
        }
    }

    #[test]
    fn single_band_profiles_keep_power_in_band() {
        for band in Band::ALL {
            let mut p = default_profiles();
            p.insert(BrainState::Idle, {
                let mut amps = [0.0; NUM_BANDS];
                amps[band.index()] = 10.0;
                BandProfile::uniform(amps)
            });
            let mut g = make_generator(&p, NoiseSpec::silent(50.0), 21).unwrap();
            let chunk = g.next_chunk(256);
            let spec = spectrum(&chunk.samples, 200.0, Taper::Hann).unwrap();
            for c in 0..NUM_CHANNELS {
                let total: f64 = Band::ALL.iter().map(|b| band_power(&spec, *b)[c]).sum();
                let share = band_power(&spec, band)[c] / total;
                assert!(share >= 0.95, "{band:?} ch{c}: share {share}");
            }
        }
    }

    #[test]
    fn raw_csv_has_header_and_rows() {
        let mut g = make_generator(&default_profiles(), NoiseSpec::default(), 4).unwrap();
        let chunks = [g.next_chunk(3), g.next_chunk(2)];
        let mut buf = Vec::new();
        write_raw_csv(&mut buf, &chunks).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "index,ch1,ch2,ch3,ch4,truth");
        assert_eq!(lines.len(), 6);
        assert!(lines[5].starts_with("4,"));
        assert!(lines[5].ends_with(",2"));
    }
}
