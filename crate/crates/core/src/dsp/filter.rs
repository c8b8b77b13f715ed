use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use crate::error::{Error, Result};
use crate::label::NUM_CHANNELS;
use crate::synth::RawChunk;

/// Drift-removal corner. Kept at half the lowest band edge so the delta
/// band loses well under 1 dB.
pub const HIGHPASS_CUTOFF_HZ: f64 = 0.5;

/// Direct form I biquad section (RBJ cookbook coefficients, a0 normalized).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
    x: [f64; 2],
    y: [f64; 2],
}

impl Biquad {
    fn from_raw(b: [f64; 3], a0: f64, a1: f64, a2: f64) -> Self {
        Self { b: [b[0] / a0, b[1] / a0, b[2] / a0], a: [a1 / a0, a2 / a0], x: [0.0; 2], y: [0.0; 2] }
    }

    /// Notch at `freq` with -3 dB bandwidth `freq / q`.
    pub fn notch(rate: f64, freq: f64, q: f64) -> Self {
        let w0 = TAU * freq / rate;
        let alpha = w0.sin() / (2.0 * q);
        let c = w0.cos();
        Self::from_raw([1.0, -2.0 * c, 1.0], 1.0 + alpha, -2.0 * c, 1.0 - alpha)
    }

    /// Second-order Butterworth high-pass.
    pub fn highpass(rate: f64, freq: f64) -> Self {
        let w0 = TAU * freq / rate;
        let alpha = w0.sin() / (2.0 * FRAC_1_SQRT_2);
        let c = w0.cos();
        let k = (1.0 + c) / 2.0;
        Self::from_raw([k, -(1.0 + c), k], 1.0 + alpha, -2.0 * c, 1.0 - alpha)
    }

    pub fn reset(&mut self) {
        self.x = [0.0; 2];
        self.y = [0.0; 2];
    }

    #[inline]
    pub fn process(&mut self, x0: f64) -> f64 {
        let y0 = self.b[0] * x0 + self.b[1] * self.x[0] + self.b[2] * self.x[1]
            - self.a[0] * self.y[0]
            - self.a[1] * self.y[1];
        self.x = [x0, self.x[0]];
        self.y = [y0, self.y[0]];
        y0
    }
}

/// Stateful per-channel high-pass + mains notch cascade.
///
/// The notch Q is `mains / 2`, i.e. a 2 Hz (+-1 Hz) stop band.
#[derive(Debug, Clone)]
pub struct ArtifactCleaner {
    rate: f64,
    stages: [[Biquad; 2]; NUM_CHANNELS],
}

impl ArtifactCleaner {
    pub fn new(rate: f64, mains_freq: f64) -> Result<Self> {
        if !(mains_freq > 0.0 && rate > 2.0 * mains_freq) {
            return Err(Error::Config(format!("sampling rate {rate} Hz cannot notch {mains_freq} Hz mains")));
        }
        let hp = Biquad::highpass(rate, HIGHPASS_CUTOFF_HZ);
        let notch = Biquad::notch(rate, mains_freq, mains_freq / 2.0);
        Ok(Self { rate, stages: [[hp, notch]; NUM_CHANNELS] })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn reset(&mut self) {
        self.stages.iter_mut().flatten().for_each(Biquad::reset);
    }

    pub fn process_sample(&mut self, s: [f64; NUM_CHANNELS]) -> [f64; NUM_CHANNELS] {
        let mut out = s;
        for (v, stages) in out.iter_mut().zip(self.stages.iter_mut()) {
            for st in stages.iter_mut() {
                *v = st.process(*v);
            }
        }
        out
    }

    pub fn process(&mut self, chunk: &RawChunk) -> Result<RawChunk> {
        if chunk.rate != self.rate {
            return Err(Error::Config(format!(
                "chunk rate {} Hz does not match cleaner rate {} Hz",
                chunk.rate, self.rate
            )));
        }
        Ok(RawChunk { samples: chunk.samples.iter().map(|s| self.process_sample(*s)).collect(), ..chunk.clone() })
    }
}

/// One-shot cleaning from zero filter state.
pub fn clean_artifacts(chunk: &RawChunk, mains_freq: f64) -> Result<RawChunk> {
    ArtifactCleaner::new(chunk.rate, mains_freq)?.process(chunk)
}
