use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{NUM_BANDS, NUM_CHANNELS};

/// Canonical EEG bands, half-open `[lo, hi)` in Hz. Gamma runs to Nyquist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    Delta,
    Theta,
    Alpha,
    Beta,
    Gamma,
}

impl Band {
    pub const ALL: [Band; NUM_BANDS] = [Band::Delta, Band::Theta, Band::Alpha, Band::Beta, Band::Gamma];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn lo(self) -> f64 {
        match self {
            Band::Delta => 1.0,
            Band::Theta => 4.0,
            Band::Alpha => 8.0,
            Band::Beta => 13.0,
            Band::Gamma => 30.0,
        }
    }

    /// Upper edge; `None` means open up to Nyquist.
    pub fn hi(self) -> Option<f64> {
        match self {
            Band::Delta => Some(4.0),
            Band::Theta => Some(8.0),
            Band::Alpha => Some(13.0),
            Band::Beta => Some(30.0),
            Band::Gamma => None,
        }
    }

    /// Edges clipped to `[0, nyquist)`.
    pub fn range(self, nyquist: f64) -> (f64, f64) {
        let hi = self.hi().map_or(nyquist, |h| h.min(nyquist));
        (self.lo().min(nyquist), hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Taper {
    Rectangular,
    Hann,
}

impl Taper {
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Taper::Rectangular => vec![1.0; n],
            // periodic Hann
            Taper::Hann => (0..n).map(|i| 0.5 * (1.0 - (TAU * i as f64 / n as f64).cos())).collect(),
        }
    }
}

/// One-sided magnitude spectrum, `window_len / 2 + 1` bins per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bin_freqs: Vec<f64>,
    pub magnitudes: [Vec<f64>; NUM_CHANNELS],
    pub window_len: usize,
    pub rate: f64,
}

impl Spectrum {
    pub fn nyquist(&self) -> f64 {
        self.rate / 2.0
    }

    pub fn peak_bin(&self, channel: usize) -> usize {
        self.magnitudes[channel]
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &m)| if m > best.1 { (i, m) } else { best })
            .0
    }

    /// Two-sided energy `(1/n) * sum |X_k|^2`, reconstructed from the
    /// one-sided bins. Equals the time-domain energy of the (tapered) input.
    pub fn energy(&self, channel: usize) -> f64 {
        let n = self.window_len;
        let mags = &self.magnitudes[channel];
        let last = mags.len() - 1;
        let sum: f64 =
            mags.iter().enumerate().map(|(k, m)| if k == 0 || k == last { m * m } else { 2.0 * m * m }).sum();
        sum / n as f64
    }

    /// Sum of squared magnitudes over bins with `lo <= f < hi`.
    pub fn power_between(&self, channel: usize, lo: f64, hi: f64) -> f64 {
        self.bin_freqs
            .iter()
            .zip(&self.magnitudes[channel])
            .filter(|(f, _)| **f >= lo && **f < hi)
            .map(|(_, m)| m * m)
            .sum()
    }
}

/// Reusable FFT plan plus taper for a fixed window length.
#[derive(Clone)]
pub struct SpectrumAnalyzer {
    len: usize,
    taper: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    freqs: Vec<f64>,
    rate: f64,
}

impl std::fmt::Debug for SpectrumAnalyzer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectrumAnalyzer").field("len", &self.len).field("rate", &self.rate).finish()
    }
}

impl SpectrumAnalyzer {
    pub fn new(len: usize, rate: f64, taper: Taper) -> Result<Self> {
        if len < 64 || !len.is_power_of_two() {
            return Err(Error::Size { len });
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::Config(format!("invalid sampling rate {rate}")));
        }
        let fft = FftPlanner::new().plan_fft_forward(len);
        let freqs = (0..=len / 2).map(|k| k as f64 * rate / len as f64).collect();
        Ok(Self { len, taper: taper.coefficients(len), fft, freqs, rate })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn analyze<'a, I>(&self, window: I) -> Result<Spectrum>
    where
        I: IntoIterator<Item = &'a [f64; NUM_CHANNELS]>,
        I::IntoIter: ExactSizeIterator,
    {
        let window = window.into_iter();
        if window.len() != self.len {
            return Err(Error::dim(format!("{} samples", self.len), format!("{} samples", window.len())));
        }
        let mut bufs: [Vec<Complex<f64>>; NUM_CHANNELS] = Default::default();
        for b in bufs.iter_mut() {
            b.reserve_exact(self.len);
        }
        for (s, w) in window.zip(&self.taper) {
            for c in 0..NUM_CHANNELS {
                if !s[c].is_finite() {
                    return Err(Error::Config("non-finite sample in spectrum window".into()));
                }
                bufs[c].push(Complex::new(s[c] * w, 0.0));
            }
        }
        let half = self.len / 2;
        let magnitudes = bufs.map(|mut buf| {
            self.fft.process(&mut buf);
            buf[..=half].iter().map(|z| z.norm()).collect()
        });
        Ok(Spectrum { bin_freqs: self.freqs.clone(), magnitudes, window_len: self.len, rate: self.rate })
    }
}

/// Magnitude spectrum of an `n x 4` window; `n` must be a power of two >= 64.
pub fn spectrum(window: &[[f64; NUM_CHANNELS]], rate: f64, taper: Taper) -> Result<Spectrum> {
    SpectrumAnalyzer::new(window.len(), rate, taper)?.analyze(window)
}

/// Per-channel power in `band`.
pub fn band_power(spec: &Spectrum, band: Band) -> [f64; NUM_CHANNELS] {
    let (lo, hi) = band.range(spec.nyquist());
    std::array::from_fn(|c| spec.power_between(c, lo, hi))
}

/// Alpha-1 `[8, 10)` and alpha-2 `[11, 13)` power per channel. Debug only;
/// features carry the combined alpha band.
pub fn alpha_subbands(spec: &Spectrum) -> [[f64; 2]; NUM_CHANNELS] {
    std::array::from_fn(|c| [spec.power_between(c, 8.0, 10.0), spec.power_between(c, 11.0, 13.0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sine(freq: f64, rate: f64, n: usize) -> Vec<[f64; NUM_CHANNELS]> {
        (0..n).map(|k| [(TAU * freq * k as f64 / rate).sin(); NUM_CHANNELS]).collect()
    }

    /// Independent O(n^2) DFT magnitude, used as an oracle.
    fn naive_dft_mag(x: &[f64], k: usize) -> f64 {
        let n = x.len() as f64;
        let (re, im) = x.iter().enumerate().fold((0.0, 0.0), |(re, im), (t, v)| {
            let ang = -TAU * k as f64 * t as f64 / n;
            (re + v * ang.cos(), im + v * ang.sin())
        });
        (re * re + im * im).sqrt()
    }

    #[test]
    fn band_edges_are_ordered_and_disjoint() {
        for w in Band::ALL.windows(2) {
            assert_eq!(w[0].hi(), Some(w[1].lo()));
        }
        assert_eq!(Band::Gamma.range(100.0), (30.0, 100.0));
    }

    #[test]
    fn rejects_non_power_of_two() {
        let w = sine(10.0, 200.0, 200);
        assert!(matches!(spectrum(&w, 200.0, Taper::Hann), Err(Error::Size { len: 200 })));
        assert!(matches!(spectrum(&w[..32], 200.0, Taper::Hann), Err(Error::Size { len: 32 })));
    }

    #[test]
    fn exact_bin_tone_peaks_at_its_bin() {
        // 10 Hz on a 1 Hz grid: 256 samples at 256 Hz.
        let w = sine(10.0, 256.0, 256);
        let s = spectrum(&w, 256.0, Taper::Rectangular).unwrap();
        assert_eq!(s.bin_freqs.len(), 129);
        assert_eq!(s.peak_bin(0), 10);
        let total: f64 = s.magnitudes[0].iter().map(|m| m * m).sum();
        assert!(s.magnitudes[0][10].powi(2) / total >= 0.99);
        // closed form |X_10| = n/2
        assert!((s.magnitudes[0][10] - 128.0).abs() < 1e-9);
        assert!((naive_dft_mag(&w.iter().map(|v| v[0]).collect::<Vec<_>>(), 10) - 128.0).abs() < 1e-9);

        let s = spectrum(&w, 256.0, Taper::Hann).unwrap();
        let total: f64 = s.magnitudes[0].iter().map(|m| m * m).sum();
        let near: f64 = s.magnitudes[0][9..=11].iter().map(|m| m * m).sum();
        assert!(near / total >= 0.99);
    }

    #[test]
    fn dc_only_input_lands_in_bin_zero() {
        let w = vec![[3.0; NUM_CHANNELS]; 128];
        let s = spectrum(&w, 200.0, Taper::Rectangular).unwrap();
        assert!((s.magnitudes[1][0] - 384.0).abs() < 1e-9);
        assert!(s.magnitudes[1][1..].iter().all(|m| *m < 1e-9));
    }

    #[test]
    fn matches_naive_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w: Vec<[f64; 4]> = (0..64).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect();
        let s = spectrum(&w, 100.0, Taper::Rectangular).unwrap();
        let ch2: Vec<f64> = w.iter().map(|v| v[2]).collect();
        for k in 0..=32 {
            assert!((s.magnitudes[2][k] - naive_dft_mag(&ch2, k)).abs() < 1e-9);
        }
    }

    #[test]
    fn parseval_on_random_windows() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let w: Vec<[f64; 4]> = (0..256).map(|_| std::array::from_fn(|_| rng.random_range(-50.0..50.0))).collect();
            let s = spectrum(&w, 200.0, Taper::Rectangular).unwrap();
            for c in 0..NUM_CHANNELS {
                let time: f64 = w.iter().map(|v| v[c] * v[c]).sum();
                assert!((s.energy(c) - time).abs() / time < 1e-9);
            }
        }
    }

    #[test]
    fn tone_band_shares() {
        let s = spectrum(&sine(10.0, 200.0, 256), 200.0, Taper::Hann).unwrap();
        let total: f64 = Band::ALL.iter().map(|b| band_power(&s, *b)[0]).sum();
        assert!(band_power(&s, Band::Alpha)[0] / total >= 0.95);

        let s = spectrum(&sine(2.0, 200.0, 256), 200.0, Taper::Hann).unwrap();
        let delta = band_power(&s, Band::Delta)[0];
        for b in [Band::Theta, Band::Alpha, Band::Beta, Band::Gamma] {
            assert!(delta > 10.0 * band_power(&s, b)[0]);
        }
    }

    #[test]
    fn gamma_is_empty_when_nyquist_is_30() {
        let s = spectrum(&sine(10.0, 60.0, 64), 60.0, Taper::Hann).unwrap();
        assert_eq!(band_power(&s, Band::Gamma), [0.0; NUM_CHANNELS]);
    }

    #[test]
    fn band_powers_partition_the_spectrum_above_1hz() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w: Vec<[f64; 4]> = (0..256).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect();
        let s = spectrum(&w, 200.0, Taper::Hann).unwrap();
        for c in 0..NUM_CHANNELS {
            let sum: f64 = Band::ALL.iter().map(|b| band_power(&s, *b)[c]).sum();
            let total = s.power_between(c, 1.0, 100.0);
            assert!(Band::ALL.iter().all(|b| band_power(&s, *b)[c] >= 0.0));
            assert!((sum - total).abs() / total < 1e-9);
        }
    }

    #[test]
    fn alpha_subbands_split_alpha_peak() {
        let s = spectrum(&sine(12.0, 256.0, 256), 256.0, Taper::Rectangular).unwrap();
        let sub = alpha_subbands(&s)[0];
        assert!(sub[1] > 1000.0 * sub[0].max(1e-12));
    }
}
