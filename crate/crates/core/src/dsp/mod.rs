//! Artifact cleaning, FFT spectra and band-power features.

mod features;
mod filter;
mod spectrum;

pub use features::{
    extract_features, focus_metrics, normalize_band_powers, FeatureConfig, FeatureExtractor, FeatureVector,
    FocusMetrics,
};
pub use filter::{clean_artifacts, ArtifactCleaner, Biquad, HIGHPASS_CUTOFF_HZ};
pub use spectrum::{alpha_subbands, band_power, spectrum, Band, Spectrum, SpectrumAnalyzer, Taper};
