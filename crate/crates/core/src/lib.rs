//! Detection of a low-rank filtered signal in high-dimensional, sensor-wise
//! independent colored noise through the largest eigenvalue of the spectral
//! coherence matrix.
//!
//! The numerical core is generic over the scalar type (see [`Real`]); the
//! `*64` aliases below fix it to `f64`, which is what the harness uses.
//!
//! * [`signal`]: observation model and random generators.
//! * [`spectral`]: Fourier transforms, smoothed periodograms, coherence.
//! * [`theory`]: transfer functions, `Ξ(ν)`, spikes, `φ`, Marchenko–Pastur.
//! * [`detection`]: eigenvalues, scan statistic, decision rule.
//! * [`harness`]: configured Monte-Carlo experiments and CSV output.

pub mod detection;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod signal;
pub mod spectral;
pub mod stats;
pub mod theory;

pub use detection::{
    consistency_window, decide, hermitian_eigs, scan_block, scan_statistic, DetectorConfig, EigenSpectrum,
    Lambda1Solver, ScanResult,
};
pub use error::{Error, Result};
pub use rng::RngStream;
pub use scalar::{Cx, Real};
pub use signal::{
    generate_noise, generate_signal, make_paper_filter, superpose, FilterBank, NoiseModel, SignalRealization,
    TimeSeriesBlock,
};
pub use spectral::{
    coherence, fft_frame, full_scan, smoothed_periodogram, CoherenceMatrix, FftFrame, FourierGrid, SpectralEstimate,
};
pub use theory::{
    mp_cdf, mp_edges, noise_spectral_density, nu_star, phi, snr_freq, spike_gammas, transfer_function, xi_matrix,
    SpikedReference, TrueSpectrum,
};

pub type FilterBank64 = FilterBank<f64>;
pub type NoiseModel64 = NoiseModel<f64>;
pub type TimeSeriesBlock64 = TimeSeriesBlock<f64>;
pub type FftFrame64 = FftFrame<f64>;
pub type SpectralEstimate64 = SpectralEstimate<f64>;
pub type CoherenceMatrix64 = CoherenceMatrix<f64>;
pub type TrueSpectrum64 = TrueSpectrum<f64>;
pub type SpikedReference64 = SpikedReference<f64>;
pub type EigenSpectrum64 = EigenSpectrum<f64>;
pub type ScanResult64 = ScanResult<f64>;
pub type DetectorConfig64 = DetectorConfig<f64>;

pub type FilterBank32 = FilterBank<f32>;
pub type NoiseModel32 = NoiseModel<f32>;
pub type TimeSeriesBlock32 = TimeSeriesBlock<f32>;
pub type CoherenceMatrix32 = CoherenceMatrix<f32>;
pub type ScanResult32 = ScanResult<f32>;
