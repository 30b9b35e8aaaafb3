//! Cattle activity classification from collar-mounted IMU streams.
//!
//! The pipeline: 50 Hz tri-axial accelerometer/magnetometer/gyroscope
//! recordings are bandpass-filtered (2-20 Hz, accelerometer only), cut into
//! overlapping labeled windows, turned into per-channel spectrograms
//! (optionally downsized), min-max normalized with training-split statistics,
//! and classified by a small dense network trained with Adam. Evaluation runs
//! stratified K-fold or leave-one-animal-out cross-validation and reports
//! confusion matrices and weighted F1; the bench module measures how inference
//! latency and parameter count shrink with spectrogram resolution.
//!
//! Modules:
//! - [`dataset`]: data model, CSV ingestion, seeded synthetic recordings
//! - [`preprocess`]: windowing, min-max normalization, Butterworth bandpass
//! - [`tfd`]: STFT, spectrogram, bicubic resize, channel fusion
//! - [`mlp`]: the dense classifier, backprop, Adam, serialization
//! - [`eval`]: fold construction, confusion matrices, F1, experiment driver
//! - [`bench`]: inference-latency measurement and the resolution sweep

pub mod bench;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod mlp;
pub mod preprocess;
pub mod tfd;

pub use error::{Error, Result};

/// SplitMix64 finalizer; derives independent RNG streams from one global seed.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
