//! Data model for labeled 50 Hz IMU streams, CSV ingestion, and a seeded
//! synthetic generator for desk-scale experiments.
//!
//! A recording is one animal's contiguous 9-channel stream with a per-sample
//! activity label. Channel order is fixed everywhere in this crate:
//! accelerometer x/y/z, magnetometer x/y/z, gyroscope x/y/z.

mod csv_io;
mod synth;

pub use csv_io::{load_csv, load_csv_reader, write_csv, write_csv_writer, CSV_HEADER};
pub use synth::{class_am_rate_hz, class_carrier_hz, synth_generate, SynthConfig};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Sampling rate of every recording handled by this crate.
pub const SAMPLE_RATE_HZ: f64 = 50.0;

/// Number of sensor channels in a full recording.
pub const NUM_CHANNELS: usize = 9;

/// Channel names in the fixed fusion order.
pub const CHANNEL_NAMES: [&str; NUM_CHANNELS] =
    ["ax", "ay", "az", "mx", "my", "mz", "gx", "gy", "gz"];

/// The nine annotated cattle activities. Ids are the on-disk label values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActivityClass {
    Grazing = 1,
    Walking = 2,
    RuminatingStanding = 3,
    RuminatingLying = 4,
    Standing = 5,
    Lying = 6,
    Drinking = 7,
    Grooming = 8,
    Other = 9,
}

impl ActivityClass {
    pub const ALL: [ActivityClass; 9] = [
        ActivityClass::Grazing,
        ActivityClass::Walking,
        ActivityClass::RuminatingStanding,
        ActivityClass::RuminatingLying,
        ActivityClass::Standing,
        ActivityClass::Lying,
        ActivityClass::Drinking,
        ActivityClass::Grooming,
        ActivityClass::Other,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<ActivityClass> {
        ActivityClass::ALL.get(id.checked_sub(1)? as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivityClass::Grazing => "Grazing",
            ActivityClass::Walking => "Walking",
            ActivityClass::RuminatingStanding => "RuminatingStanding",
            ActivityClass::RuminatingLying => "RuminatingLying",
            ActivityClass::Standing => "Standing",
            ActivityClass::Lying => "Lying",
            ActivityClass::Drinking => "Drinking",
            ActivityClass::Grooming => "Grooming",
            ActivityClass::Other => "Other",
        }
    }
}

/// One animal's contiguous sensor stream plus per-sample labels.
#[derive(Debug, Clone, PartialEq)]
pub struct IMURecording {
    pub animal_id: String,
    /// Fixed order: ax, ay, az, mx, my, mz, gx, gy, gz.
    pub channels: [Vec<f64>; NUM_CHANNELS],
    /// Label ids in 1..=9, one per sample.
    pub labels: Vec<u8>,
}

impl IMURecording {
    /// Number of samples (equivalently, seconds × 50).
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Checks the structural invariants: equal channel/label lengths and
    /// every label in 1..=9.
    pub fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        for (c, ch) in self.channels.iter().enumerate() {
            if ch.len() != n {
                return Err(Error::validation(format!(
                    "recording {}: channel {} has {} samples, labels have {}",
                    self.animal_id,
                    CHANNEL_NAMES[c],
                    ch.len(),
                    n
                )));
            }
        }
        if let Some(pos) = self.labels.iter().position(|&l| ActivityClass::from_id(l).is_none()) {
            return Err(Error::validation(format!(
                "recording {}: label {} at sample {} outside 1..=9",
                self.animal_id, self.labels[pos], pos
            )));
        }
        Ok(())
    }
}

/// Which sensor modalities feed the classifier. The accelerometer is always
/// included; every experiment uses it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModalitySet {
    pub accel: bool,
    pub mag: bool,
    pub gyro: bool,
}

impl ModalitySet {
    pub fn new(mag: bool, gyro: bool) -> ModalitySet {
        ModalitySet { accel: true, mag, gyro }
    }

    pub fn all() -> ModalitySet {
        ModalitySet::new(true, true)
    }

    pub fn accel_only() -> ModalitySet {
        ModalitySet::new(false, false)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.accel {
            return Err(Error::validation("the accelerometer modality is mandatory"));
        }
        Ok(())
    }

    /// Indices into the fixed 9-channel order for the selected modalities.
    pub fn channel_indices(&self) -> Vec<usize> {
        let mut idx = Vec::new();
        if self.accel {
            idx.extend([0, 1, 2]);
        }
        if self.mag {
            idx.extend([3, 4, 5]);
        }
        if self.gyro {
            idx.extend([6, 7, 8]);
        }
        idx
    }

    pub fn channel_names(&self) -> Vec<&'static str> {
        self.channel_indices().into_iter().map(|i| CHANNEL_NAMES[i]).collect()
    }

    pub fn num_channels(&self) -> usize {
        self.channel_indices().len()
    }
}

/// Default activity mix for the synthetic generator: heavily imbalanced
/// toward grazing and resting states, the way daytime herd observation
/// comes out. Fractions sum to 1.
pub fn default_class_mix() -> [f64; 9] {
    // Seconds of each activity in the reference observation campaign.
    const SECONDS: [f64; 9] =
        [36701.0, 514.0, 3392.0, 9851.0, 11471.0, 5426.0, 611.0, 530.0, 654.0];
    let total: f64 = SECONDS.iter().sum();
    let mut mix = [0.0; 9];
    for (m, s) in mix.iter_mut().zip(SECONDS) {
        *m = s / total;
    }
    mix
}

/// Per-class share of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassShare {
    pub class: ActivityClass,
    pub seconds: f64,
    pub percent: f64,
}

/// Label counts over all recordings, as seconds and percentages per class.
pub fn class_distribution(recordings: &[IMURecording]) -> Result<Vec<ClassShare>> {
    let mut counts = [0u64; 9];
    for rec in recordings {
        rec.validate()?;
        for &l in &rec.labels {
            counts[(l - 1) as usize] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::validation("empty dataset: no labeled samples"));
    }
    Ok(ActivityClass::ALL
        .iter()
        .zip(counts)
        .map(|(&class, n)| ClassShare {
            class,
            seconds: n as f64 / SAMPLE_RATE_HZ,
            percent: 100.0 * n as f64 / total as f64,
        })
        .collect())
}
