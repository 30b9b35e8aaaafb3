//! Sliding-window segmentation, min-max normalization, and the bandpass
//! filtering applied to accelerometer channels before segmentation.
//!
//! Pipeline order: a recording is filtered in full first (so windows carry no
//! filter warm-up transients), then cut into overlapping windows, and the
//! resulting features are normalized downstream with statistics fit on the
//! training split only.

mod bandpass;

pub use bandpass::{default_bandpass, design_bandpass, BandpassFilter, Sos};

use serde::{Deserialize, Serialize};

use crate::dataset::{IMURecording, ModalitySet, SAMPLE_RATE_HZ};
use crate::{Error, Result};

/// Window length and overlap for segmentation. Supported sizes are 5, 10 and
/// 15 s with overlaps 0%, 40% and 80%; stride = duration × (1 − overlap).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    duration_s: f64,
    overlap: f64,
}

impl WindowSpec {
    pub fn new(duration_s: f64, overlap: f64) -> Result<WindowSpec> {
        if ![5.0, 10.0, 15.0].contains(&duration_s) {
            return Err(Error::validation(format!(
                "window duration must be 5, 10 or 15 s (got {duration_s})"
            )));
        }
        if ![0.0, 0.4, 0.8].contains(&overlap) {
            return Err(Error::validation(format!(
                "window overlap must be 0.0, 0.4 or 0.8 (got {overlap})"
            )));
        }
        Ok(WindowSpec { duration_s, overlap })
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_s
    }

    pub fn overlap(&self) -> f64 {
        self.overlap
    }

    pub fn stride_s(&self) -> f64 {
        self.duration_s * (1.0 - self.overlap)
    }

    /// Window length in samples.
    pub fn window_samples(&self) -> usize {
        (self.duration_s * SAMPLE_RATE_HZ).round() as usize
    }

    /// Stride in samples; an exact integer for every supported combination.
    pub fn stride_samples(&self) -> usize {
        (self.stride_s() * SAMPLE_RATE_HZ).round() as usize
    }
}

/// A window of selected channels with one activity label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledWindow {
    pub animal_id: String,
    /// One slice per selected channel, in the fixed fusion order.
    pub channels: Vec<Vec<f64>>,
    /// Names matching `channels`, for error messages and exports.
    pub channel_names: Vec<&'static str>,
    pub label: u8,
    pub start_index: usize,
}

/// Majority label of a slice; ties go to the label seen earliest in the
/// window.
fn majority_label(labels: &[u8]) -> u8 {
    let mut counts = [0usize; 10];
    let mut first_seen = [usize::MAX; 10];
    for (i, &l) in labels.iter().enumerate() {
        let k = l as usize;
        counts[k] += 1;
        if first_seen[k] == usize::MAX {
            first_seen[k] = i;
        }
    }
    let mut best = 0usize;
    for k in 1..10 {
        if counts[k] > counts[best]
            || (counts[k] == counts[best] && first_seen[k] < first_seen[best])
        {
            best = k;
        }
    }
    best as u8
}

/// Cuts a recording into overlapping windows. Windows start at multiples of
/// the stride; a recording shorter than one window yields no windows. The
/// count for N samples is floor((N − L)/S) + 1.
pub fn segment(
    recording: &IMURecording,
    spec: &WindowSpec,
    modalities: &ModalitySet,
) -> Vec<LabeledWindow> {
    let len = spec.window_samples();
    let stride = spec.stride_samples();
    let n = recording.len();
    if n < len {
        return Vec::new();
    }
    let indices = modalities.channel_indices();
    let names = modalities.channel_names();
    let count = (n - len) / stride + 1;
    let mut windows = Vec::with_capacity(count);
    for w in 0..count {
        let start = w * stride;
        let channels: Vec<Vec<f64>> = indices
            .iter()
            .map(|&c| recording.channels[c][start..start + len].to_vec())
            .collect();
        windows.push(LabeledWindow {
            animal_id: recording.animal_id.clone(),
            channels,
            channel_names: names.clone(),
            label: majority_label(&recording.labels[start..start + len]),
            start_index: start,
        });
    }
    windows
}

/// Per-channel (min, max) pairs fit on a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub per_channel: Vec<(f64, f64)>,
}

impl NormalizationParams {
    /// Fits per-channel extremes over arbitrary channel slices. `slices(c)`
    /// must yield every training slice of channel `c`; `names` label the
    /// channels in error messages.
    pub fn fit<'a, I>(
        num_channels: usize,
        names: &[&str],
        mut slices: impl FnMut(usize) -> I,
    ) -> Result<NormalizationParams>
    where
        I: Iterator<Item = &'a [f64]>,
    {
        let mut per_channel = Vec::with_capacity(num_channels);
        for c in 0..num_channels {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for slice in slices(c) {
                for &v in slice {
                    min = min.min(v);
                    max = max.max(v);
                }
            }
            if !min.is_finite() || !max.is_finite() {
                return Err(Error::validation(format!(
                    "channel {}: no finite samples to fit normalization",
                    names.get(c).copied().unwrap_or("?")
                )));
            }
            if min == max {
                return Err(Error::DegenerateChannel(
                    names.get(c).copied().unwrap_or("?").to_string(),
                ));
            }
            per_channel.push((min, max));
        }
        Ok(NormalizationParams { per_channel })
    }

    /// Rescales one value of channel `c`: x ↦ (x − min)/(max − min).
    /// Out-of-range values map outside [0,1]; nothing is clipped.
    pub fn scale(&self, c: usize, x: f64) -> f64 {
        let (min, max) = self.per_channel[c];
        (x - min) / (max - min)
    }
}

/// Fits min-max parameters over the channels of training windows.
pub fn fit_minmax(windows: &[LabeledWindow]) -> Result<NormalizationParams> {
    let first = windows
        .first()
        .ok_or_else(|| Error::validation("cannot fit normalization on an empty training set"))?;
    NormalizationParams::fit(first.channels.len(), &first.channel_names, |c| {
        windows.iter().map(move |w| w.channels[c].as_slice())
    })
}

/// Applies min-max scaling to every channel of a window.
pub fn apply_minmax(window: &LabeledWindow, params: &NormalizationParams) -> Result<LabeledWindow> {
    if params.per_channel.len() != window.channels.len() {
        return Err(Error::Shape(format!(
            "normalization params cover {} channels, window has {}",
            params.per_channel.len(),
            window.channels.len()
        )));
    }
    let mut out = window.clone();
    for (c, ch) in out.channels.iter_mut().enumerate() {
        for v in ch.iter_mut() {
            *v = params.scale(c, *v);
        }
    }
    Ok(out)
}

/// Returns a copy of the recording with the three accelerometer channels
/// bandpass-filtered; magnetometer and gyroscope pass through untouched.
pub fn filter_recording(recording: &IMURecording, filter: &BandpassFilter) -> IMURecording {
    let mut out = recording.clone();
    for c in 0..3 {
        out.channels[c] = filter.apply(&recording.channels[c]);
    }
    out
}
