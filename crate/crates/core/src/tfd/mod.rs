//! Time-frequency features: short-time Fourier transform, power
//! spectrograms, resolution scaling by bicubic resampling, and fusion of
//! per-channel planes into one feature vector.

mod fft;
mod resize;

pub use fft::dft;
pub use resize::resize_bicubic;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dataset::ModalitySet;
use crate::{Error, Result};

/// Row-major 2D array. For spectrograms rows are frequency bins (bin 0 = DC)
/// and columns are time frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn zeros(rows: usize, cols: usize) -> Plane {
        Plane { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// Hamming window: w[k] = 0.54 - 0.46 cos(2 pi k / (n-1)).
pub fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|k| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Short-time transform parameters. Defaults: 256-sample Hamming segments,
/// hop 2, 256-point transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StftConfig {
    pub segment_len: usize,
    pub hop: usize,
    pub fft_len: usize,
}

impl Default for StftConfig {
    fn default() -> StftConfig {
        StftConfig { segment_len: 256, hop: 2, fft_len: 256 }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.segment_len < 2 {
            return Err(Error::validation("segment length must be at least 2"));
        }
        if self.hop == 0 {
            return Err(Error::validation("hop must be at least 1"));
        }
        if self.fft_len < self.segment_len {
            return Err(Error::validation(format!(
                "fft length {} shorter than segment {}",
                self.fft_len, self.segment_len
            )));
        }
        Ok(())
    }

    /// Number of one-sided frequency bins.
    pub fn bins(&self) -> usize {
        self.fft_len / 2 + 1
    }

    /// Number of frames for a signal of `n` samples.
    pub fn frames(&self, n: usize) -> usize {
        if n < self.segment_len {
            0
        } else {
            (n - self.segment_len) / self.hop + 1
        }
    }
}

/// One-sided short-time Fourier transform: one Vec of `bins()` coefficients
/// per frame. Segments are Hamming-windowed and zero-padded to `fft_len`.
pub fn stft(x: &[f64], cfg: &StftConfig) -> Result<Vec<Vec<Complex64>>> {
    cfg.validate()?;
    let window = hamming(cfg.segment_len);
    let bins = cfg.bins();
    let mut frames = Vec::with_capacity(cfg.frames(x.len()));
    let mut buf = vec![Complex64::new(0.0, 0.0); cfg.fft_len];
    for f in 0..cfg.frames(x.len()) {
        let start = f * cfg.hop;
        for (k, w) in window.iter().enumerate() {
            buf[k] = Complex64::new(w * x[start + k], 0.0);
        }
        for v in buf.iter_mut().skip(cfg.segment_len) {
            *v = Complex64::new(0.0, 0.0);
        }
        let spectrum = dft(&buf);
        frames.push(spectrum[..bins].to_vec());
    }
    Ok(frames)
}

/// Power spectrogram: |X|^2 / (fs * sum w^2) with interior one-sided bins
/// doubled. Rows are frequency bins, columns are frames. Fails when the
/// signal is shorter than one segment.
pub fn spectrogram(x: &[f64], cfg: &StftConfig, sample_rate_hz: f64) -> Result<Plane> {
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::validation("sample rate must be positive"));
    }
    let frames = stft(x, cfg)?;
    if frames.is_empty() {
        return Err(Error::validation(format!(
            "signal of {} samples shorter than one {}-sample segment",
            x.len(),
            cfg.segment_len
        )));
    }
    let window = hamming(cfg.segment_len);
    let energy: f64 = window.iter().map(|w| w * w).sum();
    let scale = 1.0 / (sample_rate_hz * energy);
    let bins = cfg.bins();
    // With an even transform length the last bin is the Nyquist line and is
    // not doubled; with an odd length every bin above DC is.
    let last_doubled = if cfg.fft_len % 2 == 0 { bins - 1 } else { bins };

    let mut plane = Plane::zeros(bins, frames.len());
    for (t, frame) in frames.iter().enumerate() {
        for (k, v) in frame.iter().enumerate() {
            let mut p = v.norm_sqr() * scale;
            if k > 0 && k < last_doubled {
                p *= 2.0;
            }
            plane.set(k, t, p);
        }
    }
    Ok(plane)
}

/// The resolution sweep points used throughout evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Resolution {
    Full,
    Half,
    Fifth,
    Tenth,
}

impl Resolution {
    pub const ALL: [Resolution; 4] = [
        Resolution::Full,
        Resolution::Half,
        Resolution::Fifth,
        Resolution::Tenth,
    ];

    pub fn percent(&self) -> u32 {
        match self {
            Resolution::Full => 100,
            Resolution::Half => 50,
            Resolution::Fifth => 20,
            Resolution::Tenth => 10,
        }
    }

    pub fn from_percent(p: u32) -> Option<Resolution> {
        Resolution::ALL.iter().copied().find(|r| r.percent() == p)
    }
}

/// Output dimension for one axis scaled to `percent`, computed in integer
/// arithmetic with ties rounded to even, floored at 1.
fn scaled_dim(dim: usize, percent: u32) -> usize {
    let n = dim * percent as usize;
    let q = n / 100;
    let rem = n % 100;
    let rounded = match rem.cmp(&50) {
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Equal => q + (q & 1),
    };
    rounded.max(1)
}

/// Scaled (rows, cols) for a plane at `percent` resolution.
pub fn scaled_dims(rows: usize, cols: usize, percent: u32) -> Result<(usize, usize)> {
    if percent == 0 || percent > 100 {
        return Err(Error::validation(format!(
            "resolution percent must be in 1..=100 (got {percent})"
        )));
    }
    Ok((scaled_dim(rows, percent), scaled_dim(cols, percent)))
}

/// Resizes a plane to `percent` resolution; 100 returns it unchanged.
pub fn resize_to_percent(plane: &Plane, percent: u32) -> Result<Plane> {
    let (rows, cols) = scaled_dims(plane.rows, plane.cols, percent)?;
    if percent == 100 {
        return Ok(plane.clone());
    }
    Ok(resize_bicubic(plane, rows, cols))
}

/// Concatenates per-channel planes (row-major, in channel order) into one
/// feature vector. The plane count must match the modality selection and all
/// planes must share one shape.
pub fn fuse(planes: &[Plane], modalities: &ModalitySet) -> Result<Vec<f64>> {
    let expected = modalities.num_channels();
    if planes.len() != expected {
        return Err(Error::Shape(format!(
            "expected {} channel planes for {:?}, got {}",
            expected,
            modalities.channel_names(),
            planes.len()
        )));
    }
    let (rows, cols) = (planes[0].rows, planes[0].cols);
    let mut out = Vec::with_capacity(expected * rows * cols);
    for (i, p) in planes.iter().enumerate() {
        if p.rows != rows || p.cols != cols {
            return Err(Error::Shape(format!(
                "channel {} plane is {}x{}, expected {}x{}",
                modalities.channel_names()[i],
                p.rows,
                p.cols,
                rows,
                cols
            )));
        }
        out.extend_from_slice(&p.data);
    }
    Ok(out)
}

/// Inverse of [`fuse`]: splits a flat vector back into `count` planes of
/// `rows` x `cols`.
pub fn split_fused(flat: &[f64], rows: usize, cols: usize, count: usize) -> Result<Vec<Plane>> {
    if flat.len() != rows * cols * count {
        return Err(Error::Shape(format!(
            "{} values cannot split into {count} planes of {rows}x{cols}",
            flat.len()
        )));
    }
    Ok((0..count)
        .map(|i| Plane {
            rows,
            cols,
            data: flat[i * rows * cols..(i + 1) * rows * cols].to_vec(),
        })
        .collect())
}
