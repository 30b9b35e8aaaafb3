//! Third-order Butterworth bandpass designed in the analog domain and
//! discretized with the bilinear transform, stored as second-order sections.
//!
//! The design chain: place the order-3 Butterworth prototype poles on the
//! unit circle, prewarp the band edges so the digital response hits -3 dB
//! exactly at the requested frequencies, map lowpass to bandpass in s, apply
//! the bilinear transform, and pair poles into sections with numerators
//! proportional to (z-1)(z+1).

use num_complex::Complex64;

use crate::dataset::SAMPLE_RATE_HZ;
use crate::{Error, Result};

const ORDER: usize = 3;

/// One second-order section. `a0` is normalized to 1 and not stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sos {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Sos {
    /// Direct form II transposed over a full signal, zero initial state.
    fn apply(&self, x: &mut [f64]) {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for v in x.iter_mut() {
            let xi = *v;
            let y = b0 * xi + s1;
            s1 = b1 * xi - a1 * y + s2;
            s2 = b2 * xi - a2 * y;
            *v = y;
        }
    }

    fn response_at(&self, z_inv: Complex64) -> Complex64 {
        let num = self.b[0] + z_inv * (self.b[1] + z_inv * self.b[2]);
        let den = 1.0 + z_inv * (self.a[0] + z_inv * self.a[1]);
        num / den
    }

    /// Roots of z^2 + a1 z + a2.
    fn poles(&self) -> [Complex64; 2] {
        let [a1, a2] = self.a;
        let half = Complex64::new(-a1 / 2.0, 0.0);
        let disc = (half * half - a2).sqrt();
        [half + disc, half - disc]
    }
}

/// A designed bandpass filter: cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct BandpassFilter {
    sections: Vec<Sos>,
    low_hz: f64,
    high_hz: f64,
    sample_rate_hz: f64,
}

impl BandpassFilter {
    pub fn sections(&self) -> &[Sos] {
        &self.sections
    }

    pub fn low_hz(&self) -> f64 {
        self.low_hz
    }

    pub fn high_hz(&self) -> f64 {
        self.high_hz
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Filters a signal through every section in order, zero initial state.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for sos in &self.sections {
            sos.apply(&mut y);
        }
        y
    }

    /// Complex frequency response at `f_hz`.
    pub fn response_at(&self, f_hz: f64) -> Complex64 {
        let omega = 2.0 * std::f64::consts::PI * f_hz / self.sample_rate_hz;
        let z_inv = Complex64::new(omega.cos(), -omega.sin());
        self.sections
            .iter()
            .map(|s| s.response_at(z_inv))
            .product()
    }

    /// Magnitude response in dB at `f_hz`.
    pub fn gain_db(&self, f_hz: f64) -> f64 {
        20.0 * self.response_at(f_hz).norm().log10()
    }

    /// Pole magnitudes in section order; all must be < 1 for stability.
    pub fn pole_magnitudes(&self) -> Vec<f64> {
        self.sections
            .iter()
            .flat_map(|s| s.poles().map(|p| p.norm()))
            .collect()
    }

    /// Section coefficients as CSV with a0 = 1 made explicit.
    pub fn coefficients_csv(&self) -> String {
        let mut out = String::from("section,b0,b1,b2,a0,a1,a2\n");
        for (i, s) in self.sections.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},1,{},{}\n",
                i, s.b[0], s.b[1], s.b[2], s.a[0], s.a[1]
            ));
        }
        out
    }
}

/// Designs the default filter for the pipeline: 2 to 20 Hz at the dataset
/// sample rate.
pub fn default_bandpass() -> BandpassFilter {
    design_bandpass(2.0, 20.0, SAMPLE_RATE_HZ).expect("default band is valid")
}

/// Designs an order-3 Butterworth bandpass. Requires 0 < low < high < fs/2.
pub fn design_bandpass(low_hz: f64, high_hz: f64, sample_rate_hz: f64) -> Result<BandpassFilter> {
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(Error::validation(format!(
            "sample rate must be positive (got {sample_rate_hz})"
        )));
    }
    let nyquist = sample_rate_hz / 2.0;
    if !(low_hz.is_finite() && high_hz.is_finite() && 0.0 < low_hz && low_hz < high_hz && high_hz < nyquist)
    {
        return Err(Error::validation(format!(
            "band edges must satisfy 0 < low < high < {nyquist} Hz (got {low_hz}..{high_hz})"
        )));
    }

    // Analog Butterworth prototype: poles on the unit circle in the left
    // half-plane, unit gain, no zeros.
    let prototype: Vec<Complex64> = (0..ORDER)
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + ORDER + 1) as f64 / (2 * ORDER) as f64;
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect();

    // Prewarp the edges. Working with the axis normalized to a sample rate
    // of 2 keeps the classic warped = 4 tan(pi f / fs) form; FS2 below is
    // twice that internal rate.
    const FS2: f64 = 4.0;
    let w1 = FS2 * (std::f64::consts::PI * low_hz / sample_rate_hz).tan();
    let w2 = FS2 * (std::f64::consts::PI * high_hz / sample_rate_hz).tan();
    let bw = w2 - w1;
    let wo = (w1 * w2).sqrt();

    // Lowpass to bandpass: each prototype pole splits into two, zeros of
    // multiplicity ORDER appear at s = 0, gain picks up bw^ORDER.
    let mut analog_poles = Vec::with_capacity(2 * ORDER);
    for &p in &prototype {
        let s = p * (bw / 2.0);
        let d = (s * s - wo * wo).sqrt();
        analog_poles.push(s + d);
        analog_poles.push(s - d);
    }
    let k_analog = bw.powi(ORDER as i32);

    // Bilinear transform z = (FS2 + s)/(FS2 - s). The ORDER zeros at s = 0
    // land on z = 1 and the ORDER zeros at infinity land on z = -1, so each
    // section numerator is a multiple of (z - 1)(z + 1) = z^2 - 1.
    let digital_poles: Vec<Complex64> = analog_poles
        .iter()
        .map(|&p| (FS2 + p) / (FS2 - p))
        .collect();
    let den_prod: Complex64 = analog_poles.iter().map(|&p| FS2 - p).product();
    let k_digital = k_analog * FS2.powi(ORDER as i32) / den_prod.re;

    // Pair poles into sections: complex poles with their conjugates, the
    // remaining real poles together. Order-3 always yields one real pair.
    let mut complex_pairs: Vec<Complex64> = digital_poles
        .iter()
        .copied()
        .filter(|p| p.im > 1e-12)
        .collect();
    complex_pairs.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut real_poles: Vec<f64> = digital_poles
        .iter()
        .filter(|p| p.im.abs() <= 1e-12)
        .map(|p| p.re)
        .collect();
    real_poles.sort_by(f64::total_cmp);

    let mut denominators: Vec<[f64; 2]> = Vec::with_capacity(ORDER);
    for chunk in real_poles.chunks(2) {
        if let [r1, r2] = *chunk {
            denominators.push([-(r1 + r2), r1 * r2]);
        }
    }
    for p in complex_pairs {
        denominators.push([-2.0 * p.re, p.norm_sqr()]);
    }
    debug_assert_eq!(denominators.len(), ORDER);

    // Sections with poles closest to the unit circle run last; the per
    // section share of the overall gain is the cube root.
    denominators.sort_by(|x, y| {
        let m = |[a1, a2]: &[f64; 2]| {
            let half = Complex64::new(-a1 / 2.0, 0.0);
            let d = (half * half - *a2).sqrt();
            (half + d).norm().max((half - d).norm())
        };
        m(x).total_cmp(&m(y))
    });
    let g = k_digital.cbrt();
    let sections = denominators
        .into_iter()
        .map(|a| Sos { b: [g, 0.0, -g], a })
        .collect();

    Ok(BandpassFilter {
        sections,
        low_hz,
        high_hz,
        sample_rate_hz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_filter() -> BandpassFilter {
        design_bandpass(2.0, 20.0, 50.0).unwrap()
    }

    #[test]
    fn rejects_invalid_bands() {
        assert!(design_bandpass(0.0, 20.0, 50.0).is_err());
        assert!(design_bandpass(20.0, 2.0, 50.0).is_err());
        assert!(design_bandpass(2.0, 25.0, 50.0).is_err());
        assert!(design_bandpass(2.0, 20.0, 0.0).is_err());
        assert!(design_bandpass(-1.0, 20.0, 50.0).is_err());
    }

    #[test]
    fn has_three_sections_with_symmetric_numerators() {
        let f = default_filter();
        assert_eq!(f.sections().len(), 3);
        for s in f.sections() {
            assert_eq!(s.b[1], 0.0);
            assert_eq!(s.b[0], -s.b[2]);
        }
    }

    #[test]
    fn band_edges_sit_at_minus_three_db() {
        let f = default_filter();
        let half_power = 20.0 * 0.5f64.sqrt().log10();
        assert!((f.gain_db(2.0) - half_power).abs() < 1e-8, "{}", f.gain_db(2.0));
        assert!((f.gain_db(20.0) - half_power).abs() < 1e-8, "{}", f.gain_db(20.0));
    }

    #[test]
    fn blocks_dc_and_nyquist() {
        let f = default_filter();
        assert_eq!(f.response_at(0.0).norm(), 0.0);
        assert!(f.response_at(25.0).norm() < 1e-12);
    }

    #[test]
    fn passband_is_flat_and_stopband_attenuates() {
        let f = default_filter();
        // Geometric center of the band (in the warped domain this maps very
        // close to 6.3 Hz) passes at unity.
        assert!(f.gain_db(6.32).abs() < 0.01, "{}", f.gain_db(6.32));
        assert!(f.gain_db(10.0).abs() < 0.2, "{}", f.gain_db(10.0));
        assert!(f.gain_db(24.0) < -40.0, "{}", f.gain_db(24.0));
        assert!(f.gain_db(0.5) < -17.0, "{}", f.gain_db(0.5));
    }

    #[test]
    fn all_poles_inside_unit_circle() {
        let f = default_filter();
        let mags = f.pole_magnitudes();
        assert_eq!(mags.len(), 6);
        for m in mags {
            assert!(m < 1.0, "pole magnitude {m}");
        }
    }

    #[test]
    fn apply_is_deterministic_and_stateless() {
        let f = default_filter();
        let x: Vec<f64> = (0..400).map(|i| (0.7 * i as f64).sin()).collect();
        let y1 = f.apply(&x);
        let y2 = f.apply(&x);
        assert_eq!(y1, y2);
        assert_eq!(y1.len(), x.len());
    }

    #[test]
    fn impulse_response_decays() {
        let f = default_filter();
        let mut x = vec![0.0; 600];
        x[0] = 1.0;
        let y = f.apply(&x);
        let head: f64 = y[..300].iter().map(|v| v * v).sum();
        let tail: f64 = y[300..].iter().map(|v| v * v).sum();
        assert!(tail < head * 1e-6, "tail {tail} vs head {head}");
    }

    #[test]
    fn in_band_tone_passes_out_of_band_tone_dies() {
        let f = default_filter();
        let n = 1000;
        let tone = |freq: f64| -> Vec<f64> {
            (0..n)
                .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / 50.0).sin())
                .collect()
        };
        // Skip the transient, compare steady-state RMS.
        let rms = |y: &[f64]| (y[500..].iter().map(|v| v * v).sum::<f64>() / 500.0).sqrt();
        let passed = rms(&f.apply(&tone(8.0)));
        let blocked = rms(&f.apply(&tone(0.3)));
        assert!(passed > 0.65, "in-band rms {passed}");
        assert!(blocked < 0.02, "out-of-band rms {blocked}");
    }

    #[test]
    fn coefficients_csv_has_one_row_per_section() {
        let f = default_filter();
        let csv = f.coefficients_csv();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "section,b0,b1,b2,a0,a1,a2");
        for (i, line) in lines[1..].iter().enumerate() {
            assert!(line.starts_with(&format!("{i},")));
            assert_eq!(line.split(',').count(), 7);
        }
    }
}
