//! Bicubic image resampling with the Catmull-Rom kernel (a = -0.5),
//! half-pixel-center coordinate mapping and clamp-to-border taps. The kernel
//! is separable, so the 2D resize runs as a rows pass then a columns pass.

use super::Plane;

/// Catmull-Rom weight at distance `d` from the sample.
pub(crate) fn kernel(d: f64) -> f64 {
    let d = d.abs();
    if d <= 1.0 {
        (1.5 * d - 2.5) * d * d + 1.0
    } else if d < 2.0 {
        -0.5 * (((d - 5.0) * d + 8.0) * d - 4.0)
    } else {
        0.0
    }
}

/// Source coordinate of destination index `i` when resampling `src_len`
/// samples to `dst_len`: centers align at (i + 0.5) * scale - 0.5.
pub(crate) fn src_coord(i: usize, src_len: usize, dst_len: usize) -> f64 {
    (i as f64 + 0.5) * (src_len as f64 / dst_len as f64) - 0.5
}

/// Four taps and weights for one destination index. Tap indices are clamped
/// into the source range.
fn taps(i: usize, src_len: usize, dst_len: usize) -> ([usize; 4], [f64; 4]) {
    let s = src_coord(i, src_len, dst_len);
    let base = s.floor();
    let f = s - base;
    let mut idx = [0usize; 4];
    let mut w = [0.0f64; 4];
    for t in 0..4 {
        let j = base as i64 - 1 + t as i64;
        idx[t] = j.clamp(0, src_len as i64 - 1) as usize;
        w[t] = kernel(f + 1.0 - t as f64);
    }
    (idx, w)
}

fn resample_row(src: &[f64], dst_len: usize) -> Vec<f64> {
    (0..dst_len)
        .map(|i| {
            let (idx, w) = taps(i, src.len(), dst_len);
            (0..4).map(|t| w[t] * src[idx[t]]).sum()
        })
        .collect()
}

/// Resizes a plane to `out_rows` x `out_cols`.
pub fn resize_bicubic(src: &Plane, out_rows: usize, out_cols: usize) -> Plane {
    assert!(out_rows >= 1 && out_cols >= 1, "output must be non-empty");
    assert!(src.rows >= 1 && src.cols >= 1, "input must be non-empty");

    // Columns pass: each row resampled to out_cols.
    let mut mid = Plane::zeros(src.rows, out_cols);
    for r in 0..src.rows {
        let row = resample_row(src.row(r), out_cols);
        mid.data[r * out_cols..(r + 1) * out_cols].copy_from_slice(&row);
    }

    // Rows pass: each column of the intermediate resampled to out_rows.
    let mut out = Plane::zeros(out_rows, out_cols);
    let mut column = vec![0.0; src.rows];
    for c in 0..out_cols {
        for r in 0..src.rows {
            column[r] = mid.data[r * out_cols + c];
        }
        let resampled = resample_row(&column, out_rows);
        for r in 0..out_rows {
            out.data[r * out_cols + c] = resampled[r];
        }
    }
    out
}
