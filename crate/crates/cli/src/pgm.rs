//! Plain-text exports for a spectrogram plane: a CSV matrix of raw power
//! values and a P2 PGM rendering on a decibel scale.

use cattle_activity::tfd::Plane;

/// Dynamic range of the PGM rendering. Power below (max - 80 dB) maps to 0.
const DB_RANGE: f64 = 80.0;

pub fn plane_to_csv(plane: &Plane) -> String {
    let mut out = String::new();
    for r in 0..plane.rows {
        let row: Vec<String> = plane.row(r).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Renders power on a dB scale, brightest = strongest, with the highest
/// frequency row at the top of the image.
pub fn plane_to_pgm(plane: &Plane) -> String {
    let db: Vec<f64> = plane
        .data
        .iter()
        .map(|&p| 10.0 * (p.max(1e-300)).log10())
        .collect();
    let max_db = db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let floor = max_db - DB_RANGE;
    let span = max_db - floor;

    let mut out = format!("P2\n{} {}\n255\n", plane.cols, plane.rows);
    // A constant plane (e.g. an all-zero window) renders as all black.
    let all_equal = db.iter().all(|&v| v == max_db);
    for r in (0..plane.rows).rev() {
        let row: Vec<String> = (0..plane.cols)
            .map(|c| {
                if all_equal {
                    "0".to_string()
                } else {
                    let v = db[r * plane.cols + c].max(floor);
                    let level = ((v - floor) / span * 255.0).round() as u32;
                    level.min(255).to_string()
                }
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
