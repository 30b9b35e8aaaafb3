//! Inference latency measurement. The harness times an already-prepared
//! closure, so feature construction stays outside the measured region by
//! construction: callers build the input first and hand over only the
//! forward pass.

use std::time::Instant;

use crate::mlp::Mlp;
use crate::{Error, Result};

/// Summary of per-iteration wall times in microseconds.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimingStats {
    pub iterations: usize,
    pub mean_us: f64,
    pub median_us: f64,
    pub p95_us: f64,
    pub std_us: f64,
}

/// Nearest-rank percentile and population standard deviation over raw
/// per-iteration samples.
pub(crate) fn stats_from_us(mut samples: Vec<f64>) -> TimingStats {
    let n = samples.len();
    assert!(n > 0);
    samples.sort_by(f64::total_cmp);
    let mean = samples.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    };
    let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
    let p95 = samples[rank - 1];
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n as f64;
    TimingStats {
        iterations: n,
        mean_us: mean,
        median_us: median,
        p95_us: p95,
        std_us: var.sqrt(),
    }
}

/// Runs `f` for max(10, iterations/10) warmup calls, then `iterations` timed
/// calls, one wall-time sample per call.
pub fn time_fn(iterations: usize, mut f: impl FnMut()) -> Result<TimingStats> {
    if iterations == 0 {
        return Err(Error::validation("need at least 1 timed iteration"));
    }
    let warmup = (iterations / 10).max(10);
    for _ in 0..warmup {
        f();
    }
    let mut samples = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let start = Instant::now();
        f();
        samples.push(start.elapsed().as_nanos() as f64 / 1000.0);
    }
    Ok(stats_from_us(samples))
}

/// Latency of one model at one sweep point.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LatencyReport {
    pub resolution_percent: u32,
    pub input_dim: usize,
    pub num_params: usize,
    pub stats: TimingStats,
}

/// Times the forward pass on one prepared input vector.
pub fn bench_inference(
    model: &Mlp,
    input: &[f64],
    resolution_percent: u32,
    iterations: usize,
) -> Result<LatencyReport> {
    if input.len() != model.input_dim() {
        return Err(Error::Shape(format!(
            "input of {} values, model expects {}",
            input.len(),
            model.input_dim()
        )));
    }
    let mut sink = 0.0;
    let stats = time_fn(iterations, || {
        // Consuming the output keeps the call from being optimized away.
        sink += model.forward(input)[0];
    })?;
    std::hint::black_box(sink);
    Ok(LatencyReport {
        resolution_percent,
        input_dim: model.input_dim(),
        num_params: model.num_params(),
        stats,
    })
}

/// Latency sweep over (resolution percent, input dimension) points with a
/// freshly initialized model per point. Forward cost depends on shape, not
/// on trained weight values, so untrained models measure the same thing.
pub fn latency_sweep(
    points: &[(u32, usize)],
    n_classes: usize,
    seed: u64,
    iterations: usize,
) -> Result<Vec<LatencyReport>> {
    points
        .iter()
        .map(|&(percent, input_dim)| {
            let model = Mlp::new(input_dim, n_classes, seed)?;
            let input = vec![0.5; input_dim];
            bench_inference(&model, &input, percent, iterations)
        })
        .collect()
}

/// Identifies what produced a timing row: CPU architecture, OS, and the
/// arithmetic width of the forward pass.
pub fn hardware_descriptor() -> String {
    format!("{}-{}-f64", std::env::consts::ARCH, std::env::consts::OS)
}

/// One line of the sweep artifact.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepRow {
    pub resolution_percent: u32,
    pub mean_us: f64,
    pub median_us: f64,
    pub p95_us: f64,
    pub iterations: usize,
    pub num_params: usize,
    pub weighted_f1: f64,
}

/// Renders sweep rows to CSV with the hardware descriptor on every line.
pub fn sweep_csv(rows: &[SweepRow], hardware: &str) -> String {
    let mut out =
        String::from("resolution,mean_us,median_us,p95_us,iterations,params,weighted_f1,hardware\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.resolution_percent,
            r.mean_us,
            r.median_us,
            r.p95_us,
            r.iterations,
            r.num_params,
            r.weighted_f1,
            hardware
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_match_hand_values() {
        let s = stats_from_us(vec![3.0, 1.0, 100.0, 2.0, 4.0]);
        assert_eq!(s.iterations, 5);
        assert!((s.mean_us - 22.0).abs() < 1e-12);
        assert!((s.median_us - 3.0).abs() < 1e-12);
        assert!((s.p95_us - 100.0).abs() < 1e-12);
        assert!((s.std_us - 1522.0f64.sqrt()).abs() < 1e-9);

        let even = stats_from_us(vec![1.0, 2.0, 3.0, 4.0]);
        assert!((even.median_us - 2.5).abs() < 1e-12);
        // Nearest rank at 95% of 4 samples is the 4th.
        assert!((even.p95_us - 4.0).abs() < 1e-12);
    }

    #[test]
    fn time_fn_calls_warmup_plus_iterations() {
        let mut calls = 0usize;
        let stats = time_fn(20, || calls += 1).unwrap();
        // Warmup is max(10, 20/10) = 10.
        assert_eq!(calls, 30);
        assert_eq!(stats.iterations, 20);
        assert!(stats.mean_us >= 0.0 && stats.mean_us.is_finite());
        assert!(stats.median_us <= stats.p95_us);

        let mut calls = 0usize;
        time_fn(200, || calls += 1).unwrap();
        assert_eq!(calls, 220);

        assert!(time_fn(0, || {}).is_err());
    }

    #[test]
    fn feature_construction_stays_outside_the_timed_region() {
        let model = Mlp::new(24, 9, 1).unwrap();
        let mut feature_builds = 0usize;
        let mut build_features = || {
            feature_builds += 1;
            vec![0.25; 24]
        };
        let input = build_features();
        assert_eq!(feature_builds, 1);
        let report = bench_inference(&model, &input, 100, 50).unwrap();
        // 50 timed + warmup forwards ran, yet features were built once.
        assert_eq!(feature_builds, 1);
        assert_eq!(report.stats.iterations, 50);
        assert_eq!(report.num_params, 64 * 24 + 10_761);
    }

    #[test]
    fn bench_inference_checks_input_shape() {
        let model = Mlp::new(10, 9, 1).unwrap();
        assert!(bench_inference(&model, &[0.0; 9], 100, 5).is_err());
    }

    #[test]
    fn latency_sweep_covers_every_point() {
        let points = [(100u32, 40usize), (50, 20), (20, 8), (10, 4)];
        let reports = latency_sweep(&points, 9, 7, 5).unwrap();
        assert_eq!(reports.len(), 4);
        for (r, &(pct, dim)) in reports.iter().zip(&points) {
            assert_eq!(r.resolution_percent, pct);
            assert_eq!(r.input_dim, dim);
            assert_eq!(r.num_params, 64 * dim + 10_761);
        }
        // More inputs means more multiply-accumulates means more params.
        assert!(reports[0].num_params > reports[3].num_params);
    }

    #[test]
    fn sweep_csv_layout() {
        let rows = vec![SweepRow {
            resolution_percent: 50,
            mean_us: 12.5,
            median_us: 12.0,
            p95_us: 15.0,
            iterations: 100,
            num_params: 1234,
            weighted_f1: 0.91,
        }];
        let csv = sweep_csv(&rows, "x86_64-linux-f64");
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(
            lines[0],
            "resolution,mean_us,median_us,p95_us,iterations,params,weighted_f1,hardware"
        );
        assert_eq!(lines[1], "50,12.5,12,15,100,1234,0.91,x86_64-linux-f64");
    }

    #[test]
    fn hardware_descriptor_mentions_float_width() {
        let hw = hardware_descriptor();
        assert!(hw.ends_with("-f64"));
        assert_eq!(hw.split('-').count(), 3);
    }
}
