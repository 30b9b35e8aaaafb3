//! The five subcommands. Each validates the full run configuration first,
//! then computes, then writes: an invalid run leaves no partial outputs.
//! Every output directory also receives the effective merged configuration
//! as `config.toml` so results stay traceable.

use std::fs;
use std::path::Path;

use serde::Serialize;

use cattle_activity::bench::{bench_inference, hardware_descriptor, sweep_csv, SweepRow};
use cattle_activity::dataset::write_csv;
use cattle_activity::eval::{
    class_table, evaluate_loso, evaluate_stratified, flatten_features, prepare_windows,
    EvalReport, ExperimentConfig, FeatureMode,
};
use cattle_activity::mlp::io::save_file;
use cattle_activity::mlp::{AdamState, Mlp};
use cattle_activity::preprocess::{apply_minmax, fit_minmax};
use cattle_activity::tfd::{resize_to_percent, spectrogram};
use cattle_activity::{Error, Result};

use crate::config::{EvalScheme, RunConfig};
use crate::pgm::{plane_to_csv, plane_to_pgm};

fn write_text(dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::write(dir.join(name), content)?;
    Ok(())
}

/// Creates the output directory and drops the effective config next to the
/// artifacts. Called only after all computation has succeeded.
fn open_out_dir(out: &Path, cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(out)?;
    write_text(out, "config.toml", &cfg.to_toml())
}

pub fn cmd_synth(cfg: &RunConfig, out: &Path, force: bool) -> Result<()> {
    let synth_cfg = cfg.to_synth()?;
    cfg.to_experiment()?;
    cfg.scheme()?;
    cfg.source_is_known()?;
    let target = out.join("dataset.csv");
    if target.exists() && !force {
        return Err(Error::validation(format!(
            "{} already exists; pass --force to overwrite",
            target.display()
        )));
    }

    let recordings = cattle_activity::dataset::synth_generate(&synth_cfg)?;

    open_out_dir(out, cfg)?;
    write_csv(&recordings, &target)?;
    let samples: usize = recordings.iter().map(|r| r.labels.len()).sum();
    println!(
        "wrote {} ({} animals, {} samples)",
        target.display(),
        recordings.len(),
        samples
    );
    Ok(())
}

#[derive(Serialize)]
struct ChannelRange {
    channel: String,
    min: f64,
    max: f64,
}

/// Everything needed to apply a saved model to new data: topology, the class
/// table its outputs index into, the feature scaling fitted on the training
/// set, and the loss history of the run that produced it.
#[derive(Serialize)]
struct ModelSidecar<'a> {
    dims: Vec<usize>,
    num_params: usize,
    class_ids: Vec<u8>,
    class_names: Vec<String>,
    normalization: Vec<ChannelRange>,
    loss_history: Vec<f64>,
    config: &'a ExperimentConfig,
}

pub fn cmd_train(cfg: &RunConfig, out: &Path) -> Result<()> {
    let exp = cfg.to_experiment()?;
    cfg.scheme()?;
    cfg.validate_data_source()?;

    let recordings = cfg.load_recordings()?;
    let windows = prepare_windows(&recordings, &exp)?;
    if windows.is_empty() {
        return Err(Error::validation("no windows produced; recordings too short"));
    }
    let (class_ids, class_names) = class_table(&windows, exp.three_class);
    if class_ids.len() < 2 {
        return Err(Error::validation("training needs at least 2 classes present"));
    }

    let norm = fit_minmax(&windows)?;
    let mut features = Vec::with_capacity(windows.len());
    let mut labels = Vec::with_capacity(windows.len());
    for w in &windows {
        let scaled = apply_minmax(w, &norm)?;
        features.push(flatten_features(&scaled));
        labels.push(
            class_ids
                .binary_search(&scaled.label)
                .expect("label appears in class table"),
        );
    }

    let input_dim = features[0].len();
    let mut model = Mlp::new(input_dim, class_ids.len(), exp.model_seed)?;
    let mut adam = AdamState::for_model(&model, exp.learning_rate)?;
    let loss_history = model.train(&features, &labels, &exp.train, &mut adam)?;

    let normalization = windows[0]
        .channel_names
        .iter()
        .zip(&norm.per_channel)
        .map(|(&name, &(min, max))| ChannelRange { channel: name.to_string(), min, max })
        .collect();
    let sidecar = ModelSidecar {
        dims: model.dims().to_vec(),
        num_params: model.num_params(),
        class_ids,
        class_names,
        normalization,
        loss_history,
        config: &exp,
    };

    open_out_dir(out, cfg)?;
    save_file(&model, out.join("model.bin"))?;
    write_text(out, "model.json", &serde_json::to_string_pretty(&sidecar).expect("sidecar serializes"))?;
    println!(
        "trained on {} windows (input_dim {}, {} params); final loss {:.4}",
        features.len(),
        input_dim,
        model.num_params(),
        sidecar.loss_history.last().copied().unwrap_or(f64::NAN)
    );
    println!("wrote {} and {}", out.join("model.bin").display(), out.join("model.json").display());
    Ok(())
}

fn run_eval(cfg: &RunConfig, exp: &ExperimentConfig) -> Result<EvalReport> {
    let recordings = cfg.load_recordings()?;
    let windows = prepare_windows(&recordings, exp)?;
    match cfg.scheme()? {
        EvalScheme::Stratified => evaluate_stratified(&windows, exp),
        EvalScheme::LeaveOneSubjectOut => evaluate_loso(&windows, exp),
    }
}

/// Per-epoch training losses of every fold, long format for plotting.
fn losses_csv(report: &EvalReport) -> String {
    let mut out = String::from("fold,epoch,loss\n");
    for fold in &report.folds {
        for (i, loss) in fold.epoch_losses.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", fold.name, i + 1, loss));
        }
    }
    out
}

pub fn cmd_eval(cfg: &RunConfig, out: &Path) -> Result<()> {
    let exp = cfg.to_experiment()?;
    cfg.scheme()?;
    cfg.validate_data_source()?;

    let report = run_eval(cfg, &exp)?;

    open_out_dir(out, cfg)?;
    write_text(out, "report.json", &report.to_json())?;
    write_text(out, "confusion.csv", &report.aggregate.to_csv())?;
    write_text(out, "losses.csv", &losses_csv(&report))?;
    println!(
        "{} over {} folds: accuracy {:.4}, weighted F1 {:.4}",
        report.scheme,
        report.folds.len(),
        report.accuracy,
        report.weighted_f1
    );
    println!("wrote {}", out.join("report.json").display());
    Ok(())
}

pub fn cmd_bench(cfg: &RunConfig, out: &Path) -> Result<()> {
    let exp = cfg.to_experiment()?;
    cfg.scheme()?;
    cfg.validate_data_source()?;
    let resolutions = cfg.bench_resolutions()?;
    if exp.feature_mode != FeatureMode::TimeFrequency {
        return Err(Error::validation(
            "bench sweeps spectrogram resolution; set representation = \"tfd\"",
        ));
    }

    let recordings = cfg.load_recordings()?;
    let mut rows = Vec::with_capacity(resolutions.len());
    for &pct in &resolutions {
        let point = ExperimentConfig { resolution_percent: pct, ..exp.clone() };
        let windows = prepare_windows(&recordings, &point)?;
        let report = match cfg.scheme()? {
            EvalScheme::Stratified => evaluate_stratified(&windows, &point)?,
            EvalScheme::LeaveOneSubjectOut => evaluate_loso(&windows, &point)?,
        };

        // Latency of the forward pass alone, on an input shaped exactly like
        // the deployed features at this resolution.
        let norm = fit_minmax(&windows)?;
        let input = flatten_features(&apply_minmax(&windows[0], &norm)?);
        let model = Mlp::new(input.len(), report.class_ids.len(), point.model_seed)?;
        let latency = bench_inference(&model, &input, pct, cfg.bench.iterations)?;

        println!(
            "{pct:>3}%: input_dim {}, {} params, mean {:.2} us, weighted F1 {:.4}",
            latency.input_dim, latency.num_params, latency.stats.mean_us, report.weighted_f1
        );
        rows.push(SweepRow {
            resolution_percent: pct,
            mean_us: latency.stats.mean_us,
            median_us: latency.stats.median_us,
            p95_us: latency.stats.p95_us,
            iterations: latency.stats.iterations,
            num_params: latency.num_params,
            weighted_f1: report.weighted_f1,
        });
    }

    open_out_dir(out, cfg)?;
    write_text(out, "sweep.csv", &sweep_csv(&rows, &hardware_descriptor()))?;
    println!("wrote {}", out.join("sweep.csv").display());
    Ok(())
}

pub fn cmd_spectrogram(cfg: &RunConfig, out: &Path, channel: &str, window_index: usize) -> Result<()> {
    let exp = cfg.to_experiment()?;
    cfg.scheme()?;
    cfg.validate_data_source()?;
    let available = exp.modalities.channel_names();
    if !available.iter().any(|&n| n == channel) {
        return Err(Error::validation(format!(
            "channel \"{channel}\" is not among the selected modalities ({})",
            available.join(", ")
        )));
    }

    // Raw filtered windows; the spectrogram is computed here, not in the
    // feature builder, so the export works at any resolution.
    let raw_cfg = ExperimentConfig { feature_mode: FeatureMode::Time, ..exp.clone() };
    let recordings = cfg.load_recordings()?;
    let windows = prepare_windows(&recordings, &raw_cfg)?;
    let window = windows.get(window_index).ok_or_else(|| {
        Error::validation(format!(
            "window index {window_index} out of range; {} windows available",
            windows.len()
        ))
    })?;
    let pos = window
        .channel_names
        .iter()
        .position(|&n| n == channel)
        .expect("channel checked against modality set");

    let full = spectrogram(
        &window.channels[pos],
        &exp.stft,
        cattle_activity::dataset::SAMPLE_RATE_HZ,
    )?;
    let plane = resize_to_percent(&full, exp.resolution_percent)?;

    open_out_dir(out, cfg)?;
    write_text(out, "spectrogram.csv", &plane_to_csv(&plane))?;
    write_text(out, "spectrogram.pgm", &plane_to_pgm(&plane))?;
    println!(
        "window {} ({}, label {}), channel {channel}: {} x {} at {}%",
        window_index,
        window.animal_id,
        window.label,
        plane.rows,
        plane.cols,
        exp.resolution_percent
    );
    println!("wrote {} and {}", out.join("spectrogram.csv").display(), out.join("spectrogram.pgm").display());
    Ok(())
}
