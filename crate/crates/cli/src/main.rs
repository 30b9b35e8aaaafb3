//! Activity classification pipeline for collar-mounted IMU recordings:
//! synthetic data generation, training, cross-validated evaluation, a
//! latency/accuracy resolution sweep, and spectrogram export.
//!
//! Exit codes: 0 success, 1 validation error, 2 runtime (I/O) error.

mod commands;
mod config;
mod pgm;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cattle_activity::{Error, Result};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "cattle-activity", version, about = "IMU cattle-activity classification pipeline")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled dataset as CSV
    Synth {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        data: DataArgs,
        /// Overwrite an existing dataset.csv
        #[arg(long)]
        force: bool,
    },
    /// Train a model on the full dataset and save it with its sidecar
    Train {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Cross-validate and write the evaluation report
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Sweep spectrogram resolutions: inference latency, size, and F1
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        eval: EvalArgs,
        /// Comma-separated resolution percents to sweep
        #[arg(long, value_delimiter = ',')]
        resolutions: Option<Vec<u32>>,
        /// Timing iterations per sweep point
        #[arg(long)]
        iterations: Option<usize>,
        /// Permit sweep points outside {100, 50, 20, 10}
        #[arg(long)]
        allow_any_resolution: bool,
    },
    /// Export one window's spectrogram as CSV and PGM
    Spectrogram {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Channel to export (ax, ay, az, mx, my, mz, gx, gy, gz)
        #[arg(long, default_value = "ax")]
        channel: String,
        /// Which window, counting across recordings in order
        #[arg(long, default_value_t = 0)]
        window_index: usize,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file; explicit flags override its values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory (created if missing)
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Master seed for every random choice in the run
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DataArgs {
    /// Data source: synth or csv
    #[arg(long, value_name = "SOURCE")]
    data: Option<String>,
    /// Input CSV when --data csv
    #[arg(long, value_name = "FILE")]
    csv_path: Option<PathBuf>,
    /// Number of synthetic animals
    #[arg(long)]
    animals: Option<usize>,
    /// Seconds of synthetic signal per class per animal
    #[arg(long)]
    duration_per_class: Option<f64>,
    /// Synthetic sensor noise level
    #[arg(long)]
    noise_std: Option<f64>,
    /// Nine comma-separated class shares summing to 1
    #[arg(long, value_delimiter = ',', value_name = "P1,..,P9")]
    class_distribution: Option<Vec<f64>>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Window length in seconds (5, 10, or 15)
    #[arg(long)]
    window_duration: Option<f64>,
    /// Window overlap fraction (0, 0.4, or 0.8)
    #[arg(long)]
    window_overlap: Option<f64>,
    /// Sensor set: accel, accel+mag, accel+gyro, or all
    #[arg(long)]
    modalities: Option<String>,
    /// Feature representation: time or tfd
    #[arg(long)]
    representation: Option<String>,
    /// Spectrogram resolution percent
    #[arg(long)]
    resolution: Option<u32>,
    /// STFT segment length in samples
    #[arg(long)]
    segment_len: Option<usize>,
    /// STFT hop in samples
    #[arg(long)]
    hop: Option<usize>,
    /// FFT length in samples
    #[arg(long)]
    fft_len: Option<usize>,
    /// Bandpass low edge in Hz
    #[arg(long)]
    band_low: Option<f64>,
    /// Bandpass high edge in Hz
    #[arg(long)]
    band_high: Option<f64>,
    /// Training epochs
    #[arg(long)]
    epochs: Option<usize>,
    /// Mini-batch size
    #[arg(long)]
    batch_size: Option<usize>,
    /// Adam learning rate
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Collapse the label set to grazing / lying / standing
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    three_class: Option<bool>,
}

#[derive(Args)]
struct EvalArgs {
    /// Cross-validation scheme: scv or loocv
    #[arg(long)]
    scheme: Option<String>,
    /// Fold count for stratified CV
    #[arg(long)]
    folds: Option<usize>,
}

fn modality_flags(s: &str) -> Result<(bool, bool)> {
    match s {
        "accel" => Ok((false, false)),
        "accel+mag" => Ok((true, false)),
        "accel+gyro" => Ok((false, true)),
        "all" => Ok((true, true)),
        other => Err(Error::validation(format!(
            "modalities must be accel, accel+mag, accel+gyro, or all (got \"{other}\")"
        ))),
    }
}

macro_rules! set {
    ($target:expr, $value:expr) => {
        if let Some(v) = $value {
            $target = v;
        }
    };
}

/// Defaults, overlaid by the config file, overlaid by explicit flags.
fn build_config(
    common: &CommonArgs,
    data: &DataArgs,
    pipeline: Option<&PipelineArgs>,
    eval: Option<&EvalArgs>,
) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            if !path.is_file() {
                return Err(Error::validation(format!(
                    "config file {} does not exist",
                    path.display()
                )));
            }
            RunConfig::from_file(path)?
        }
        None => RunConfig::default(),
    };

    set!(cfg.seed, common.seed);
    set!(cfg.data.source, data.data.clone());
    set!(cfg.data.csv_path, data.csv_path.clone().map(Some));
    set!(cfg.data.animals, data.animals);
    set!(cfg.data.duration_per_class_s, data.duration_per_class);
    set!(cfg.data.noise_std, data.noise_std);
    set!(cfg.data.class_distribution, data.class_distribution.clone());

    if let Some(p) = pipeline {
        set!(cfg.window.duration_s, p.window_duration);
        set!(cfg.window.overlap, p.window_overlap);
        if let Some(m) = &p.modalities {
            let (mag, gyro) = modality_flags(m)?;
            cfg.modalities.mag = mag;
            cfg.modalities.gyro = gyro;
        }
        set!(cfg.features.representation, p.representation.clone());
        set!(cfg.features.resolution_percent, p.resolution);
        set!(cfg.features.segment_len, p.segment_len);
        set!(cfg.features.hop, p.hop);
        set!(cfg.features.fft_len, p.fft_len);
        set!(cfg.filter.low_hz, p.band_low);
        set!(cfg.filter.high_hz, p.band_high);
        set!(cfg.train.epochs, p.epochs);
        set!(cfg.train.batch_size, p.batch_size);
        set!(cfg.train.learning_rate, p.learning_rate);
        set!(cfg.eval.three_class, p.three_class);
    }
    if let Some(e) = eval {
        set!(cfg.eval.scheme, e.scheme.clone());
        set!(cfg.eval.folds, e.folds);
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Command::Synth { common, data, force } => {
            let cfg = build_config(common, data, None, None)?;
            commands::cmd_synth(&cfg, &common.out, *force)
        }
        Command::Train { common, data, pipeline } => {
            let cfg = build_config(common, data, Some(pipeline), None)?;
            commands::cmd_train(&cfg, &common.out)
        }
        Command::Eval { common, data, pipeline, eval } => {
            let cfg = build_config(common, data, Some(pipeline), Some(eval))?;
            commands::cmd_eval(&cfg, &common.out)
        }
        Command::Bench {
            common,
            data,
            pipeline,
            eval,
            resolutions,
            iterations,
            allow_any_resolution,
        } => {
            let mut cfg = build_config(common, data, Some(pipeline), Some(eval))?;
            set!(cfg.bench.resolutions, resolutions.clone());
            set!(cfg.bench.iterations, *iterations);
            if *allow_any_resolution {
                cfg.bench.allow_any_resolution = true;
            }
            commands::cmd_bench(&cfg, &common.out)
        }
        Command::Spectrogram { common, data, pipeline, channel, window_index } => {
            let cfg = build_config(common, data, Some(pipeline), None)?;
            commands::cmd_spectrogram(&cfg, &common.out, channel, *window_index)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        // I/O failures are runtime errors; everything else is the config or
        // the data failing validation.
        Error::Io(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
