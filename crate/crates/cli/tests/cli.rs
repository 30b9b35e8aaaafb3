//! Binary-level checks: exit codes, artifact layout, determinism, and the
//! config-file / flag precedence rules, all through the real executable.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cattle-activity"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_code(out: &Output, expected: i32) {
    assert_eq!(
        out.status.code(),
        Some(expected),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// One small shared dataset so the pipeline commands have something to chew
/// on without each test paying the synthesis cost.
fn dataset() -> &'static PathBuf {
    use std::sync::OnceLock;
    static DATA: OnceLock<(TempDir, PathBuf)> = OnceLock::new();
    let (_dir, path) = DATA.get_or_init(|| {
        let dir = TempDir::new().unwrap();
        let out = dir.path().join("data");
        let st = bin()
            .args(["synth", "--out"])
            .arg(&out)
            .args(["--animals", "2", "--duration-per-class", "20", "--seed", "5"])
            .status()
            .unwrap();
        assert!(st.success());
        let csv = out.join("dataset.csv");
        (dir, csv)
    });
    path
}

fn csv_arg() -> String {
    dataset().display().to_string()
}

#[test]
fn help_and_version_exit_zero() {
    assert_code(&run(&["--help"]), 0);
    assert_code(&run(&["--version"]), 0);
    assert_code(&run(&["eval", "--help"]), 0);
}

#[test]
fn unknown_flags_and_subcommands_exit_one() {
    assert_code(&run(&["eval", "--bogus"]), 1);
    assert_code(&run(&["transmogrify"]), 1);
    assert_code(&run(&[]), 1);
}

#[test]
fn validation_failures_exit_one_and_write_nothing() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let out_s = out.display().to_string();

    // Referenced path missing.
    let r = run(&["train", "--out", &out_s, "--data", "csv", "--csv-path", "/no/such.csv"]);
    assert_code(&r, 1);
    // Bad enum.
    let r = run(&["eval", "--out", &out_s, "--scheme", "bootstrap"]);
    assert_code(&r, 1);
    // Bad window spec.
    let r = run(&["eval", "--out", &out_s, "--window-duration", "7"]);
    assert_code(&r, 1);
    // Bad band edges.
    let r = run(&["eval", "--out", &out_s, "--band-low", "20", "--band-high", "2"]);
    assert_code(&r, 1);
    // Epochs out of range.
    let r = run(&["eval", "--out", &out_s, "--epochs", "50"]);
    assert_code(&r, 1);

    assert!(!out.exists(), "invalid runs must not create the output dir");
}

#[test]
fn io_failure_exits_two() {
    let tmp = TempDir::new().unwrap();
    let blocker = tmp.path().join("blocker");
    std::fs::write(&blocker, b"file, not dir").unwrap();
    let out = blocker.join("sub").display().to_string();
    let r = run(&["synth", "--out", &out, "--animals", "1", "--duration-per-class", "10"]);
    assert_code(&r, 2);
}

#[test]
fn synth_is_deterministic_and_guards_overwrite() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a").display().to_string();
    let b = tmp.path().join("b").display().to_string();
    let common = ["--animals", "1", "--duration-per-class", "10", "--seed", "9"];

    let r = run(&[&["synth", "--out", a.as_str()], &common[..]].concat());
    assert_code(&r, 0);
    let r = run(&[&["synth", "--out", b.as_str()], &common[..]].concat());
    assert_code(&r, 0);
    assert_eq!(
        read(&tmp.path().join("a/dataset.csv")),
        read(&tmp.path().join("b/dataset.csv")),
        "same seed, byte-identical CSV"
    );

    // Existing dataset refuses a rewrite without --force, keeps the file.
    let before = read(&tmp.path().join("a/dataset.csv"));
    let r = run(&[&["synth", "--out", a.as_str(), "--seed", "10"], &common[..2]].concat());
    assert_code(&r, 1);
    assert_eq!(read(&tmp.path().join("a/dataset.csv")), before);

    let r =
        run(&[&["synth", "--out", a.as_str(), "--force", "--seed", "10"], &common[..2]].concat());
    assert_code(&r, 0);
    assert_ne!(read(&tmp.path().join("a/dataset.csv")), before, "new seed, new data");
}

#[test]
fn train_writes_model_and_reruns_identically() {
    let tmp = TempDir::new().unwrap();
    let csv = csv_arg();
    let args = |out: &str| {
        vec![
            "train".into(),
            "--out".into(),
            out.to_string(),
            "--data".into(),
            "csv".into(),
            "--csv-path".into(),
            csv.clone(),
            "--representation".into(),
            "time".into(),
            "--modalities".into(),
            "accel".into(),
            "--window-duration".into(),
            "5".into(),
            "--window-overlap".into(),
            "0".into(),
            "--epochs".into(),
            "2".into(),
        ]
    };
    let a = tmp.path().join("a").display().to_string();
    let b = tmp.path().join("b").display().to_string();
    assert!(bin().args(args(&a)).status().unwrap().success());
    assert!(bin().args(args(&b)).status().unwrap().success());

    let model = read(&tmp.path().join("a/model.bin"));
    assert_eq!(model, read(&tmp.path().join("b/model.bin")), "rerun, identical checksum");
    assert_eq!(&model[..8], b"MLPMODEL");

    let sidecar: serde_json::Value =
        serde_json::from_slice(&read(&tmp.path().join("a/model.json"))).unwrap();
    // 3 accel channels x 5 s x 50 Hz.
    assert_eq!(sidecar["dims"][0], 750);
    assert_eq!(sidecar["normalization"].as_array().unwrap().len(), 3);
    assert_eq!(sidecar["loss_history"].as_array().unwrap().len(), 2);
    assert!(sidecar["num_params"].as_u64().unwrap() > 0);
    assert!(tmp.path().join("a/config.toml").exists());
}

#[test]
fn eval_reports_are_reproducible_and_complete() {
    let tmp = TempDir::new().unwrap();
    let csv = csv_arg();
    let run_eval = |out: &str| {
        bin()
            .args(["eval", "--out", out, "--data", "csv", "--csv-path", &csv])
            .args(["--representation", "time", "--modalities", "accel"])
            .args(["--window-duration", "5", "--window-overlap", "0"])
            .args(["--epochs", "2", "--folds", "3", "--seed", "21"])
            .status()
            .unwrap()
    };
    let a = tmp.path().join("a").display().to_string();
    let b = tmp.path().join("b").display().to_string();
    assert!(run_eval(&a).success());
    assert!(run_eval(&b).success());
    assert_eq!(
        read(&tmp.path().join("a/report.json")),
        read(&tmp.path().join("b/report.json")),
        "same config, byte-identical report"
    );

    let report: serde_json::Value =
        serde_json::from_slice(&read(&tmp.path().join("a/report.json"))).unwrap();
    assert_eq!(report["folds"].as_array().unwrap().len(), 3);
    assert_eq!(report["scheme"], "stratified");

    let confusion = String::from_utf8(read(&tmp.path().join("a/confusion.csv"))).unwrap();
    assert!(confusion.starts_with("predicted,"));
    let losses = String::from_utf8(read(&tmp.path().join("a/losses.csv"))).unwrap();
    assert!(losses.starts_with("fold,epoch,loss\n"));
    // 3 folds x 2 epochs + header.
    assert_eq!(losses.lines().count(), 7);
}

#[test]
fn loocv_scheme_yields_one_fold_per_animal() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o").display().to_string();
    let csv = csv_arg();
    let st = bin()
        .args(["eval", "--out", &out, "--data", "csv", "--csv-path", &csv])
        .args(["--representation", "time", "--modalities", "accel"])
        .args(["--window-duration", "5", "--window-overlap", "0"])
        .args(["--epochs", "2", "--scheme", "loocv"])
        .status()
        .unwrap();
    assert!(st.success());
    let report: serde_json::Value =
        serde_json::from_slice(&read(&tmp.path().join("o/report.json"))).unwrap();
    // The shared dataset has two animals.
    assert_eq!(report["folds"].as_array().unwrap().len(), 2);
    assert_eq!(report["scheme"], "leave-one-subject-out");
}

#[test]
fn bench_sweep_has_one_row_per_resolution_matching_trained_models() {
    let tmp = TempDir::new().unwrap();
    let csv = csv_arg();
    let out = tmp.path().join("sweep").display().to_string();
    let pipeline = ["--window-duration", "10", "--window-overlap", "0.4", "--epochs", "2"];
    let st = bin()
        .args(["bench", "--out", &out, "--data", "csv", "--csv-path", &csv])
        .args(pipeline)
        .args(["--folds", "2", "--resolutions", "20,10", "--iterations", "10"])
        .status()
        .unwrap();
    assert!(st.success());

    let sweep = String::from_utf8(read(&tmp.path().join("sweep/sweep.csv"))).unwrap();
    let lines: Vec<&str> = sweep.lines().collect();
    assert_eq!(lines[0], "resolution,mean_us,median_us,p95_us,iterations,params,weighted_f1,hardware");
    assert_eq!(lines.len(), 3, "header + one row per resolution");
    assert!(lines[1].starts_with("20,"));
    assert!(lines[2].starts_with("10,"));

    // The params column must match what train writes to disk at the same
    // resolution.
    let sweep_params: u64 = lines[2].split(',').nth(5).unwrap().parse().unwrap();
    let tout = tmp.path().join("t10").display().to_string();
    let st = bin()
        .args(["train", "--out", &tout, "--data", "csv", "--csv-path", &csv])
        .args(pipeline)
        .args(["--resolution", "10"])
        .status()
        .unwrap();
    assert!(st.success());
    let sidecar: serde_json::Value =
        serde_json::from_slice(&read(&tmp.path().join("t10/model.json"))).unwrap();
    assert_eq!(sidecar["num_params"].as_u64().unwrap(), sweep_params);
}

#[test]
fn bench_rejects_nonstandard_resolutions_without_override() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o").display().to_string();
    let csv = csv_arg();
    let base = |extra: &[&str]| {
        let mut cmd = bin();
        cmd.args(["bench", "--out", &out, "--data", "csv", "--csv-path", &csv])
            .args(["--window-duration", "10", "--window-overlap", "0.4"])
            .args(["--epochs", "2", "--folds", "2", "--iterations", "5"])
            .args(extra);
        cmd.output().unwrap()
    };

    let r = base(&["--resolutions", "37"]);
    assert_code(&r, 1);
    assert!(!tmp.path().join("o").exists());

    let r = base(&["--resolutions", "37", "--allow-any-resolution"]);
    assert_code(&r, 0);
    let sweep = String::from_utf8(read(&tmp.path().join("o/sweep.csv"))).unwrap();
    assert!(sweep.lines().nth(1).unwrap().starts_with("37,"));

    // Time-domain features have no resolution axis to sweep.
    let r = base(&["--representation", "time"]);
    assert_code(&r, 1);
}

#[test]
fn spectrogram_export_dims_scale_with_resolution() {
    let tmp = TempDir::new().unwrap();
    let csv = csv_arg();
    let export = |out: &str, pct: &str| {
        bin()
            .args(["spectrogram", "--out", out, "--data", "csv", "--csv-path", &csv])
            .args(["--window-duration", "10", "--window-overlap", "0"])
            .args(["--resolution", pct, "--channel", "gz", "--window-index", "2"])
            .status()
            .unwrap()
    };
    let full = tmp.path().join("full").display().to_string();
    let tenth = tmp.path().join("tenth").display().to_string();
    assert!(export(&full, "100").success());
    assert!(export(&tenth, "10").success());

    let dims = |dir: &str| {
        let text = String::from_utf8(read(&tmp.path().join(dir).join("spectrogram.csv"))).unwrap();
        let rows = text.lines().count();
        let cols = text.lines().next().unwrap().split(',').count();
        (rows, cols)
    };
    let (r100, c100) = dims("full");
    let (r10, c10) = dims("tenth");
    assert_eq!((r100, c100), (129, 123));
    assert_eq!((r10, c10), (13, 12), "about a tenth per axis");

    let pgm = String::from_utf8(read(&tmp.path().join("full/spectrogram.pgm"))).unwrap();
    assert_eq!(pgm.lines().next(), Some("P2"));
    assert_eq!(pgm.lines().nth(1), Some("123 129"));

    // Re-export is deterministic.
    let again = tmp.path().join("again").display().to_string();
    assert!(export(&again, "100").success());
    assert_eq!(
        read(&tmp.path().join("full/spectrogram.csv")),
        read(&tmp.path().join("again/spectrogram.csv"))
    );

    // Unknown channel and out-of-range window are validation errors.
    let r = bin()
        .args(["spectrogram", "--out", &full, "--data", "csv", "--csv-path", &csv])
        .args(["--channel", "qq"])
        .output()
        .unwrap();
    assert_code(&r, 1);
    let r = bin()
        .args(["spectrogram", "--out", &full, "--data", "csv", "--csv-path", &csv])
        .args(["--window-duration", "10", "--window-overlap", "0", "--window-index", "99999"])
        .output()
        .unwrap();
    assert_code(&r, 1);
}

#[test]
fn all_zero_window_exports_all_zero_matrix() {
    let tmp = TempDir::new().unwrap();
    // Hand-built CSV: one animal, 500 samples of silence, constant label.
    let mut csv = String::from("animal_id,t_index,ax,ay,az,mx,my,mz,gx,gy,gz,label\n");
    for t in 0..500 {
        csv.push_str(&format!("cow-0,{t},0,0,0,0,0,0,0,0,0,2\n"));
    }
    let data = tmp.path().join("zeros.csv");
    std::fs::write(&data, csv).unwrap();

    let out = tmp.path().join("o").display().to_string();
    let st = bin()
        .args(["spectrogram", "--out", &out, "--data", "csv"])
        .arg("--csv-path")
        .arg(&data)
        .args(["--window-duration", "10", "--window-overlap", "0"])
        .status()
        .unwrap();
    assert!(st.success());
    let text = String::from_utf8(read(&tmp.path().join("o/spectrogram.csv"))).unwrap();
    for line in text.lines() {
        for cell in line.split(',') {
            assert_eq!(cell.parse::<f64>().unwrap(), 0.0);
        }
    }
}

#[test]
fn config_file_loads_and_flags_take_precedence() {
    let tmp = TempDir::new().unwrap();
    let csv = csv_arg();
    let cfg_path = tmp.path().join("run.toml");
    std::fs::write(
        &cfg_path,
        format!(
            "seed = 77\n\
             [data]\nsource = \"csv\"\ncsv_path = \"{csv}\"\n\
             [window]\nduration_s = 5.0\noverlap = 0.0\n\
             [modalities]\nmag = false\ngyro = false\n\
             [features]\nrepresentation = \"time\"\n\
             [train]\nepochs = 2\n\
             [eval]\nfolds = 4\n"
        ),
    )
    .unwrap();
    let cfg_s = cfg_path.display().to_string();

    // File alone: 4 folds.
    let a = tmp.path().join("a").display().to_string();
    let st = bin().args(["eval", "--out", &a, "--config", &cfg_s]).status().unwrap();
    assert!(st.success());
    let report: serde_json::Value =
        serde_json::from_slice(&read(&tmp.path().join("a/report.json"))).unwrap();
    assert_eq!(report["folds"].as_array().unwrap().len(), 4);

    // Flag overrides the file: 3 folds, and the echoed config agrees.
    let b = tmp.path().join("b").display().to_string();
    let st = bin()
        .args(["eval", "--out", &b, "--config", &cfg_s, "--folds", "3"])
        .status()
        .unwrap();
    assert!(st.success());
    let report: serde_json::Value =
        serde_json::from_slice(&read(&tmp.path().join("b/report.json"))).unwrap();
    assert_eq!(report["folds"].as_array().unwrap().len(), 3);
    let echoed = String::from_utf8(read(&tmp.path().join("b/config.toml"))).unwrap();
    assert!(echoed.contains("folds = 3"));
    assert!(echoed.contains("seed = 77"), "file values survive where not overridden");

    // Unknown keys in the file are validation errors.
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "sede = 7\n").unwrap();
    let r = run(&["eval", "--out", &a, "--config", &bad.display().to_string()]);
    assert_code(&r, 1);

    // Missing config file is a validation error too.
    let r = run(&["eval", "--out", &a, "--config", "/no/run.toml"]);
    assert_code(&r, 1);
}

#[test]
fn three_class_flag_shrinks_the_report_matrices() {
    let tmp = TempDir::new().unwrap();
    let csv = csv_arg();
    let out = tmp.path().join("o").display().to_string();
    let st = bin()
        .args(["eval", "--out", &out, "--data", "csv", "--csv-path", &csv])
        .args(["--representation", "time", "--modalities", "accel"])
        .args(["--window-duration", "5", "--window-overlap", "0"])
        .args(["--epochs", "2", "--folds", "2", "--three-class"])
        .status()
        .unwrap();
    assert!(st.success());
    let report: serde_json::Value =
        serde_json::from_slice(&read(&tmp.path().join("o/report.json"))).unwrap();
    assert_eq!(report["class_ids"].as_array().unwrap().len(), 3);
    assert_eq!(
        report["class_names"],
        serde_json::json!(["grazing", "lying", "standing"])
    );
    let counts = report["aggregate"]["counts"].as_array().unwrap();
    assert_eq!(counts.len(), 9, "3x3 matrix");
}
