//! Run configuration: a TOML file with sections, every field optional, plus
//! command-line overrides. The merged config is written back into the output
//! directory so a run can always be traced to its exact inputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cattle_activity::dataset::{
    default_class_mix, load_csv, synth_generate, IMURecording, ModalitySet, SynthConfig,
};
use cattle_activity::eval::{ExperimentConfig, FeatureMode};
use cattle_activity::mlp::TrainConfig;
use cattle_activity::preprocess::WindowSpec;
use cattle_activity::tfd::StftConfig;
use cattle_activity::{mix_seed, Error, Result};

// Salts separating the RNG streams derived from the global seed.
const SALT_SYNTH: u64 = 1;
const SALT_MODEL: u64 = 2;
const SALT_SHUFFLE: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every random choice in a run derives from it.
    pub seed: u64,
    pub data: DataSection,
    pub window: WindowSection,
    pub modalities: ModalitiesSection,
    pub features: FeatureSection,
    pub filter: FilterSection,
    pub train: TrainSection,
    pub eval: EvalSection,
    pub bench: BenchSection,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            seed: 42,
            data: DataSection::default(),
            window: WindowSection::default(),
            modalities: ModalitiesSection::default(),
            features: FeatureSection::default(),
            filter: FilterSection::default(),
            train: TrainSection::default(),
            eval: EvalSection::default(),
            bench: BenchSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// "synth" or "csv".
    pub source: String,
    pub csv_path: Option<PathBuf>,
    pub animals: usize,
    pub duration_per_class_s: f64,
    pub noise_std: f64,
    /// Nine class shares summing to 1; defaults to the reference profile.
    pub class_distribution: Vec<f64>,
}

impl Default for DataSection {
    fn default() -> DataSection {
        DataSection {
            source: "synth".into(),
            csv_path: None,
            animals: 3,
            duration_per_class_s: 40.0,
            noise_std: 0.05,
            class_distribution: default_class_mix().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSection {
    pub duration_s: f64,
    pub overlap: f64,
}

impl Default for WindowSection {
    fn default() -> WindowSection {
        WindowSection { duration_s: 10.0, overlap: 0.8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModalitiesSection {
    pub mag: bool,
    pub gyro: bool,
}

impl Default for ModalitiesSection {
    fn default() -> ModalitiesSection {
        ModalitiesSection { mag: true, gyro: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSection {
    /// "tfd" for spectrogram features, "time" for raw samples.
    pub representation: String,
    pub resolution_percent: u32,
    pub segment_len: usize,
    pub hop: usize,
    pub fft_len: usize,
}

impl Default for FeatureSection {
    fn default() -> FeatureSection {
        FeatureSection {
            representation: "tfd".into(),
            resolution_percent: 100,
            segment_len: 256,
            hop: 2,
            fft_len: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSection {
    pub low_hz: f64,
    pub high_hz: f64,
}

impl Default for FilterSection {
    fn default() -> FilterSection {
        FilterSection { low_hz: 2.0, high_hz: 20.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for TrainSection {
    fn default() -> TrainSection {
        TrainSection { epochs: 5, batch_size: 32, learning_rate: 0.001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// "scv" for stratified k-fold, "loso" for leave-one-subject-out.
    pub scheme: String,
    pub folds: usize,
    pub three_class: bool,
}

impl Default for EvalSection {
    fn default() -> EvalSection {
        EvalSection { scheme: "scv".into(), folds: 10, three_class: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub resolutions: Vec<u32>,
    pub iterations: usize,
    /// Standard sweep points are 100, 50, 20, 10; set this to sweep others.
    pub allow_any_resolution: bool,
}

impl Default for BenchSection {
    fn default() -> BenchSection {
        BenchSection {
            resolutions: vec![100, 50, 20, 10],
            iterations: 100,
            allow_any_resolution: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalScheme {
    Stratified,
    LeaveOneSubjectOut,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Core-level configuration shared by train, eval, bench and the
    /// spectrogram export. Field validation happens here; value validation
    /// (band edges, epoch bounds, ...) happens in the core constructors.
    pub fn to_experiment(&self) -> Result<ExperimentConfig> {
        let feature_mode = match self.features.representation.as_str() {
            "time" => FeatureMode::Time,
            "tfd" => FeatureMode::TimeFrequency,
            other => {
                return Err(Error::validation(format!(
                    "representation must be \"time\" or \"tfd\" (got \"{other}\")"
                )))
            }
        };
        let cfg = ExperimentConfig {
            window: WindowSpec::new(self.window.duration_s, self.window.overlap)?,
            modalities: ModalitySet::new(self.modalities.mag, self.modalities.gyro),
            feature_mode,
            stft: StftConfig {
                segment_len: self.features.segment_len,
                hop: self.features.hop,
                fft_len: self.features.fft_len,
            },
            resolution_percent: self.features.resolution_percent,
            band_low_hz: self.filter.low_hz,
            band_high_hz: self.filter.high_hz,
            train: TrainConfig {
                epochs: self.train.epochs,
                batch_size: self.train.batch_size,
                shuffle_seed: mix_seed(self.seed, SALT_SHUFFLE),
            },
            learning_rate: self.train.learning_rate,
            model_seed: mix_seed(self.seed, SALT_MODEL),
            folds: self.eval.folds,
            three_class: self.eval.three_class,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_synth(&self) -> Result<SynthConfig> {
        let d = &self.data;
        if d.class_distribution.len() != 9 {
            return Err(Error::validation(format!(
                "class_distribution needs 9 entries (got {})",
                d.class_distribution.len()
            )));
        }
        let mut class_distribution = [0.0; 9];
        class_distribution.copy_from_slice(&d.class_distribution);
        let cfg = SynthConfig {
            seed: mix_seed(self.seed, SALT_SYNTH),
            duration_per_class_s: d.duration_per_class_s,
            class_distribution,
            noise_std: d.noise_std,
            animals: d.animals,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn scheme(&self) -> Result<EvalScheme> {
        match self.eval.scheme.as_str() {
            "scv" => Ok(EvalScheme::Stratified),
            // Both names circulate for the by-animal split.
            "loso" | "loocv" => Ok(EvalScheme::LeaveOneSubjectOut),
            other => Err(Error::validation(format!(
                "eval scheme must be \"scv\", \"loso\", or \"loocv\" (got \"{other}\")"
            ))),
        }
    }

    pub fn source_is_known(&self) -> Result<()> {
        match self.data.source.as_str() {
            "synth" | "csv" => Ok(()),
            other => Err(Error::validation(format!(
                "data source must be \"synth\" or \"csv\" (got \"{other}\")"
            ))),
        }
    }

    /// Checks the data source declaration, including that a referenced CSV
    /// exists, without reading it.
    pub fn validate_data_source(&self) -> Result<()> {
        self.source_is_known()?;
        match self.data.source.as_str() {
            "synth" => {
                self.to_synth()?;
                Ok(())
            }
            "csv" => match &self.data.csv_path {
                None => Err(Error::validation("data source is \"csv\" but no csv_path is set")),
                Some(p) if !p.is_file() => Err(Error::validation(format!(
                    "csv_path {} does not exist",
                    p.display()
                ))),
                Some(_) => Ok(()),
            },
            _ => unreachable!("source_is_known checked above"),
        }
    }

    pub fn load_recordings(&self) -> Result<Vec<IMURecording>> {
        self.validate_data_source()?;
        match self.data.source.as_str() {
            "synth" => synth_generate(&self.to_synth()?),
            _ => load_csv(self.data.csv_path.as_ref().expect("validated above")),
        }
    }

    /// The sweep points for the bench command; non-standard resolutions are
    /// rejected unless explicitly allowed.
    pub fn bench_resolutions(&self) -> Result<Vec<u32>> {
        if self.bench.resolutions.is_empty() {
            return Err(Error::validation("bench needs at least one resolution"));
        }
        for &pct in &self.bench.resolutions {
            if pct == 0 || pct > 100 {
                return Err(Error::validation(format!(
                    "resolution percent must be in 1..=100 (got {pct})"
                )));
            }
            if !self.bench.allow_any_resolution && ![100, 50, 20, 10].contains(&pct) {
                return Err(Error::validation(format!(
                    "resolution {pct}% is not one of the standard sweep points \
                     (100, 50, 20, 10); pass --allow-any-resolution to sweep it"
                )));
            }
        }
        if self.bench.iterations == 0 {
            return Err(Error::validation("bench needs at least 1 iteration"));
        }
        Ok(self.bench.resolutions.clone())
    }
}
