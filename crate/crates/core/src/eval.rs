//! Model evaluation: confusion matrices, stratified k-fold and
//! leave-one-subject-out cross-validation, and the pipeline driver that
//! turns raw recordings into per-fold reports.
//!
//! Recordings are bandpass-filtered in full (accelerometer channels only),
//! segmented into windows, optionally mapped to the 3-class scheme, and
//! turned into features once. Normalization is the only per-fold stage: its
//! parameters are fit on each fold's training windows and applied to both
//! splits, so no test information leaks into training.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{ActivityClass, IMURecording, ModalitySet, SAMPLE_RATE_HZ};
use crate::mlp::{AdamState, Mlp, TrainConfig, DEFAULT_LEARNING_RATE};
use crate::preprocess::{
    apply_minmax, design_bandpass, filter_recording, fit_minmax, segment, LabeledWindow,
    WindowSpec,
};
use crate::tfd::{resize_to_percent, spectrogram, StftConfig};
use crate::{mix_seed, Error, Result};

/// Confusion counts with predictions on rows and ground truth on columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub class_ids: Vec<u8>,
    pub class_names: Vec<String>,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(class_ids: Vec<u8>, class_names: Vec<String>) -> Result<ConfusionMatrix> {
        if class_ids.is_empty() || class_ids.len() != class_names.len() {
            return Err(Error::validation("class ids and names must match and be non-empty"));
        }
        if class_ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("class ids must be strictly increasing"));
        }
        let n = class_ids.len();
        Ok(ConfusionMatrix { class_ids, class_names, counts: vec![0; n * n] })
    }

    pub fn size(&self) -> usize {
        self.class_ids.len()
    }

    fn index_of(&self, id: u8) -> Result<usize> {
        self.class_ids
            .binary_search(&id)
            .map_err(|_| Error::validation(format!("label id {id} not tracked by this matrix")))
    }

    pub fn record(&mut self, predicted_id: u8, true_id: u8) -> Result<()> {
        let p = self.index_of(predicted_id)?;
        let t = self.index_of(true_id)?;
        let n = self.size();
        self.counts[p * n + t] += 1;
        Ok(())
    }

    /// Count at (predicted index, true index).
    pub fn count(&self, p: usize, t: usize) -> u64 {
        self.counts[p * self.size() + t]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Ground-truth occurrences of class index `t` (column sum).
    pub fn support(&self, t: usize) -> u64 {
        (0..self.size()).map(|p| self.count(p, t)).sum()
    }

    /// Times class index `p` was predicted (row sum).
    pub fn predicted(&self, p: usize) -> u64 {
        (0..self.size()).map(|t| self.count(p, t)).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let hits: u64 = (0..self.size()).map(|i| self.count(i, i)).sum();
        hits as f64 / total as f64
    }

    /// Per-class precision; 0 when the class was never predicted.
    pub fn precision(&self, i: usize) -> f64 {
        let denom = self.predicted(i);
        if denom == 0 {
            0.0
        } else {
            self.count(i, i) as f64 / denom as f64
        }
    }

    /// Per-class recall; 0 when the class never occurred.
    pub fn recall(&self, i: usize) -> f64 {
        let denom = self.support(i);
        if denom == 0 {
            0.0
        } else {
            self.count(i, i) as f64 / denom as f64
        }
    }

    /// Per-class F1; 0 when precision + recall is 0.
    pub fn f1(&self, i: usize) -> f64 {
        let p = self.precision(i);
        let r = self.recall(i);
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    /// F1 averaged with ground-truth support as weights.
    pub fn weighted_f1(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (0..self.size())
            .map(|i| self.f1(i) * self.support(i) as f64)
            .sum::<f64>()
            / total as f64
    }

    /// Adds another matrix over the same classes into this one.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if self.class_ids != other.class_ids {
            return Err(Error::validation("cannot merge matrices over different classes"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    /// CSV with one row per predicted class and one column per true class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("predicted");
        for name in &self.class_names {
            out.push_str(&format!(",true_{name}"));
        }
        out.push('\n');
        for p in 0..self.size() {
            out.push_str(&self.class_names[p]);
            for t in 0..self.size() {
                out.push_str(&format!(",{}", self.count(p, t)));
            }
            out.push('\n');
        }
        out
    }
}

/// Stratified k-fold split: returns each fold's test indices. Within every
/// class the (seeded) shuffled samples go round-robin to folds, with the
/// starting fold rotated per class so remainders spread evenly, which keeps
/// every fold's share of each class within one sample of every other fold's.
pub fn stratified_folds(labels: &[u8], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::validation(format!("need at least 2 folds (got {k})")));
    }
    if labels.len() < k {
        return Err(Error::validation(format!(
            "cannot split {} samples into {k} folds",
            labels.len()
        )));
    }
    let mut by_class: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }

    let mut folds = vec![Vec::new(); k];
    for (c, (&label, indices)) in by_class.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, label as u64));
        for i in (1..indices.len()).rev() {
            let j = rng.gen_range(0..=i);
            indices.swap(i, j);
        }
        for (i, &idx) in indices.iter().enumerate() {
            folds[(i + c) % k].push(idx);
        }
    }
    for (f, fold) in folds.iter_mut().enumerate() {
        if fold.is_empty() {
            return Err(Error::validation(format!(
                "fold {f} would be empty; use fewer folds"
            )));
        }
        fold.sort_unstable();
    }
    Ok(folds)
}

/// Leave-one-subject-out split over per-window animal ids: one fold per
/// distinct animal (sorted), holding out all of that animal's windows.
pub fn loso_folds(animal_ids: &[&str]) -> Result<Vec<(String, Vec<usize>)>> {
    let mut by_animal: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, id) in animal_ids.iter().enumerate() {
        by_animal.entry(id).or_default().push(i);
    }
    if by_animal.len() < 2 {
        return Err(Error::validation(format!(
            "leave-one-subject-out needs at least 2 animals (got {})",
            by_animal.len()
        )));
    }
    Ok(by_animal
        .into_iter()
        .map(|(id, idx)| (id.to_string(), idx))
        .collect())
}

/// Maps a 9-class label into the reduced 3-class scheme: grazing stays,
/// both lying postures merge, standing stays. Everything else is dropped.
pub fn reduce_to_three(label: u8) -> Option<u8> {
    match label {
        1 => Some(1),
        3 | 4 => Some(2),
        5 => Some(3),
        _ => None,
    }
}

pub const THREE_CLASS_NAMES: [&str; 3] = ["grazing", "lying", "standing"];

/// Feature construction mode: raw normalized samples, or spectrogram planes
/// at a chosen resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    Time,
    TimeFrequency,
}

/// Everything one evaluation run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub window: WindowSpec,
    pub modalities: ModalitySet,
    pub feature_mode: FeatureMode,
    pub stft: StftConfig,
    pub resolution_percent: u32,
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub train: TrainConfig,
    pub learning_rate: f64,
    pub model_seed: u64,
    pub folds: usize,
    pub three_class: bool,
}

impl Default for ExperimentConfig {
    fn default() -> ExperimentConfig {
        ExperimentConfig {
            window: WindowSpec::new(10.0, 0.8).expect("default window is valid"),
            modalities: ModalitySet::all(),
            feature_mode: FeatureMode::TimeFrequency,
            stft: StftConfig::default(),
            resolution_percent: 100,
            band_low_hz: 2.0,
            band_high_hz: 20.0,
            train: TrainConfig::default(),
            learning_rate: DEFAULT_LEARNING_RATE,
            model_seed: 42,
            folds: 10,
            three_class: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.modalities.validate()?;
        self.stft.validate()?;
        self.train.validate()?;
        if self.resolution_percent == 0 || self.resolution_percent > 100 {
            return Err(Error::validation(format!(
                "resolution percent must be in 1..=100 (got {})",
                self.resolution_percent
            )));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::validation("learning rate must be positive"));
        }
        if self.folds < 2 {
            return Err(Error::validation("need at least 2 folds"));
        }
        // Surfaces bad band edges at validation time instead of mid-run.
        design_bandpass(self.band_low_hz, self.band_high_hz, SAMPLE_RATE_HZ)?;
        Ok(())
    }
}

/// Filters, segments, reduces labels, and builds per-channel features for
/// every recording. The returned windows carry feature data in `channels`:
/// raw samples in time mode, flattened resized spectrogram planes in
/// time-frequency mode.
pub fn prepare_windows(
    recordings: &[IMURecording],
    cfg: &ExperimentConfig,
) -> Result<Vec<LabeledWindow>> {
    cfg.validate()?;
    if recordings.is_empty() {
        return Err(Error::validation("no recordings to process"));
    }
    for rec in recordings {
        rec.validate()?;
    }
    let filter = design_bandpass(cfg.band_low_hz, cfg.band_high_hz, SAMPLE_RATE_HZ)?;

    let mut windows = Vec::new();
    for rec in recordings {
        let filtered = filter_recording(rec, &filter);
        windows.extend(segment(&filtered, &cfg.window, &cfg.modalities));
    }
    if cfg.three_class {
        windows.retain_mut(|w| match reduce_to_three(w.label) {
            Some(l) => {
                w.label = l;
                true
            }
            None => false,
        });
    }
    if windows.is_empty() {
        return Err(Error::validation(
            "segmentation produced no windows (recordings too short or all labels dropped)",
        ));
    }

    match cfg.feature_mode {
        FeatureMode::Time => Ok(windows),
        FeatureMode::TimeFrequency => {
            for w in &mut windows {
                for ch in &mut w.channels {
                    let plane = spectrogram(ch, &cfg.stft, SAMPLE_RATE_HZ)?;
                    let small = resize_to_percent(&plane, cfg.resolution_percent)?;
                    *ch = small.data;
                }
            }
            Ok(windows)
        }
    }
}

/// Concatenates a window's channels into one model input.
pub fn flatten_features(w: &LabeledWindow) -> Vec<f64> {
    let mut out = Vec::with_capacity(w.channels.iter().map(Vec::len).sum());
    for ch in &w.channels {
        out.extend_from_slice(ch);
    }
    out
}

/// Sorted distinct labels across windows, with display names.
pub fn class_table(windows: &[LabeledWindow], three_class: bool) -> (Vec<u8>, Vec<String>) {
    let mut ids: Vec<u8> = windows.iter().map(|w| w.label).collect();
    ids.sort_unstable();
    ids.dedup();
    let names = ids
        .iter()
        .map(|&id| {
            if three_class {
                THREE_CLASS_NAMES[(id - 1) as usize].to_string()
            } else {
                ActivityClass::from_id(id)
                    .map(|c| c.name().to_string())
                    .unwrap_or_else(|| format!("class_{id}"))
            }
        })
        .collect();
    (ids, names)
}

/// One cross-validation fold's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub name: String,
    pub train_size: usize,
    pub test_size: usize,
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub epoch_losses: Vec<f64>,
    pub confusion: ConfusionMatrix,
}

/// Full cross-validation outcome. `weighted_f1` aggregates fold results:
/// pooled over the merged matrix for stratified CV, test-size-weighted mean
/// of fold scores for leave-one-subject-out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scheme: String,
    pub class_ids: Vec<u8>,
    pub class_names: Vec<String>,
    pub folds: Vec<FoldReport>,
    pub aggregate: ConfusionMatrix,
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub config: ExperimentConfig,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn run_folds(
    windows: &[LabeledWindow],
    folds: Vec<(String, Vec<usize>)>,
    cfg: &ExperimentConfig,
    scheme: &str,
    pooled_headline: bool,
) -> Result<EvalReport> {
    let (class_ids, class_names) = class_table(windows, cfg.three_class);
    if class_ids.len() < 2 {
        return Err(Error::validation("evaluation needs at least 2 classes present"));
    }
    let index_of = |id: u8| class_ids.binary_search(&id).expect("label seen in table");

    let mut fold_reports = Vec::with_capacity(folds.len());
    let mut aggregate = ConfusionMatrix::new(class_ids.clone(), class_names.clone())?;

    for (fold_idx, (name, test_idx)) in folds.into_iter().enumerate() {
        let mut is_test = vec![false; windows.len()];
        for &i in &test_idx {
            is_test[i] = true;
        }
        let train_idx: Vec<usize> = (0..windows.len()).filter(|&i| !is_test[i]).collect();
        if train_idx.is_empty() {
            return Err(Error::validation(format!("fold {name} has an empty training set")));
        }

        let train_windows: Vec<&LabeledWindow> = train_idx.iter().map(|&i| &windows[i]).collect();
        let owned: Vec<LabeledWindow> = train_windows.iter().map(|&w| w.clone()).collect();
        let norm = fit_minmax(&owned)?;

        let mut features = Vec::with_capacity(train_idx.len());
        let mut labels = Vec::with_capacity(train_idx.len());
        for &i in &train_idx {
            let scaled = apply_minmax(&windows[i], &norm)?;
            features.push(flatten_features(&scaled));
            labels.push(index_of(scaled.label));
        }

        let input_dim = features[0].len();
        let mut model = Mlp::new(input_dim, class_ids.len(), mix_seed(cfg.model_seed, fold_idx as u64))?;
        let mut adam = AdamState::for_model(&model, cfg.learning_rate)?;
        let fold_train = TrainConfig {
            shuffle_seed: mix_seed(cfg.train.shuffle_seed, fold_idx as u64),
            ..cfg.train
        };
        let epoch_losses = model.train(&features, &labels, &fold_train, &mut adam)?;

        let mut confusion = ConfusionMatrix::new(class_ids.clone(), class_names.clone())?;
        for &i in &test_idx {
            let scaled = apply_minmax(&windows[i], &norm)?;
            let pred = model.predict(&flatten_features(&scaled));
            confusion.record(class_ids[pred], scaled.label)?;
        }
        aggregate.merge(&confusion)?;
        fold_reports.push(FoldReport {
            name,
            train_size: train_idx.len(),
            test_size: test_idx.len(),
            accuracy: confusion.accuracy(),
            weighted_f1: confusion.weighted_f1(),
            epoch_losses,
            confusion,
        });
    }

    let weighted_f1 = if pooled_headline {
        aggregate.weighted_f1()
    } else {
        let total: usize = fold_reports.iter().map(|f| f.test_size).sum();
        fold_reports
            .iter()
            .map(|f| f.weighted_f1 * f.test_size as f64)
            .sum::<f64>()
            / total as f64
    };

    Ok(EvalReport {
        scheme: scheme.to_string(),
        class_ids,
        class_names,
        accuracy: aggregate.accuracy(),
        weighted_f1,
        folds: fold_reports,
        aggregate,
        config: cfg.clone(),
    })
}

/// Stratified k-fold cross-validation over prepared feature windows.
pub fn evaluate_stratified(windows: &[LabeledWindow], cfg: &ExperimentConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let labels: Vec<u8> = windows.iter().map(|w| w.label).collect();
    let folds = stratified_folds(&labels, cfg.folds, mix_seed(cfg.model_seed, 0xF01D))?
        .into_iter()
        .enumerate()
        .map(|(i, idx)| (format!("fold-{i}"), idx))
        .collect();
    run_folds(windows, folds, cfg, "stratified", true)
}

/// Leave-one-subject-out cross-validation over prepared feature windows.
pub fn evaluate_loso(windows: &[LabeledWindow], cfg: &ExperimentConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let ids: Vec<&str> = windows.iter().map(|w| w.animal_id.as_str()).collect();
    let folds = loso_folds(&ids)?;
    run_folds(windows, folds, cfg, "leave-one-subject-out", false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synth_generate, SynthConfig};

    fn hand_matrix() -> ConfusionMatrix {
        // pred\true    1    2
        //   1          5    2
        //   2          1    4
        let mut m = ConfusionMatrix::new(vec![1, 2], vec!["a".into(), "b".into()]).unwrap();
        for _ in 0..5 {
            m.record(1, 1).unwrap();
        }
        for _ in 0..2 {
            m.record(1, 2).unwrap();
        }
        m.record(2, 1).unwrap();
        for _ in 0..4 {
            m.record(2, 2).unwrap();
        }
        m
    }

    #[test]
    fn confusion_metrics_match_hand_computation() {
        let m = hand_matrix();
        assert_eq!(m.total(), 12);
        assert_eq!(m.support(0), 6);
        assert_eq!(m.predicted(0), 7);
        assert!((m.accuracy() - 0.75).abs() < 1e-12);
        assert!((m.precision(0) - 5.0 / 7.0).abs() < 1e-12);
        assert!((m.recall(0) - 5.0 / 6.0).abs() < 1e-12);
        assert!((m.f1(0) - 10.0 / 13.0).abs() < 1e-12);
        assert!((m.f1(1) - 8.0 / 11.0).abs() < 1e-12);
        let expected = (6.0 * 10.0 / 13.0 + 6.0 * 8.0 / 11.0) / 12.0;
        assert!((m.weighted_f1() - expected).abs() < 1e-12);
    }

    #[test]
    fn absent_class_scores_zero_not_nan() {
        let mut m = ConfusionMatrix::new(vec![1, 2, 3], vec!["a".into(), "b".into(), "c".into()])
            .unwrap();
        m.record(1, 1).unwrap();
        m.record(2, 1).unwrap();
        assert_eq!(m.precision(2), 0.0);
        assert_eq!(m.recall(2), 0.0);
        assert_eq!(m.f1(2), 0.0);
        assert!(m.weighted_f1().is_finite());
    }

    #[test]
    fn confusion_rejects_unknown_ids_and_bad_merges() {
        let mut m = hand_matrix();
        assert!(m.record(3, 1).is_err());
        let other = ConfusionMatrix::new(vec![1, 3], vec!["a".into(), "c".into()]).unwrap();
        assert!(m.merge(&other).is_err());
        let mut same = hand_matrix();
        same.merge(&hand_matrix()).unwrap();
        assert_eq!(same.total(), 24);
    }

    #[test]
    fn confusion_csv_layout() {
        let m = hand_matrix();
        let csv = m.to_csv();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], "predicted,true_a,true_b");
        assert_eq!(lines[1], "a,5,2");
        assert_eq!(lines[2], "b,1,4");
    }

    #[test]
    fn stratified_folds_are_disjoint_balanced_and_seeded() {
        let mut labels = vec![1u8; 53];
        labels.extend(vec![2u8; 31]);
        labels.extend(vec![3u8; 16]);
        let folds = stratified_folds(&labels, 10, 7).unwrap();
        assert_eq!(folds.len(), 10);

        let mut seen = vec![0u32; labels.len()];
        for fold in &folds {
            for &i in fold {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1), "each index in exactly one fold");

        for class in [1u8, 2, 3] {
            let per_fold: Vec<usize> = folds
                .iter()
                .map(|f| f.iter().filter(|&&i| labels[i] == class).count())
                .collect();
            let min = per_fold.iter().min().unwrap();
            let max = per_fold.iter().max().unwrap();
            assert!(max - min <= 1, "class {class}: {per_fold:?}");
        }

        assert_eq!(stratified_folds(&labels, 10, 7).unwrap(), folds);
        assert_ne!(stratified_folds(&labels, 10, 8).unwrap(), folds);
    }

    #[test]
    fn stratified_folds_validation() {
        assert!(stratified_folds(&[1, 2, 1], 1, 0).is_err());
        assert!(stratified_folds(&[1, 2, 1], 4, 0).is_err());
        // 4 samples in 4 folds but classes offset so one fold is empty.
        let err = stratified_folds(&[1, 1, 1, 2], 4, 0);
        assert!(err.is_err());
    }

    #[test]
    fn loso_folds_group_by_animal_in_sorted_order() {
        let ids = ["cow-b", "cow-a", "cow-b", "cow-a", "cow-c"];
        let folds = loso_folds(&ids).unwrap();
        assert_eq!(folds.len(), 3);
        assert_eq!(folds[0], ("cow-a".to_string(), vec![1, 3]));
        assert_eq!(folds[1], ("cow-b".to_string(), vec![0, 2]));
        assert_eq!(folds[2], ("cow-c".to_string(), vec![4]));
        assert!(loso_folds(&["solo", "solo"]).is_err());
    }

    #[test]
    fn three_class_mapping() {
        assert_eq!(reduce_to_three(1), Some(1));
        assert_eq!(reduce_to_three(3), Some(2));
        assert_eq!(reduce_to_three(4), Some(2));
        assert_eq!(reduce_to_three(5), Some(3));
        for dropped in [2u8, 6, 7, 8, 9] {
            assert_eq!(reduce_to_three(dropped), None);
        }
    }

    fn small_dataset() -> Vec<IMURecording> {
        let mut mix = [0.0; 9];
        mix[0] = 0.5;
        mix[4] = 0.5;
        synth_generate(&SynthConfig {
            seed: 123,
            duration_per_class_s: 16.0,
            class_distribution: mix,
            noise_std: 0.05,
            animals: 2,
        })
        .unwrap()
    }

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            modalities: ModalitySet::accel_only(),
            feature_mode: FeatureMode::Time,
            train: TrainConfig { epochs: 2, batch_size: 32, shuffle_seed: 1 },
            folds: 2,
            ..Default::default()
        }
    }

    #[test]
    fn prepare_windows_builds_time_features() {
        let recs = small_dataset();
        let cfg = small_config();
        let windows = prepare_windows(&recs, &cfg).unwrap();
        // 2 animals x 144 s: (7200 - 500) / 100 + 1 = 68 windows each.
        assert_eq!(windows.len(), 136);
        assert!(windows.iter().all(|w| w.channels.len() == 3));
        assert!(windows.iter().all(|w| w.channels[0].len() == 500));
        let labels: std::collections::BTreeSet<u8> = windows.iter().map(|w| w.label).collect();
        assert!(labels.contains(&1) && labels.contains(&5));
    }

    #[test]
    fn prepare_windows_builds_tfd_features_at_low_resolution() {
        let recs = small_dataset();
        let cfg = ExperimentConfig {
            feature_mode: FeatureMode::TimeFrequency,
            resolution_percent: 10,
            ..small_config()
        };
        let windows = prepare_windows(&recs, &cfg).unwrap();
        // 129x123 plane scaled to 10% is 13x12.
        assert!(windows.iter().all(|w| w.channels[0].len() == 13 * 12));
    }

    #[test]
    fn three_class_drops_unmapped_windows() {
        let recs = small_dataset();
        let cfg = ExperimentConfig { three_class: true, ..small_config() };
        let windows = prepare_windows(&recs, &cfg).unwrap();
        // Class 5 maps to 3, class 1 stays; nothing else was present.
        let labels: std::collections::BTreeSet<u8> = windows.iter().map(|w| w.label).collect();
        assert!(labels.iter().all(|&l| l == 1 || l == 3), "{labels:?}");
        assert!(!windows.is_empty());
    }

    #[test]
    fn stratified_evaluation_is_deterministic_end_to_end() {
        let recs = small_dataset();
        let cfg = small_config();
        let windows = prepare_windows(&recs, &cfg).unwrap();
        let r1 = evaluate_stratified(&windows, &cfg).unwrap();
        let r2 = evaluate_stratified(&windows, &cfg).unwrap();
        assert_eq!(r1.to_json(), r2.to_json());
        assert_eq!(r1.aggregate.total(), windows.len() as u64);
        assert_eq!(r1.folds.len(), 2);
        assert!(r1.weighted_f1 >= 0.0 && r1.weighted_f1 <= 1.0);
        assert!(r1.folds.iter().all(|f| f.epoch_losses.len() == 2));
        // Pooled headline: aggregate matrix drives the top-level score.
        assert!((r1.weighted_f1 - r1.aggregate.weighted_f1()).abs() < 1e-15);
    }

    #[test]
    fn loso_evaluation_weights_folds_by_test_size() {
        let recs = small_dataset();
        let cfg = small_config();
        let windows = prepare_windows(&recs, &cfg).unwrap();
        let report = evaluate_loso(&windows, &cfg).unwrap();
        assert_eq!(report.folds.len(), 2);
        assert_eq!(report.scheme, "leave-one-subject-out");
        let total: usize = report.folds.iter().map(|f| f.test_size).sum();
        let expected: f64 = report
            .folds
            .iter()
            .map(|f| f.weighted_f1 * f.test_size as f64)
            .sum::<f64>()
            / total as f64;
        assert!((report.weighted_f1 - expected).abs() < 1e-15);
        // Every window was tested exactly once.
        assert_eq!(report.aggregate.total(), windows.len() as u64);
    }

    #[test]
    fn experiment_config_validation_catches_bad_fields() {
        let mut cfg = ExperimentConfig::default();
        cfg.resolution_percent = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.band_high_hz = 30.0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.folds = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.learning_rate = -0.5;
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::default().validate().is_ok());
    }
}
