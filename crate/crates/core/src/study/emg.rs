use std::collections::BTreeMap;

use ndarray::Array2;
use serde::Serialize;

use super::config::EmgConfig;
use crate::decoding::{crossval, emg_mean_power_features, lda_fit, CrossValResult, FeatureLda, LinearModel};
use crate::error::Result;
use crate::paradigm::{emg_crop_window, rest_emg_crop_window, segment_driving, CalibrationSchedule, DrivingRun};
use crate::signal::montage::EMG_LABELS;
use crate::signal::{epoch_extract, Class, MarkerList, Recording};
use crate::stream::{emg_chain_filter, offline_emg_decode, Prediction};

/// Indices of the four EMG channels in their canonical order.
pub fn emg_picks(recording: &Recording) -> Result<Vec<usize>> {
    EMG_LABELS.iter().map(|l| recording.index_of(l)).collect()
}

#[derive(Clone, Debug)]
pub struct EmgCalibration {
    pub model: LinearModel,
    pub features: Array2<f64>,
    pub labels: Vec<Class>,
    pub cv: CrossValResult,
}

/// Mean-power features of the 200 ms hold-phase crops (LEFT/RIGHT) and the
/// matching rest-window crops (REST), after the causal EMG chain.
pub fn emg_calibration_features(
    recording: &Recording,
    schedule: &CalibrationSchedule,
    cfg: &EmgConfig,
) -> Result<(Array2<f64>, Vec<Class>)> {
    let filtered = emg_chain_filter(recording, &emg_picks(recording)?, &cfg.decoder.chain)?;
    let mut crops = Vec::new();
    for t in &schedule.trials {
        crops.push((emg_crop_window(t).0, t.class));
        crops.push((rest_emg_crop_window(t).0, Class::Rest));
    }
    crops.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut markers = MarkerList::new();
    for (t, c) in crops {
        markers.push(t, c)?;
    }
    let ep = epoch_extract(&filtered, &markers, 0.0, cfg.decoder.window_s)?.epochs;
    Ok((emg_mean_power_features(&ep)?, ep.labels))
}

/// LDA on the calibration crops plus its k-fold cross-validation.
pub fn train_emg_decoder(
    recording: &Recording,
    schedule: &CalibrationSchedule,
    cfg: &EmgConfig,
    seed: u64,
) -> Result<EmgCalibration> {
    let (features, labels) = emg_calibration_features(recording, schedule, cfg)?;
    let cv = crossval(
        &FeatureLda {
            features: &features,
            labels: &labels,
        },
        &labels,
        cfg.cv_folds,
        seed,
    )?;
    let model = lda_fit(features.view(), &labels)?;
    Ok(EmgCalibration {
        model,
        features,
        labels,
        cv,
    })
}

/// Causal prediction stream over a session's EMG, identical to what the
/// online decoder emits for the same samples.
pub fn decode_session_emg(recording: &Recording, model: &LinearModel, cfg: &EmgConfig) -> Result<Vec<Prediction>> {
    let emg = recording.pick(&emg_picks(recording)?)?;
    offline_emg_decode(&emg, model, &cfg.decoder)
}

/// Runs of at least 3.75 s in the prediction stream, times relative to the
/// recording start.
pub fn segment_predictions(preds: &[Prediction], t0: f64) -> Result<Vec<DrivingRun>> {
    let stream: Vec<(f64, Class)> = preds.iter().map(|p| (p.time_s - t0, p.class)).collect();
    segment_driving(&stream)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentationSummary {
    pub n_predictions: usize,
    pub n_runs: usize,
    pub runs_per_class: BTreeMap<String, usize>,
}

pub fn summarize_runs(preds: &[Prediction], runs: &[DrivingRun]) -> SegmentationSummary {
    let mut runs_per_class = BTreeMap::new();
    for c in Class::ALL {
        runs_per_class.insert(c.name().to_string(), runs.iter().filter(|r| r.class == c).count());
    }
    SegmentationSummary {
        n_predictions: preds.len(),
        n_runs: runs.len(),
        runs_per_class,
    }
}
