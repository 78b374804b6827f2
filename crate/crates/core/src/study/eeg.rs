use std::collections::BTreeMap;

use ndarray::Array2;
use serde::Serialize;

use super::config::{CspConfig, EegConfig};
use crate::decoding::metrics::{mean_var, pooled_confusion};
use crate::decoding::{
    apply_rest_threshold, evaluate, repeated_crossval, rest_threshold_calibrate, CspLogistic, CspLogisticModel,
    EvalReport, RestThreshold, TrialCovariances,
};
use crate::error::{Error, Result};
use crate::paradigm::EPOCH_WINDOW;
use crate::signal::fir::apply_fir_zero_phase_channels;
use crate::signal::montage::EOG_LABELS;
use crate::signal::{
    common_average_reference, design_fir_bandpass, epoch_extract, peak_to_peak_reject, ChannelKind, Class, Epochs,
    MarkerList, Recording, Volts,
};
use crate::spectral::ica::{eog_correlations, fastica_fit_recording, ica_apply, FastIcaConfig, EOG_CORRELATION_THRESHOLD};
use crate::spectral::IcaDecomposition;

/// Sampling-rate reduction applied once a session is band-limited below
/// the new Nyquist frequency.
pub const ANALYSIS_DECIMATION: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IcaSummary {
    pub n_components: usize,
    pub converged: bool,
    pub n_iter: usize,
    pub rejected: Vec<usize>,
    /// Largest |r| with any EOG channel, per component.
    pub max_eog_correlation: Vec<f64>,
}

/// ICA fitted on `fit_on` (EEG channels), EOG-correlated components marked.
pub fn fit_ica_with_eog(fit_on: &Recording, n_components: usize, seed: u64, label: &str) -> Result<(IcaDecomposition, IcaSummary)> {
    let eeg = fit_on.indices_of_kind(ChannelKind::Eeg);
    let n = n_components.min(eeg.len().saturating_sub(1)).max(1);
    let mut ica = fastica_fit_recording(fit_on, &eeg, &FastIcaConfig::new(n, seed))?;
    ica.fitted_on = label.to_string();
    let corr = eog_correlations(&ica, fit_on, &EOG_LABELS)?;
    let max_eog_correlation: Vec<f64> = corr
        .iter()
        .map(|r| r.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();
    ica.rejected = crate::spectral::ica::components_exceeding(&corr, EOG_CORRELATION_THRESHOLD);
    if !ica.converged {
        log::warn!("{label} ICA did not converge in {} iterations", ica.n_iter);
    }
    let summary = IcaSummary {
        n_components: ica.n_components(),
        converged: ica.converged,
        n_iter: ica.n_iter,
        rejected: ica.rejected.iter().copied().collect(),
        max_eog_correlation,
    };
    Ok((ica, summary))
}

/// EEG and EOG channels only, CAR over EEG, zero-phase FIR band-pass on
/// EEG and EOG, then decimated.
pub fn bandpass_eeg(recording: &Recording, cfg: &EegConfig) -> Result<Recording> {
    let mut keep = recording.indices_of_kind(ChannelKind::Eeg);
    keep.extend(recording.indices_of_kind(ChannelKind::Eog));
    let rec = common_average_reference(&recording.pick(&keep)?, &[ChannelKind::Eeg])?;
    let fir = design_fir_bandpass(
        cfg.band_hz.0,
        cfg.band_hz.1,
        cfg.transition_hz.0,
        cfg.transition_hz.1,
        cfg.fir_length_s,
        rec.fs(),
    )?;
    let all: Vec<usize> = (0..rec.n_channels()).collect();
    let filtered = apply_fir_zero_phase_channels(&fir, &rec, &all)?;
    let nyq_after = filtered.fs() / (2.0 * ANALYSIS_DECIMATION as f64);
    if cfg.band_hz.1 + cfg.transition_hz.1 / 2.0 >= nyq_after {
        return Err(Error::InvalidBand(format!(
            "band edge {} Hz too close to the post-decimation Nyquist {nyq_after} Hz",
            cfg.band_hz.1
        )));
    }
    filtered.downsample(ANALYSIS_DECIMATION)
}

#[derive(Clone, Debug)]
pub struct CleanEeg {
    pub calibration: Recording,
    pub driving: Recording,
    pub ica: IcaDecomposition,
    pub ica_summary: IcaSummary,
}

/// Band-pass both sessions, fit ICA on calibration only and apply it to both.
pub fn preprocess_eeg(calibration: &Recording, driving: &Recording, cfg: &EegConfig, seed: u64) -> Result<CleanEeg> {
    let cal = bandpass_eeg(calibration, cfg)?;
    let drv = bandpass_eeg(driving, cfg)?;
    let (ica, ica_summary) = fit_ica_with_eog(&cal, cfg.ica_components, seed, "calibration")?;
    Ok(CleanEeg {
        calibration: ica_apply(&ica, &cal)?,
        driving: ica_apply(&ica, &drv)?,
        ica,
        ica_summary,
    })
}

#[derive(Clone, Debug)]
pub struct TrialSet {
    /// EEG channels only, in chronological order.
    pub epochs: Epochs,
    pub n_rejected: usize,
    pub n_dropped: usize,
}

/// Cuts `window` around class markers, keeps EEG channels, rejects trials
/// exceeding `reject_uv` peak to peak.
pub fn eeg_trials(recording: &Recording, markers: &MarkerList, window: (f64, f64), reject_uv: f64) -> Result<TrialSet> {
    let eeg = recording.pick_kind(ChannelKind::Eeg)?;
    let ex = epoch_extract(&eeg, markers, window.0, window.1)?;
    let (epochs, n_rejected) = peak_to_peak_reject(&ex.epochs, Volts::from_microvolts(reject_uv));
    Ok(TrialSet {
        epochs: epochs.sorted_by_onset(),
        n_rejected,
        n_dropped: ex.dropped,
    })
}

/// Classification trials (movement onset to trial end).
pub fn classification_trials(recording: &Recording, markers: &MarkerList, reject_uv: f64) -> Result<TrialSet> {
    eeg_trials(recording, markers, EPOCH_WINDOW, reject_uv)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvSummary {
    /// Mean over repeats.
    pub macro_f1: f64,
    pub macro_f1_var: f64,
    pub macro_f1_runs: Vec<f64>,
    /// Mean over repeats.
    pub per_class_f1: BTreeMap<String, f64>,
    /// Summed over repeats; rows true, columns predicted, `classes` order.
    pub confusion: Vec<Vec<usize>>,
    pub classes: Vec<Class>,
    pub n_trials: usize,
    pub n_rejected: usize,
    pub trials_per_class: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferSummary {
    pub macro_f1: f64,
    pub per_class_f1: BTreeMap<String, f64>,
    pub confusion: Vec<Vec<usize>>,
    pub classes: Vec<Class>,
    /// Trials evaluated (after the threshold split).
    pub n_trials: usize,
    pub accuracy: f64,
    pub threshold: RestThreshold,
    pub n_rejected: usize,
}

impl TransferSummary {
    pub fn report(&self) -> EvalReport {
        EvalReport {
            macro_f1: self.macro_f1,
            per_class_f1: self.per_class_f1.clone(),
            confusion: self.confusion.clone(),
            n_trials: self.n_trials,
            classes: self.classes.clone(),
            accuracy: self.accuracy,
        }
    }
}

fn class_counts(labels: &[Class]) -> BTreeMap<String, usize> {
    Class::ALL
        .iter()
        .map(|c| (c.name().to_string(), labels.iter().filter(|l| *l == c).count()))
        .collect()
}

fn pipeline<'a>(cache: &'a TrialCovariances, labels: &'a [Class], cfg: &CspConfig) -> CspLogistic<'a> {
    CspLogistic {
        cache,
        labels,
        n_filters: cfg.n_filters,
        shrinkage: cfg.shrinkage,
        l2: cfg.l2,
    }
}

/// Repeated stratified k-fold CV of shrinkage CSP + logistic regression.
pub fn session_crossval(trials: &TrialSet, cfg: &CspConfig, seed: u64) -> Result<CvSummary> {
    let labels = &trials.epochs.labels;
    let cache = TrialCovariances::from_epochs(&trials.epochs)?;
    let rep = repeated_crossval(&pipeline(&cache, labels, cfg), labels, cfg.cv_folds, cfg.cv_repeats, seed)?;
    let reports: Vec<&EvalReport> = rep.runs.iter().map(|r| &r.report).collect();
    let classes = reports[0].classes.clone();
    let mut per_class_f1 = BTreeMap::new();
    for c in &classes {
        let v: Vec<f64> = reports.iter().filter_map(|r| r.f1(*c)).collect();
        per_class_f1.insert(c.name().to_string(), mean_var(&v).0);
    }
    Ok(CvSummary {
        macro_f1: rep.mean_macro_f1,
        macro_f1_var: rep.var_macro_f1,
        macro_f1_runs: reports.iter().map(|r| r.macro_f1).collect(),
        per_class_f1,
        confusion: pooled_confusion(reports.iter().copied()).unwrap_or_default(),
        classes,
        n_trials: labels.len(),
        n_rejected: trials.n_rejected,
        trials_per_class: class_counts(labels),
    })
}

/// Model fitted on every trial of a session.
pub fn fit_session_model(trials: &TrialSet, cfg: &CspConfig) -> Result<(CspLogisticModel, TrialCovariances)> {
    let cache = TrialCovariances::from_epochs(&trials.epochs)?;
    let model = pipeline(&cache, &trials.epochs.labels, cfg).fit_all()?;
    Ok((model, cache))
}

/// Calibration model on driving trials: θ from the first split, macro-F1 on
/// the rest.
pub fn transfer_evaluate(model: &CspLogisticModel, driving: &TrialSet, cfg: &CspConfig) -> Result<TransferSummary> {
    let labels = &driving.epochs.labels;
    let cache = TrialCovariances::from_epochs(&driving.epochs)?;
    let all: Vec<usize> = (0..labels.len()).collect();
    let proba: Array2<f64> = model.predict_proba(&cache, &all)?;
    let threshold = rest_threshold_calibrate(proba.view(), labels, cfg.threshold_split)?;
    let k = threshold.n_calibration;
    let pred = apply_rest_threshold(proba.slice(ndarray::s![k.., ..]), threshold.theta);
    let report = evaluate(&labels[k..], &pred, &Class::ALL)?;
    Ok(TransferSummary {
        macro_f1: report.macro_f1,
        per_class_f1: report.per_class_f1,
        confusion: report.confusion,
        classes: report.classes,
        n_trials: report.n_trials,
        accuracy: report.accuracy,
        threshold,
        n_rejected: driving.n_rejected,
    })
}
