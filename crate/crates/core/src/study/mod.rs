//! End-to-end experiment: synthetic sessions, the EMG mock decoder, driving
//! segmentation, EEG preprocessing, CSP classification, SMR and MRCP
//! summaries, and the streaming simulation.

pub mod config;
pub mod eeg;
pub mod emg;
pub mod mrcp;
pub mod session;
pub mod smr;
pub mod stream_sim;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::ExperimentConfig;
pub use session::{generate_sessions, read_sessions, write_sessions, Session, SessionPair};
pub use stream_sim::{stream_sim, write_stream_outputs, StreamSimOptions, StreamSimOutcome, StreamSimReport};

use crate::decoding::{CspLogisticModel, LinearModel};
use crate::error::{Error, Result};
use crate::paradigm::{
    calibration_trial_markers, driving_trial_markers, schedule_from_markers, write_runs_jsonl, CalibrationSchedule,
    DrivingRun,
};
use crate::signal::{Class, MarkerList};
use crate::stream::{write_predictions_csv, Prediction};
use eeg::{classification_trials, fit_session_model, preprocess_eeg, session_crossval, transfer_evaluate, CvSummary, IcaSummary, TransferSummary};
use emg::{decode_session_emg, segment_predictions, summarize_runs, train_emg_decoder, EmgCalibration, SegmentationSummary};
use mrcp::{mrcp_sessions, MrcpCurves, MrcpSessions, MRCP_CHANNELS};
use smr::{alpha_summary, smr_maps, AlphaContrast, SmrMaps};

/// The calibration EMG decoder and what it makes of the driving session.
#[derive(Clone, Debug)]
pub struct DrivingLabels {
    pub schedule: CalibrationSchedule,
    pub emg: EmgCalibration,
    pub predictions: Vec<Prediction>,
    pub runs: Vec<DrivingRun>,
    /// Cue-frame class markers, one per run.
    pub markers: MarkerList,
}

pub fn calibration_schedule(s: &Session) -> Result<CalibrationSchedule> {
    schedule_from_markers(&s.markers, s.recording.duration())
}

/// Trains the EMG decoder on calibration, decodes the driving EMG and
/// segments the prediction stream into trials.
pub fn driving_labels(cfg: &ExperimentConfig, sessions: &SessionPair) -> Result<DrivingLabels> {
    let schedule = calibration_schedule(&sessions.calibration)?;
    let emg = train_emg_decoder(&sessions.calibration.recording, &schedule, &cfg.emg, cfg.seed)?;
    let drv = &sessions.driving.recording;
    let predictions = decode_session_emg(drv, &emg.model, &cfg.emg)?;
    let runs = segment_predictions(&predictions, drv.t0)?;
    let markers = driving_trial_markers(&runs)?;
    Ok(DrivingLabels {
        schedule,
        emg,
        predictions,
        runs,
        markers,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmgSummary {
    pub cv_folds: usize,
    pub cv_accuracy: f64,
    pub cv_macro_f1: f64,
    pub n_trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MrcpSessionSummary {
    pub negativity_uv: BTreeMap<String, f64>,
    pub n_trials: BTreeMap<String, usize>,
    pub n_rejected: usize,
}

impl From<&MrcpCurves> for MrcpSessionSummary {
    fn from(c: &MrcpCurves) -> Self {
        Self {
            negativity_uv: c.negativity_uv.clone(),
            n_trials: c.n_trials.clone(),
            n_rejected: c.n_rejected,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MrcpSummary {
    pub calibration: MrcpSessionSummary,
    pub driving: MrcpSessionSummary,
    pub ica: IcaSummary,
}

type AlphaTable = BTreeMap<String, BTreeMap<String, AlphaContrast>>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmrSummary {
    pub calibration: AlphaTable,
    pub driving: AlphaTable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyReport {
    pub seed: u64,
    pub emg: EmgSummary,
    pub segmentation: SegmentationSummary,
    pub ica: IcaSummary,
    pub calibration: CvSummary,
    pub driving: CvSummary,
    pub transfer: TransferSummary,
    pub smr: SmrSummary,
    pub mrcp: MrcpSummary,
}

#[derive(Clone, Debug)]
pub struct SmrOutcome {
    pub calibration: SmrMaps,
    pub driving: SmrMaps,
}

#[derive(Clone, Debug)]
pub struct StudyOutcome {
    pub report: StudyReport,
    pub labels: DrivingLabels,
    pub calibration_model: CspLogisticModel,
    pub driving_model: CspLogisticModel,
    pub smr: SmrOutcome,
    pub mrcp: MrcpSessions,
}

fn emg_summary(cfg: &ExperimentConfig, e: &EmgCalibration) -> EmgSummary {
    EmgSummary {
        cv_folds: cfg.emg.cv_folds,
        cv_accuracy: e.cv.report.accuracy,
        cv_macro_f1: e.cv.report.macro_f1,
        n_trials: e.labels.len(),
    }
}

/// SMR maps for both sessions from ICA-cleaned EEG.
pub fn analyze_smr(cfg: &ExperimentConfig, sessions: &SessionPair) -> Result<(SmrOutcome, DrivingLabels)> {
    let labels = driving_labels(cfg, sessions)?;
    let clean = preprocess_eeg(&sessions.calibration.recording, &sessions.driving.recording, &cfg.eeg, cfg.seed)?;
    let smr = smr_for(cfg, &clean, &labels)?;
    Ok((smr, labels))
}

fn smr_for(cfg: &ExperimentConfig, clean: &eeg::CleanEeg, labels: &DrivingLabels) -> Result<SmrOutcome> {
    Ok(SmrOutcome {
        calibration: smr_maps(&clean.calibration, &calibration_trial_markers(&labels.schedule), &cfg.smr, cfg.eeg.reject_uv)?,
        driving: smr_maps(&clean.driving, &labels.markers, &cfg.smr, cfg.eeg.reject_uv)?,
    })
}

/// Slow-potential averages for both sessions.
pub fn analyze_mrcp(cfg: &ExperimentConfig, sessions: &SessionPair) -> Result<(MrcpSessions, DrivingLabels)> {
    let labels = driving_labels(cfg, sessions)?;
    let m = mrcp_for(cfg, sessions, &labels)?;
    Ok((m, labels))
}

fn mrcp_for(cfg: &ExperimentConfig, sessions: &SessionPair, labels: &DrivingLabels) -> Result<MrcpSessions> {
    mrcp_sessions(
        &sessions.calibration.recording,
        &calibration_trial_markers(&labels.schedule),
        &sessions.driving.recording,
        &labels.markers,
        &cfg.mrcp,
        cfg.eeg.ica_components,
        cfg.eeg.reject_uv,
        cfg.seed,
    )
}

/// The classification study: calibration CV, driving CV and transfer, plus
/// SMR and MRCP summaries.
pub fn run_study(cfg: &ExperimentConfig, sessions: &SessionPair) -> Result<StudyOutcome> {
    cfg.validate()?;
    let labels = driving_labels(cfg, sessions)?;
    let clean = preprocess_eeg(&sessions.calibration.recording, &sessions.driving.recording, &cfg.eeg, cfg.seed)?;

    let cal_trials = classification_trials(&clean.calibration, &calibration_trial_markers(&labels.schedule), cfg.eeg.reject_uv)?;
    let drv_trials = classification_trials(&clean.driving, &labels.markers, cfg.eeg.reject_uv)?;
    for (name, t) in [("calibration", &cal_trials), ("driving", &drv_trials)] {
        for c in Class::ALL {
            let n = t.epochs.indices_of(c).len();
            if n < cfg.csp.cv_folds {
                return Err(Error::InsufficientData(format!(
                    "{name} session has {n} {c} trials, fewer than {} folds",
                    cfg.csp.cv_folds
                )));
            }
        }
    }
    let calibration = session_crossval(&cal_trials, &cfg.csp, cfg.seed)?;
    let driving = session_crossval(&drv_trials, &cfg.csp, cfg.seed)?;
    let (calibration_model, _) = fit_session_model(&cal_trials, &cfg.csp)?;
    let (driving_model, _) = fit_session_model(&drv_trials, &cfg.csp)?;
    let transfer = transfer_evaluate(&calibration_model, &drv_trials, &cfg.csp)?;

    let smr = smr_for(cfg, &clean, &labels)?;
    let mrcp = mrcp_for(cfg, sessions, &labels)?;

    let report = StudyReport {
        seed: cfg.seed,
        emg: emg_summary(cfg, &labels.emg),
        segmentation: summarize_runs(&labels.predictions, &labels.runs),
        ica: clean.ica_summary.clone(),
        calibration,
        driving,
        transfer,
        smr: SmrSummary {
            calibration: alpha_summary(&smr.calibration),
            driving: alpha_summary(&smr.driving),
        },
        mrcp: MrcpSummary {
            calibration: (&mrcp.calibration).into(),
            driving: (&mrcp.driving).into(),
            ica: mrcp.ica.clone(),
        },
    };
    Ok(StudyOutcome {
        report,
        labels,
        calibration_model,
        driving_model,
        smr,
        mrcp,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Format(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// `tfr_<session>_<class>_<channel>.csv`, 31 frequency rows each by default.
pub fn write_smr_outputs(smr: &SmrOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut out = Vec::new();
    for (session, maps) in [("calibration", &smr.calibration), ("driving", &smr.driving)] {
        for (class, ms) in &maps.maps {
            for m in ms {
                let chan = m.channel.split('-').next().unwrap_or(&m.channel);
                let p = dir.join(format!("tfr_{session}_{}_{chan}.csv", class.name()));
                let mut w = create(&p)?;
                m.write_csv(&mut w)?;
                w.flush()?;
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// `mrcp_<session>_<channel>.csv` with LEFT and RIGHT averages in µV.
pub fn write_mrcp_outputs(m: &MrcpSessions, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut out = Vec::new();
    for (session, curves) in [("calibration", &m.calibration), ("driving", &m.driving)] {
        for ch in MRCP_CHANNELS {
            let p = dir.join(format!("mrcp_{session}_{ch}.csv"));
            let mut w = create(&p)?;
            curves.write_csv(ch, &mut w)?;
            w.flush()?;
            out.push(p);
        }
    }
    Ok(out)
}

pub fn write_driving_labels(labels: &DrivingLabels, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let p1 = dir.join("driving_predictions.csv");
    let mut w = create(&p1)?;
    write_predictions_csv(&labels.predictions, &mut w)?;
    w.flush()?;
    let p2 = dir.join("driving_runs.jsonl");
    let mut w = create(&p2)?;
    write_runs_jsonl(&labels.runs, &mut w)?;
    w.flush()?;
    let p3 = dir.join("emg_model.json");
    write_json::<LinearModel>(&labels.emg.model, &p3)?;
    Ok(vec![p1, p2, p3])
}

/// Report JSON, CSP patterns, TFR and MRCP matrices, EMG artifacts.
pub fn write_study_outputs(outcome: &StudyOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut out = Vec::new();
    let p = dir.join("study_report.json");
    write_json(&outcome.report, &p)?;
    out.push(p);
    for (name, model) in [("calibration", &outcome.calibration_model), ("driving", &outcome.driving_model)] {
        let positions: Vec<Option<[f64; 2]>> = model
            .bank
            .channels
            .iter()
            .map(|l| crate::signal::montage::eeg_position(l))
            .collect();
        let p = dir.join(format!("patterns_{name}.csv"));
        let mut w = create(&p)?;
        model.bank.write_patterns_csv(&mut w, &positions)?;
        w.flush()?;
        out.push(p);
    }
    out.extend(write_smr_outputs(&outcome.smr, dir)?);
    out.extend(write_mrcp_outputs(&outcome.mrcp, dir)?);
    out.extend(write_driving_labels(&outcome.labels, dir)?);
    Ok(out)
}
