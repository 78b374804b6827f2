//! Calibration timeline, rest extraction and driving-run segmentation.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{Class, MarkerLabel, MarkerList};

pub const PREPARATION_S: f64 = 30.0;
pub const CROSS_S: f64 = 3.0;
/// Cue to movement onset; also where onset sits in every epoch.
pub const MOVEMENT_LEAD_S: f64 = 1.25;
pub const HOLD_S: f64 = 3.75;
pub const TRIAL_S: f64 = MOVEMENT_LEAD_S + HOLD_S;
pub const REST_GAP_S: (f64, f64) = (1.5, 3.5);
pub const TRIALS_PER_CLASS: usize = 20;
pub const REST_OFFSET_S: f64 = 0.5;
pub const REST_WINDOW_S: f64 = 4.0;
pub const EMG_CROP_S: f64 = 0.2;
pub const MIN_RUN_S: f64 = 3.75;
/// Epoch window used for both sessions, relative to the cue-frame marker.
pub const EPOCH_WINDOW: (f64, f64) = (MOVEMENT_LEAD_S, TRIAL_S);

const TIME_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialDescriptor {
    pub class: Class,
    pub cross_onset_s: f64,
    pub cue_onset_s: f64,
    pub movement_onset_s: f64,
    pub trial_end_s: f64,
    /// Pause after `trial_end_s` before the next fixation cross.
    pub rest_gap_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSchedule {
    pub preparation_s: f64,
    pub trials: Vec<TrialDescriptor>,
}

impl CalibrationSchedule {
    /// End of the last rest gap.
    pub fn duration(&self) -> f64 {
        self.trials
            .last()
            .map(|t| t.trial_end_s + t.rest_gap_s)
            .unwrap_or(self.preparation_s)
    }

    /// Prep, cross, class (at the cue) and trial-end markers.
    pub fn markers(&self) -> MarkerList {
        let mut m = MarkerList::new();
        m.push(0.0, MarkerLabel::Prep).expect("ordered");
        for t in &self.trials {
            m.push(t.cross_onset_s, MarkerLabel::Cross).expect("ordered");
            m.push(t.cue_onset_s, t.class).expect("ordered");
            m.push(t.trial_end_s, MarkerLabel::TrialEnd).expect("ordered");
        }
        m
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for t in &self.trials {
            serde_json::to_writer(&mut w, t)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R, preparation_s: f64) -> Result<Self> {
        let mut trials = Vec::new();
        for line in r.lines() {
            let line = line?;
            if !line.trim().is_empty() {
                trials.push(serde_json::from_str(&line)?);
            }
        }
        Ok(Self { preparation_s, trials })
    }
}

/// Rebuilds the schedule from a recorded marker stream (PREP, then per trial
/// CROSS, class cue, TRIAL_END). The last trial's rest gap runs to
/// `recording_end_s`.
pub fn schedule_from_markers(markers: &MarkerList, recording_end_s: f64) -> Result<CalibrationSchedule> {
    let ev = markers.events();
    let prep = ev
        .iter()
        .find(|m| m.label == MarkerLabel::Prep)
        .map(|m| m.time_s)
        .unwrap_or(0.0);
    let mut trials: Vec<TrialDescriptor> = Vec::new();
    let mut cross = None;
    let mut cue: Option<(f64, Class)> = None;
    for m in ev {
        match &m.label {
            MarkerLabel::Cross => {
                if let Some(prev) = trials.last_mut() {
                    if prev.rest_gap_s.is_nan() {
                        prev.rest_gap_s = m.time_s - prev.trial_end_s;
                    }
                }
                cross = Some(m.time_s);
            }
            MarkerLabel::TrialEnd => {
                let (c, class) = cue
                    .take()
                    .ok_or_else(|| Error::Validation(format!("TRIAL_END at {} without a cue", m.time_s)))?;
                trials.push(TrialDescriptor {
                    class,
                    cross_onset_s: cross.take().unwrap_or(c - CROSS_S),
                    cue_onset_s: c,
                    movement_onset_s: c + MOVEMENT_LEAD_S,
                    trial_end_s: m.time_s,
                    rest_gap_s: f64::NAN,
                });
            }
            l => {
                if let Some(class) = l.as_class() {
                    cue = Some((m.time_s, class));
                }
            }
        }
    }
    if let Some(last) = trials.last_mut() {
        if last.rest_gap_s.is_nan() {
            last.rest_gap_s = (recording_end_s - last.trial_end_s).max(0.0);
        }
    }
    if trials.is_empty() {
        return Err(Error::Validation("no calibration trials in marker stream".into()));
    }
    Ok(CalibrationSchedule {
        preparation_s: prep + PREPARATION_S,
        trials,
    })
}

/// 20 LEFT + 20 RIGHT shuffled trials after a 30 s preparation period.
pub fn make_calibration_schedule(seed: u64) -> CalibrationSchedule {
    make_schedule_with(seed, TRIALS_PER_CLASS)
}

/// As [`make_calibration_schedule`] with a custom trial count per class.
pub fn make_schedule_with(seed: u64, per_class: usize) -> CalibrationSchedule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes: Vec<Class> = std::iter::repeat(Class::Left)
        .take(per_class)
        .chain(std::iter::repeat(Class::Right).take(per_class))
        .collect();
    classes.shuffle(&mut rng);
    let mut t = PREPARATION_S;
    let trials = classes
        .into_iter()
        .map(|class| {
            let cue = t + CROSS_S;
            let gap = rng.gen_range(REST_GAP_S.0..=REST_GAP_S.1);
            let d = TrialDescriptor {
                class,
                cross_onset_s: t,
                cue_onset_s: cue,
                movement_onset_s: cue + MOVEMENT_LEAD_S,
                trial_end_s: cue + TRIAL_S,
                rest_gap_s: gap,
            };
            t = d.trial_end_s + gap;
            d
        })
        .collect();
    CalibrationSchedule {
        preparation_s: PREPARATION_S,
        trials,
    }
}

/// One REST marker per trial at `trial_end + 0.5`; its window spans
/// [`REST_WINDOW_S`] seconds from the marker.
pub fn extract_rest_markers(schedule: &CalibrationSchedule) -> MarkerList {
    let mut m = MarkerList::new();
    for t in &schedule.trials {
        m.push(t.trial_end_s + REST_OFFSET_S, Class::Rest).expect("ordered");
    }
    m
}

/// REST markers moved into the cue frame, so that cutting
/// [`EPOCH_WINDOW`] yields a rest epoch starting at `trial_end + 0.5`.
pub fn rest_markers_in_cue_frame(schedule: &CalibrationSchedule) -> MarkerList {
    extract_rest_markers(schedule).shifted(-MOVEMENT_LEAD_S)
}

/// Class markers (cue frame) for movement trials plus REST trials.
pub fn calibration_trial_markers(schedule: &CalibrationSchedule) -> MarkerList {
    let moves = schedule.markers().filter(|m| m.label.as_class().is_some());
    moves.merge(&rest_markers_in_cue_frame(schedule))
}

/// 200 ms centered on the middle of the hold phase.
pub fn emg_crop_window(trial: &TrialDescriptor) -> (f64, f64) {
    let center = trial.movement_onset_s + HOLD_S / 2.0;
    (center - EMG_CROP_S / 2.0, center + EMG_CROP_S / 2.0)
}

/// 200 ms centered on the middle of the rest window that follows the trial.
pub fn rest_emg_crop_window(trial: &TrialDescriptor) -> (f64, f64) {
    let center = trial.trial_end_s + REST_OFFSET_S + REST_WINDOW_S / 2.0;
    (center - EMG_CROP_S / 2.0, center + EMG_CROP_S / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivingRun {
    pub onset_s: f64,
    pub duration_s: f64,
    pub class: Class,
}

impl DrivingRun {
    pub fn end_s(&self) -> f64 {
        self.onset_s + self.duration_s
    }

    /// Marker time placing the run start at epoch time 1.25 s.
    pub fn cue_frame_time(&self) -> f64 {
        self.onset_s - MOVEMENT_LEAD_S
    }
}

fn sample_period(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InsufficientData("need two predictions to infer the rate".into()));
    }
    let mut d: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    if d.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Validation("prediction times must be strictly increasing".into()));
    }
    d.sort_by(f64::total_cmp);
    Ok(d[d.len() / 2])
}

/// Maximal constant-prediction runs; each prediction covers one period.
pub fn run_length_encode(predictions: &[(f64, Class)]) -> Result<Vec<DrivingRun>> {
    if predictions.is_empty() {
        return Ok(Vec::new());
    }
    let times: Vec<f64> = predictions.iter().map(|p| p.0).collect();
    let dt = if predictions.len() == 1 { 0.0 } else { sample_period(&times)? };
    let mut runs = Vec::new();
    let mut start = 0;
    for i in 1..=predictions.len() {
        if i == predictions.len() || predictions[i].1 != predictions[start].1 {
            let end_t = if i == predictions.len() { times[i - 1] + dt } else { times[i] };
            runs.push(DrivingRun {
                onset_s: times[start],
                duration_s: end_t - times[start],
                class: predictions[start].1,
            });
            start = i;
        }
    }
    Ok(runs)
}

/// Runs of at least 3.75 s.
pub fn segment_driving(predictions: &[(f64, Class)]) -> Result<Vec<DrivingRun>> {
    Ok(run_length_encode(predictions)?
        .into_iter()
        .filter(|r| r.duration_s >= MIN_RUN_S - TIME_EPS)
        .collect())
}

/// One class marker per run, in the cue frame.
pub fn driving_trial_markers(runs: &[DrivingRun]) -> Result<MarkerList> {
    let mut m = MarkerList::new();
    for r in runs {
        m.push(r.cue_frame_time(), r.class)?;
    }
    Ok(m)
}

pub fn write_runs_jsonl<W: Write>(runs: &[DrivingRun], mut w: W) -> Result<()> {
    for r in runs {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    Ok(())
}
