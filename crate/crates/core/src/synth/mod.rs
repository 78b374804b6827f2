//! Synthetic calibration and driving sessions with known ground truth.
//!
//! Scalp EEG is a fixed linear mixture of a handful of sources: α and β
//! rhythms over each motor cortex, a central slow negativity preceding cued
//! movements, a frontal blink generator, posterior α and broad 1/f
//! background. EMG and EOG leads are synthesized directly.

mod sources;
pub mod spec;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use spec::SynthSpec;

use crate::error::{Error, Result};
use crate::paradigm::{make_schedule_with, CalibrationSchedule, MOVEMENT_LEAD_S};
use crate::signal::montage::{eeg_position, standard_montage, EMG_LABELS, EOG_LABELS};
use crate::signal::{ChannelKind, Class, MarkerLabel, MarkerList, Recording};
use sources::{blob, narrowband, ornstein_uhlenbeck, pink, plateau, poisson_times, smooth_step, substream, white};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionKind {
    Calibration,
    Driving,
}

/// A true behavioral period; REST periods carry no movement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Period {
    pub class: Class,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub session: SessionKind,
    pub seed: u64,
    pub channels: Vec<String>,
    pub source_labels: Vec<String>,
    /// channels × sources (EMG rows are zero).
    pub mixing: Array2<f64>,
    /// Sources that are artifacts (the blink generator).
    pub artifact_components: Vec<usize>,
    /// Calibration: one per cued trial (movement onset to trial end).
    /// Driving: one per command.
    pub periods: Vec<Period>,
    pub movement_onsets: Vec<f64>,
    pub blink_times: Vec<f64>,
    /// Peak slow-negativity amplitude reaching each motor electrode (µV).
    pub cnv_injected_uv: BTreeMap<String, f64>,
    pub schedule: Option<CalibrationSchedule>,
    /// Source time courses in µV, sources × samples.
    #[serde(skip)]
    pub sources: Option<Array2<f64>>,
}

impl GroundTruth {
    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn source_index(&self, label: &str) -> Option<usize> {
        self.source_labels.iter().position(|l| l == label)
    }

    pub fn mixing_gain(&self, channel: &str, source: &str) -> Option<f64> {
        let c = self.channels.iter().position(|l| l == channel)?;
        Some(self.mixing[[c, self.source_index(source)?]])
    }
}

pub const SOURCE_ALPHA_LEFT: &str = "alpha_left";
pub const SOURCE_ALPHA_RIGHT: &str = "alpha_right";
pub const SOURCE_BETA_LEFT: &str = "beta_left";
pub const SOURCE_BETA_RIGHT: &str = "beta_right";
pub const SOURCE_CNV: &str = "cnv";
pub const SOURCE_BLINK: &str = "blink";
pub const SOURCE_POSTERIOR_ALPHA: &str = "posterior_alpha";

// Source rows: motor α (L, R), motor β (L, R), then these.
const IDX_CNV: usize = 4;
const IDX_BLINK: usize = 5;
const IDX_POSTERIOR: usize = 6;
const IDX_PINK0: usize = 7;

const MOTOR_WIDTH: f64 = 0.22;
const CNV_WIDTH: f64 = 0.45;
const BLINK_CENTER: [f64; 2] = [0.0, 1.05];
const BLINK_WIDTH: f64 = 0.35;
const BLINK_SIGMA_S: f64 = 0.06;
const POSTERIOR_CENTER: [f64; 2] = [0.0, -0.85];
const POSTERIOR_WIDTH: f64 = 0.35;
const PINK_WIDTH: f64 = 0.5;
const PINK_LOW_CORNER_HZ: f64 = 2.0;
const PINK_TERMS: usize = 8;
const EMG_RAMP_S: f64 = 0.05;
const CNV_START_S: f64 = 0.7;
const CNV_RISE_S: f64 = 0.3;
const CNV_DECAY_S: f64 = 0.25;
const CALIBRATION_TAIL_S: f64 = 1.0;

// RNG stream layout. Session streams are offset so the two sessions of one
// subject are independent while the head model (layout) is shared.
const STREAM_LAYOUT: u64 = 1 << 40;
const STREAM_TRACK: u64 = (1 << 40) + 1;
const SESSION_STRIDE: u64 = 1 << 20;
const S_ALPHA: u64 = 1;
const S_BETA: u64 = 3;
const S_DRIFT: u64 = 5;
const S_BLINK: u64 = 9;
const S_POSTERIOR: u64 = 10;
const S_PINK: u64 = 100;
const S_WHITE: u64 = 200;
const S_EXTRA: u64 = 300;
const S_EMG: u64 = 400;
const S_EMG_GAIN: u64 = 500;
const S_EMG_BASE: u64 = 600;
const S_EOG: u64 = 700;

fn mirror_x(p: [f64; 2]) -> [f64; 2] {
    [-p[0], p[1]]
}

fn motor_center() -> [f64; 2] {
    let c3 = eeg_position("C3").expect("montage");
    let cp1 = eeg_position("CP1").expect("montage");
    [0.75 * c3[0] + 0.25 * cp1[0], 0.75 * c3[1] + 0.25 * cp1[1]]
}

struct Layout {
    labels: Vec<String>,
    mixing: Array2<f64>,
}

fn build_layout(spec: &SynthSpec, seed: u64) -> Layout {
    let chans = standard_montage();
    let left = motor_center();
    let right = mirror_x(left);
    let mut rng = substream(seed, STREAM_LAYOUT);
    let mut centers: Vec<(String, [f64; 2], f64)> = vec![
        (SOURCE_ALPHA_LEFT.into(), left, MOTOR_WIDTH),
        (SOURCE_ALPHA_RIGHT.into(), right, MOTOR_WIDTH),
        (SOURCE_BETA_LEFT.into(), left, MOTOR_WIDTH),
        (SOURCE_BETA_RIGHT.into(), right, MOTOR_WIDTH),
        (SOURCE_CNV.into(), [0.0, 0.0], CNV_WIDTH),
        (SOURCE_BLINK.into(), BLINK_CENTER, BLINK_WIDTH),
        (SOURCE_POSTERIOR_ALPHA.into(), POSTERIOR_CENTER, POSTERIOR_WIDTH),
    ];
    for k in 0..spec.noise.n_pink_sources {
        let r = rng.gen_range(0.0f64..1.0).sqrt();
        let th = rng.gen_range(0.0..2.0 * PI);
        centers.push((format!("background_{k}"), [r * th.sin(), r * th.cos()], PINK_WIDTH));
    }
    let mut mixing = Array2::<f64>::zeros((chans.len(), centers.len()));
    for (c, ch) in chans.iter().enumerate() {
        if let Some(pos) = ch.position {
            for (s, (_, center, width)) in centers.iter().enumerate() {
                mixing[[c, s]] = blob(pos, *center, *width);
            }
        }
    }
    for (label, gain) in [("HEOG-L", 0.1), ("HEOG-R", 0.1), ("VEOG-U", 1.0), ("VEOG-L", -0.8)] {
        let c = chans.iter().position(|ch| ch.label == label).expect("montage");
        mixing[[c, IDX_BLINK]] = gain;
    }
    Layout {
        labels: centers.into_iter().map(|c| c.0).collect(),
        mixing,
    }
}

struct Movement {
    class: Class,
    onset: f64,
    end: f64,
    /// Cue time of a cued trial, where the slow negativity starts.
    cue: Option<f64>,
}

fn idx(t: f64, fs: f64, n: usize) -> usize {
    ((t * fs).floor().max(0.0) as usize).min(n)
}

/// Multiplies `env` by `1 − depth·w(t)` where `w` is a plateau over [a, b].
fn apply_plateau_drop(env: &mut [f64], fs: f64, a: f64, b: f64, ramp: f64, depth: f64) {
    let n = env.len();
    for i in idx(a, fs, n)..idx(b + ramp, fs, n).saturating_add(1).min(n) {
        let t = i as f64 / fs;
        env[i] *= 1.0 - depth * plateau(t, a, b, ramp);
    }
}

fn contralateral(class: Class, mirror: bool) -> Option<usize> {
    // 0 = left hemisphere source, 1 = right.
    let side = match class {
        Class::Left => 1,
        Class::Right => 0,
        Class::Rest => return None,
    };
    Some(if mirror { 1 - side } else { side })
}

fn synthesize(
    spec: &SynthSpec,
    seed: u64,
    session: SessionKind,
    movements: &[Movement],
    duration_s: f64,
) -> Result<(Recording, GroundTruth)> {
    spec.validate()?;
    let fs = spec.fs;
    let n = (duration_s * fs).round() as usize;
    if n < 2 {
        return Err(Error::Validation("session too short".into()));
    }
    let off = match session {
        SessionKind::Calibration => 0,
        SessionKind::Driving => SESSION_STRIDE,
    };
    let driving = session == SessionKind::Driving;
    let shift = spec.domain_shift.enabled && driving;
    let alpha_scale = if shift { spec.domain_shift.alpha_scale } else { 1.0 };
    let lead = if driving {
        spec.erd.lead_driving_s
    } else {
        spec.erd.lead_calibration_s
    };
    let layout = build_layout(spec, seed);
    let n_src = layout.labels.len();
    let mut src = Array2::<f64>::zeros((n_src, n));

    // Motor rhythms.
    let sigma = spec.noise.drift_sigma;
    for (band, rhythm, stream, scale) in [
        (0usize, &spec.alpha, S_ALPHA, alpha_scale),
        (1usize, &spec.beta, S_BETA, 1.0),
    ] {
        for side in 0..2 {
            let mut x = narrowband(&mut substream(seed, off + stream + side as u64), n, rhythm.low_hz, rhythm.high_hz, fs);
            let drift = ornstein_uhlenbeck(
                &mut substream(seed, off + S_DRIFT + 2 * band as u64 + side as u64),
                n,
                sigma,
                spec.noise.drift_tau_s,
                fs,
            );
            let mut env = vec![1.0; n];
            for m in movements {
                if contralateral(m.class, spec.mirror_hemispheres) == Some(side) {
                    apply_plateau_drop(
                        &mut env,
                        fs,
                        m.onset - lead,
                        m.end - spec.erd.release_before_end_s,
                        spec.erd.ramp_s,
                        rhythm.erd_drop,
                    );
                }
                if band == 1 {
                    let s = spec.beta_dip.width_s / 2.0;
                    let n0 = idx(m.onset - 4.0 * s, fs, n);
                    let n1 = idx(m.onset + 4.0 * s, fs, n);
                    for i in n0..n1 {
                        let t = i as f64 / fs;
                        env[i] *= 1.0 - spec.beta_dip.depth * (-(t - m.onset).powi(2) / (2.0 * s * s)).exp();
                    }
                }
            }
            let amp = rhythm.amplitude_uv * scale;
            for ((v, e), d) in x.iter_mut().zip(&env).zip(&drift) {
                *v *= amp * e * (d - sigma * sigma).exp();
            }
            src.row_mut(2 * band + side).assign(&ndarray::Array1::from(x));
        }
    }

    // Slow negativity after each cue.
    if !(spec.mrcp.calibration_only && driving) {
        let a = spec.mrcp.cnv_amplitude_uv;
        for m in movements {
            let start = m.cue.unwrap_or(m.onset - MOVEMENT_LEAD_S) + CNV_START_S;
            let peak = start + CNV_RISE_S;
            for i in idx(start, fs, n)..idx(peak + CNV_DECAY_S, fs, n) {
                let t = i as f64 / fs;
                src[[IDX_CNV, i]] -= a * (smooth_step(t, start, CNV_RISE_S) - smooth_step(t, peak, CNV_DECAY_S));
            }
        }
    }

    // Blinks.
    let blink_times = poisson_times(&mut substream(seed, off + S_BLINK), spec.eog.blink_rate_hz, duration_s);
    for &tb in &blink_times {
        for i in idx(tb - 5.0 * BLINK_SIGMA_S, fs, n)..idx(tb + 5.0 * BLINK_SIGMA_S, fs, n) {
            let t = i as f64 / fs;
            src[[IDX_BLINK, i]] += spec.eog.blink_amplitude_uv * (-(t - tb).powi(2) / (2.0 * BLINK_SIGMA_S * BLINK_SIGMA_S)).exp();
        }
    }

    let post = narrowband(&mut substream(seed, off + S_POSTERIOR), n, spec.alpha.low_hz, spec.alpha.high_hz, fs);
    let amp = spec.noise.posterior_alpha_uv * alpha_scale;
    src.row_mut(IDX_POSTERIOR).assign(&ndarray::Array1::from(post).mapv(|v| v * amp));
    for k in 0..spec.noise.n_pink_sources {
        let p = pink(&mut substream(seed, off + S_PINK + k as u64), n, fs, PINK_LOW_CORNER_HZ, PINK_TERMS);
        src.row_mut(IDX_PINK0 + k)
            .assign(&ndarray::Array1::from(p).mapv(|v| v * spec.noise.pink_uv));
    }

    let mut data = layout.mixing.dot(&src);
    let chans = standard_montage();
    for (c, ch) in chans.iter().enumerate() {
        let mut row = data.row_mut(c);
        match ch.kind {
            ChannelKind::Eeg => {
                let w = white(&mut substream(seed, off + S_WHITE + c as u64), n);
                row.zip_mut_with(&ndarray::ArrayView1::from(&w), |a, b| *a += spec.noise.white_uv * b);
                if shift && spec.domain_shift.extra_noise_uv > 0.0 {
                    let p = pink(&mut substream(seed, off + S_EXTRA + c as u64), n, fs, PINK_LOW_CORNER_HZ, PINK_TERMS);
                    row.zip_mut_with(&ndarray::ArrayView1::from(&p), |a, b| *a += spec.domain_shift.extra_noise_uv * b);
                }
            }
            ChannelKind::Eog => {
                let w = white(&mut substream(seed, off + S_EOG + c as u64), n);
                row.zip_mut_with(&ndarray::ArrayView1::from(&w), |a, b| *a += spec.eog.noise_uv * b);
            }
            ChannelKind::Emg => {}
        }
    }

    // EMG.
    let emg = &spec.emg;
    let mut gain_rng = substream(seed, off + S_EMG_GAIN);
    let gains: Vec<f64> = movements
        .iter()
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut gain_rng);
            (emg.gain_jitter * z).exp()
        })
        .collect();
    for (k, label) in EMG_LABELS.iter().enumerate() {
        let c = chans.iter().position(|ch| ch.label == *label).expect("montage");
        // Channels 0, 1 sit on the left forearm (flexor, extensor); 2, 3 on the right.
        let arm_side = if k < 2 { Class::Left } else { Class::Right };
        let muscle = if k % 2 == 0 { emg.flexor_gain } else { emg.extensor_gain };
        let mut env = vec![0.0; n];
        for (m, g) in movements.iter().zip(&gains) {
            let moved = if spec.mirror_hemispheres { m.class.mirrored() } else { m.class };
            let w = if moved == arm_side {
                muscle
            } else if moved == Class::Rest {
                continue;
            } else {
                muscle * emg.crosstalk
            };
            for i in idx(m.onset, fs, n)..idx(m.end + EMG_RAMP_S, fs, n) {
                let t = i as f64 / fs;
                env[i] += g * w * plateau(t, m.onset, m.end - EMG_RAMP_S, EMG_RAMP_S);
            }
        }
        let burst = narrowband(&mut substream(seed, off + S_EMG + k as u64), n, emg.low_hz, emg.high_hz, fs);
        let mut base_rng = substream(seed, off + S_EMG_BASE + k as u64);
        let phase = base_rng.gen_range(0.0..2.0 * PI);
        let base = white(&mut base_rng, n);
        let mut row = data.row_mut(c);
        for i in 0..n {
            let t = i as f64 / fs;
            row[i] = emg.burst_uv * env[i] * burst[i]
                + emg.baseline_uv * base[i]
                + emg.line_noise_uv * (2.0 * PI * emg.line_hz * t + phase).sin();
        }
    }
    data.mapv_inplace(|v| v * 1e-6);

    let mut cnv_injected_uv = BTreeMap::new();
    let channel_labels: Vec<String> = chans.iter().map(|c| c.label.clone()).collect();
    for ch in ["C3", "C4"] {
        let c = channel_labels.iter().position(|l| l == ch).expect("montage");
        cnv_injected_uv.insert(ch.to_string(), spec.mrcp.cnv_amplitude_uv * layout.mixing[[c, IDX_CNV]]);
    }
    let recording = Recording::new(data, fs, chans)?;
    let truth = GroundTruth {
        session,
        seed,
        channels: channel_labels,
        source_labels: layout.labels,
        mixing: layout.mixing,
        artifact_components: vec![IDX_BLINK],
        periods: Vec::new(),
        movement_onsets: movements.iter().map(|m| m.onset).collect(),
        blink_times,
        cnv_injected_uv,
        schedule: None,
        sources: Some(src),
    };
    Ok((recording, truth))
}

/// 2 × `trials_per_class` cued hand movements following the calibration timeline.
pub fn generate_calibration_session(spec: &SynthSpec, seed: u64) -> Result<(Recording, MarkerList, GroundTruth)> {
    spec.validate()?;
    let schedule = make_schedule_with(seed, spec.trials_per_class);
    let movements: Vec<Movement> = schedule
        .trials
        .iter()
        .map(|t| Movement {
            class: t.class,
            onset: t.movement_onset_s,
            end: t.trial_end_s,
            cue: Some(t.cue_onset_s),
        })
        .collect();
    let (rec, mut truth) = synthesize(
        spec,
        seed,
        SessionKind::Calibration,
        &movements,
        schedule.duration() + CALIBRATION_TAIL_S,
    )?;
    truth.periods = schedule
        .trials
        .iter()
        .map(|t| Period {
            class: t.class,
            start_s: t.movement_onset_s,
            end_s: t.trial_end_s,
        })
        .collect();
    let markers = schedule.markers();
    truth.schedule = Some(schedule);
    Ok((rec, markers, truth))
}

pub fn driving_marker_label(class: Class) -> MarkerLabel {
    MarkerLabel::Other(
        match class {
            Class::Left => "TURN_LEFT",
            Class::Right => "TURN_RIGHT",
            Class::Rest => "STRAIGHT",
        }
        .to_string(),
    )
}

/// A continuous drive: LEFT/RIGHT commands are held turns, REST commands
/// are straight sections.
pub fn generate_driving_session(
    spec: &SynthSpec,
    seed: u64,
    commands: &[(Class, f64)],
) -> Result<(Recording, MarkerList, GroundTruth)> {
    spec.validate()?;
    if commands.is_empty() {
        return Err(Error::Validation("empty command sequence".into()));
    }
    let mut t = 0.0;
    let mut periods = Vec::with_capacity(commands.len());
    for &(class, dur) in commands {
        if !(dur > 0.0 && dur.is_finite()) {
            return Err(Error::Validation(format!("command duration {dur}")));
        }
        periods.push(Period {
            class,
            start_s: t,
            end_s: t + dur,
        });
        t += dur;
    }
    let movements: Vec<Movement> = periods
        .iter()
        .filter(|p| p.class != Class::Rest)
        .map(|p| Movement {
            class: p.class,
            onset: p.start_s,
            end: p.end_s,
            cue: None,
        })
        .collect();
    let (rec, mut truth) = synthesize(spec, seed, SessionKind::Driving, &movements, t)?;
    let mut markers = MarkerList::new();
    for p in &periods {
        markers.push(p.start_s, driving_marker_label(p.class))?;
    }
    truth.periods = periods;
    Ok((rec, markers, truth))
}

/// Laps of straight/turn pairs: per lap two LEFT and two RIGHT turns in
/// shuffled order, straights of 5–10 s, turns of 4–6 s, and a closing
/// straight after the last lap.
pub fn default_track_sequence(laps: usize, seed: u64) -> Vec<(Class, f64)> {
    let mut rng = substream(seed, STREAM_TRACK);
    let mut out = Vec::with_capacity(laps * 8 + 1);
    for _ in 0..laps {
        let mut turns = [Class::Left, Class::Left, Class::Right, Class::Right];
        turns.shuffle(&mut rng);
        for turn in turns {
            out.push((Class::Rest, rng.gen_range(5.0..=10.0)));
            out.push((turn, rng.gen_range(4.0..=6.0)));
        }
    }
    out.push((Class::Rest, rng.gen_range(5.0..=10.0)));
    out
}

pub fn eog_channel_labels() -> &'static [&'static str] {
    &EOG_LABELS
}
