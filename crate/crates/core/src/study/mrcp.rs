use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::config::MrcpConfig;
use super::eeg::{eeg_trials, fit_ica_with_eog, IcaSummary, ANALYSIS_DECIMATION};
use crate::error::Result;
use crate::signal::{apply_iir_causal, design_butterworth_bandpass, ChannelKind, Class, Epochs, MarkerList, Recording};
use crate::spectral::ica_apply;

pub const MRCP_CHANNELS: [&str; 2] = ["C3", "C4"];

/// EEG and EOG, causal Butterworth band-pass at the acquisition rate, then
/// decimated. No re-referencing.
pub fn lowpass_eeg(recording: &Recording, cfg: &MrcpConfig) -> Result<Recording> {
    let mut keep = recording.indices_of_kind(ChannelKind::Eeg);
    keep.extend(recording.indices_of_kind(ChannelKind::Eog));
    let rec = recording.pick(&keep)?;
    let mut f = design_butterworth_bandpass(cfg.order, cfg.band_hz.0, cfg.band_hz.1, rec.fs())?;
    let all: Vec<usize> = (0..rec.n_channels()).collect();
    apply_iir_causal(&mut f, &rec, &all)?.downsample(ANALYSIS_DECIMATION)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MrcpCurves {
    pub times: Vec<f64>,
    /// `curves[channel][class]` in µV.
    pub curves: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
    /// Baseline mean minus peak-span minimum of the all-movement average, µV,
    /// per channel. Positive means a negative deflection.
    pub negativity_uv: BTreeMap<String, f64>,
    pub n_trials: BTreeMap<String, usize>,
    pub n_rejected: usize,
}

fn in_span(times: &[f64], v: &[f64], span: (f64, f64)) -> Vec<f64> {
    times
        .iter()
        .zip(v)
        .filter(|(t, _)| **t >= span.0 - 1e-9 && **t <= span.1 + 1e-9)
        .map(|(_, x)| *x)
        .collect()
}

/// Baseline-span mean minus the minimum within the peak span.
pub fn negativity(times: &[f64], v: &[f64], baseline: (f64, f64), peak: (f64, f64)) -> f64 {
    let base = in_span(times, v, baseline);
    let base = base.iter().sum::<f64>() / base.len().max(1) as f64;
    let low = in_span(times, v, peak).into_iter().fold(f64::INFINITY, f64::min);
    base - low
}

fn average_uv(ep: &Epochs, ch: usize) -> Vec<f64> {
    ep.average(ch).into_iter().map(|v| v * 1e6).collect()
}

/// Class-averaged slow potentials at C3/C4 for cue-frame class markers.
pub fn mrcp_curves(clean: &Recording, markers: &MarkerList, cfg: &MrcpConfig, reject_uv: f64) -> Result<MrcpCurves> {
    let moves = markers.filter(|m| matches!(m.label.as_class(), Some(Class::Left | Class::Right)));
    let set = eeg_trials(clean, &moves, cfg.window_s, reject_uv)?;
    let ep = &set.epochs;
    let times = ep.times();
    let mut curves = BTreeMap::new();
    let mut negativity_uv = BTreeMap::new();
    for label in MRCP_CHANNELS {
        let ch = ep.channels.iter().position(|c| c.label == label).ok_or_else(|| {
            crate::Error::UnknownChannel(label.to_string())
        })?;
        let mut per = BTreeMap::new();
        for class in [Class::Left, Class::Right] {
            let sub = ep.select(&ep.indices_of(class));
            per.insert(class.name().to_string(), average_uv(&sub, ch));
        }
        let all = average_uv(ep, ch);
        negativity_uv.insert(
            label.to_string(),
            negativity(&times, &all, cfg.baseline_s, cfg.peak_s),
        );
        curves.insert(label.to_string(), per);
    }
    let n_trials = [Class::Left, Class::Right]
        .iter()
        .map(|c| (c.name().to_string(), ep.indices_of(*c).len()))
        .collect();
    Ok(MrcpCurves {
        times,
        curves,
        negativity_uv,
        n_trials,
        n_rejected: set.n_rejected,
    })
}

impl MrcpCurves {
    /// `time_s,LEFT,RIGHT` for one channel, µV.
    pub fn write_csv<W: Write>(&self, channel: &str, mut w: W) -> Result<()> {
        let per = self
            .curves
            .get(channel)
            .ok_or_else(|| crate::Error::UnknownChannel(channel.to_string()))?;
        writeln!(w, "time_s,LEFT,RIGHT")?;
        for (i, t) in self.times.iter().enumerate() {
            let l = per.get("LEFT").and_then(|v| v.get(i)).copied().unwrap_or(f64::NAN);
            let r = per.get("RIGHT").and_then(|v| v.get(i)).copied().unwrap_or(f64::NAN);
            writeln!(w, "{t},{l},{r}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct MrcpSessions {
    pub calibration: MrcpCurves,
    pub driving: MrcpCurves,
    pub ica: IcaSummary,
}

/// Separate low-frequency ICA fitted on calibration and applied to both.
pub fn mrcp_sessions(
    calibration: &Recording,
    calibration_markers: &MarkerList,
    driving: &Recording,
    driving_markers: &MarkerList,
    cfg: &MrcpConfig,
    ica_components: usize,
    reject_uv: f64,
    seed: u64,
) -> Result<MrcpSessions> {
    let cal = lowpass_eeg(calibration, cfg)?;
    let drv = lowpass_eeg(driving, cfg)?;
    let (ica, summary) = fit_ica_with_eog(&cal, ica_components, seed, "calibration-mrcp")?;
    Ok(MrcpSessions {
        calibration: mrcp_curves(&ica_apply(&ica, &cal)?, calibration_markers, cfg, reject_uv)?,
        driving: mrcp_curves(&ica_apply(&ica, &drv)?, driving_markers, cfg, reject_uv)?,
        ica: summary,
    })
}
