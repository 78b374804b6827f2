use std::collections::BTreeMap;

use ndarray::{concatenate, Axis};
use serde::Serialize;

use super::config::SmrConfig;
use super::eeg::eeg_trials;
use crate::error::Result;
use crate::signal::montage::{C3_NEIGHBORS, C4_NEIGHBORS};
use crate::signal::{surface_laplacian, ChannelInfo, ChannelKind, Class, MarkerList, Recording};
use crate::spectral::{frequency_grid, multitaper_tfr, TimeFrequencyMap};

pub const LAPLACIAN_CHANNELS: [&str; 2] = ["C3-LAP", "C4-LAP"];

/// Appends Hjorth Laplacians around C3 and C4 as extra EEG channels.
pub fn with_motor_laplacians(recording: &Recording) -> Result<Recording> {
    let c3 = surface_laplacian(recording, "C3", &C3_NEIGHBORS)?;
    let c4 = surface_laplacian(recording, "C4", &C4_NEIGHBORS)?;
    let extra = ndarray::stack(Axis(0), &[c3.view(), c4.view()]).expect("equal lengths");
    let data = concatenate(Axis(0), &[recording.data().view(), extra.view()]).expect("equal lengths");
    let mut channels = recording.channels().to_vec();
    for l in LAPLACIAN_CHANNELS {
        channels.push(ChannelInfo::new(l, ChannelKind::Eeg));
    }
    Ok(Recording::new(data, recording.fs(), channels)?.with_t0(recording.t0))
}

#[derive(Clone, Debug)]
pub struct SmrMaps {
    /// Keyed by class; one map per Laplacian channel.
    pub maps: BTreeMap<Class, Vec<TimeFrequencyMap>>,
    pub n_trials: BTreeMap<Class, usize>,
    pub n_rejected: usize,
}

/// Trial-averaged multitaper maps of the motor Laplacians for LEFT and RIGHT
/// trials. `markers` are cue-frame class markers.
pub fn smr_maps(clean: &Recording, markers: &MarkerList, cfg: &SmrConfig, reject_uv: f64) -> Result<SmrMaps> {
    let rec = with_motor_laplacians(clean)?;
    let window = (cfg.window_s.0 - cfg.pad_s, cfg.window_s.1 + cfg.pad_s);
    let moves = markers.filter(|m| matches!(m.label.as_class(), Some(Class::Left | Class::Right)));
    let set = eeg_trials(&rec, &moves, window, reject_uv)?;
    let lap: Vec<usize> = LAPLACIAN_CHANNELS
        .iter()
        .map(|l| set.epochs.channels.iter().position(|c| c.label == *l).expect("appended"))
        .collect();
    let freqs = frequency_grid(cfg.freqs_hz.0, cfg.freqs_hz.1, cfg.freqs_hz.2);
    let mut maps = BTreeMap::new();
    let mut n_trials = BTreeMap::new();
    for class in [Class::Left, Class::Right] {
        let idx = set.epochs.indices_of(class);
        n_trials.insert(class, idx.len());
        let ep = set.epochs.select(&idx).pick_channels(&lap);
        maps.insert(class, multitaper_tfr(&ep, &freqs, &cfg.multitaper, cfg.pad_s)?);
    }
    Ok(SmrMaps {
        maps,
        n_trials,
        n_rejected: set.n_rejected,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaContrast {
    /// Mean α power during the hold phase divided by the pre-cue mean.
    pub hold_over_baseline: f64,
    pub hold_power: f64,
    pub baseline_power: f64,
}

pub const ALPHA_BAND_HZ: (f64, f64) = (8.0, 12.0);
pub const HOLD_SPAN_S: (f64, f64) = (1.75, 4.5);
pub const PRECUE_SPAN_S: (f64, f64) = (-2.5, -0.5);

pub fn alpha_contrast(map: &TimeFrequencyMap) -> AlphaContrast {
    let hold = map.mean_band_power(ALPHA_BAND_HZ.0, ALPHA_BAND_HZ.1, HOLD_SPAN_S.0, HOLD_SPAN_S.1);
    let base = map.mean_band_power(ALPHA_BAND_HZ.0, ALPHA_BAND_HZ.1, PRECUE_SPAN_S.0, PRECUE_SPAN_S.1);
    AlphaContrast {
        hold_over_baseline: hold / base,
        hold_power: hold,
        baseline_power: base,
    }
}

/// `alpha[class][channel]`.
pub fn alpha_summary(maps: &SmrMaps) -> BTreeMap<String, BTreeMap<String, AlphaContrast>> {
    maps.maps
        .iter()
        .map(|(c, ms)| {
            (
                c.name().to_string(),
                ms.iter().map(|m| (m.channel.clone(), alpha_contrast(m))).collect(),
            )
        })
        .collect()
}
