use ndarray::{s, Array3, Axis};

use super::markers::{Class, MarkerList};
use super::recording::{ChannelInfo, ChannelKind, Recording};
use crate::error::{Error, Result};

/// Amplitude in volts; construct from microvolts at the API boundary.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Volts(pub f64);

impl Volts {
    pub fn from_microvolts(uv: f64) -> Self {
        Volts(uv / 1e6)
    }

    pub fn microvolts(self) -> f64 {
        self.0 * 1e6
    }
}

/// Trials × channels × samples cut relative to class markers.
#[derive(Clone, Debug, PartialEq)]
pub struct Epochs {
    pub data: Array3<f64>,
    pub labels: Vec<Class>,
    /// Marker time (recording-relative seconds) each trial was cut from.
    pub onsets: Vec<f64>,
    pub tmin: f64,
    pub tmax: f64,
    pub fs: f64,
    pub channels: Vec<ChannelInfo>,
}

impl Epochs {
    pub fn n_trials(&self) -> usize {
        self.labels.len()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_samples(&self) -> usize {
        self.data.len_of(Axis(2))
    }

    /// Epoch-local time of sample `i`.
    pub fn time(&self, i: usize) -> f64 {
        self.tmin + i as f64 / self.fs
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples()).map(|i| self.time(i)).collect()
    }

    pub fn select(&self, trials: &[usize]) -> Epochs {
        Epochs {
            data: self.data.select(Axis(0), trials),
            labels: trials.iter().map(|&i| self.labels[i]).collect(),
            onsets: trials.iter().map(|&i| self.onsets[i]).collect(),
            tmin: self.tmin,
            tmax: self.tmax,
            fs: self.fs,
            channels: self.channels.clone(),
        }
    }

    pub fn pick_channels(&self, idx: &[usize]) -> Epochs {
        Epochs {
            data: self.data.select(Axis(1), idx),
            labels: self.labels.clone(),
            onsets: self.onsets.clone(),
            tmin: self.tmin,
            tmax: self.tmax,
            fs: self.fs,
            channels: idx.iter().map(|&i| self.channels[i].clone()).collect(),
        }
    }

    pub fn pick_kind(&self, kind: ChannelKind) -> Epochs {
        let idx: Vec<usize> = self
            .channels
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == kind)
            .map(|(i, _)| i)
            .collect();
        self.pick_channels(&idx)
    }

    /// Trial indices of one class.
    pub fn indices_of(&self, class: Class) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == class)
            .map(|(i, _)| i)
            .collect()
    }

    /// Stacks two epoch sets with identical layout and window length.
    pub fn concat(&self, other: &Epochs) -> Result<Epochs> {
        if self.channels != other.channels || self.n_samples() != other.n_samples() {
            return Err(Error::Layout("epoch sets differ in channels or length".into()));
        }
        let data = ndarray::concatenate(Axis(0), &[self.data.view(), other.data.view()])
            .map_err(|e| Error::Layout(e.to_string()))?;
        let mut labels = self.labels.clone();
        labels.extend(&other.labels);
        let mut onsets = self.onsets.clone();
        onsets.extend(&other.onsets);
        Ok(Epochs {
            data,
            labels,
            onsets,
            tmin: self.tmin,
            tmax: self.tmax,
            fs: self.fs,
            channels: self.channels.clone(),
        })
    }

    /// Reorders trials by onset time (stable).
    pub fn sorted_by_onset(&self) -> Epochs {
        let mut idx: Vec<usize> = (0..self.n_trials()).collect();
        idx.sort_by(|&a, &b| self.onsets[a].total_cmp(&self.onsets[b]));
        self.select(&idx)
    }

    /// Trial-averaged waveform of one channel.
    pub fn average(&self, channel: usize) -> Vec<f64> {
        let n = self.n_trials().max(1) as f64;
        self.data
            .slice(s![.., channel, ..])
            .sum_axis(Axis(0))
            .iter()
            .map(|v| v / n)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochExtraction {
    pub epochs: Epochs,
    /// Class markers whose window fell outside the recording.
    pub dropped: usize,
}

/// Cuts one epoch per class marker: samples
/// `[round((t + tmin)·fs), + round((tmax − tmin)·fs))`. Markers whose window
/// leaves the recording are dropped and counted.
pub fn epoch_extract(recording: &Recording, markers: &MarkerList, tmin: f64, tmax: f64) -> Result<EpochExtraction> {
    if !(tmin < tmax) {
        return Err(Error::InvalidWindow { tmin, tmax });
    }
    let fs = recording.fs();
    let n = ((tmax - tmin) * fs).round() as usize;
    let total = recording.n_samples() as i64;
    let mut kept = Vec::new();
    let mut dropped = 0;
    for (t, class) in markers.class_events() {
        let start = ((t + tmin) * fs).round() as i64;
        if start < 0 || start + n as i64 > total {
            dropped += 1;
        } else {
            kept.push((start as usize, t, class));
        }
    }
    let mut data = Array3::<f64>::zeros((kept.len(), recording.n_channels(), n));
    for (k, &(start, _, _)) in kept.iter().enumerate() {
        data.slice_mut(s![k, .., ..])
            .assign(&recording.data().slice(s![.., start..start + n]));
    }
    Ok(EpochExtraction {
        epochs: Epochs {
            data,
            labels: kept.iter().map(|k| k.2).collect(),
            onsets: kept.iter().map(|k| k.1).collect(),
            tmin,
            tmax,
            fs,
            channels: recording.channels().to_vec(),
        },
        dropped,
    })
}

/// Removes every trial in which any EEG channel's peak-to-peak range strictly
/// exceeds `threshold`.
pub fn peak_to_peak_reject(epochs: &Epochs, threshold: Volts) -> (Epochs, usize) {
    let eeg: Vec<usize> = epochs
        .channels
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == ChannelKind::Eeg)
        .map(|(i, _)| i)
        .collect();
    let keep: Vec<usize> = (0..epochs.n_trials())
        .filter(|&t| {
            eeg.iter().all(|&c| {
                let row = epochs.data.slice(s![t, c, ..]);
                let (lo, hi) = row
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                !(hi - lo > threshold.0)
            })
        })
        .collect();
    let rejected = epochs.n_trials() - keep.len();
    (epochs.select(&keep), rejected)
}
