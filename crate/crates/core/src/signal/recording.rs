use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ChannelKind {
    Eeg,
    Emg,
    Eog,
}

/// Channel metadata. Positions are 2-D scalp projections (unit radius at the
/// T7/T8 circumference, +x right, +y nose).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelInfo {
    pub label: String,
    pub kind: ChannelKind,
    pub position: Option<[f64; 2]>,
}

impl ChannelInfo {
    pub fn new(label: impl Into<String>, kind: ChannelKind) -> Self {
        Self {
            label: label.into(),
            kind,
            position: None,
        }
    }

    pub fn with_position(mut self, x: f64, y: f64) -> Self {
        self.position = Some([x, y]);
        self
    }
}

/// Continuous multichannel signal, channels × samples, in volts.
#[derive(Clone, Debug, PartialEq)]
pub struct Recording {
    data: Array2<f64>,
    fs: f64,
    channels: Vec<ChannelInfo>,
    /// Absolute start time in seconds. Marker times are relative to this.
    pub t0: f64,
}

impl Recording {
    pub fn new(data: Array2<f64>, fs: f64, channels: Vec<ChannelInfo>) -> Result<Self> {
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(Error::Validation(format!("sampling rate must be positive, got {fs}")));
        }
        if data.nrows() != channels.len() {
            return Err(Error::Layout(format!(
                "{} data rows for {} channels",
                data.nrows(),
                channels.len()
            )));
        }
        for (i, ch) in channels.iter().enumerate() {
            if channels[..i].iter().any(|c| c.label == ch.label) {
                return Err(Error::Validation(format!("duplicate channel label `{}`", ch.label)));
            }
        }
        Ok(Self {
            data,
            fs,
            channels,
            t0: 0.0,
        })
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn channels(&self) -> &[ChannelInfo] {
        &self.channels
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut Array2<f64> {
        &mut self.data
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_samples(&self) -> usize {
        self.data.ncols()
    }

    pub fn duration(&self) -> f64 {
        self.n_samples() as f64 / self.fs
    }

    pub fn channel(&self, idx: usize) -> ArrayView1<'_, f64> {
        self.data.row(idx)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.channels
            .iter()
            .position(|c| c.label == label)
            .ok_or_else(|| Error::UnknownChannel(label.to_string()))
    }

    pub fn indices_of_kind(&self, kind: ChannelKind) -> Vec<usize> {
        self.channels
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == kind)
            .map(|(i, _)| i)
            .collect()
    }

    /// New recording holding only the given channels, in the given order.
    pub fn pick(&self, indices: &[usize]) -> Result<Recording> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n_channels()) {
            return Err(Error::UnknownChannel(format!("index {bad}")));
        }
        let data = self.data.select(Axis(0), indices);
        let channels = indices.iter().map(|&i| self.channels[i].clone()).collect();
        Ok(Recording::new(data, self.fs, channels)?.with_t0(self.t0))
    }

    pub fn pick_kind(&self, kind: ChannelKind) -> Result<Recording> {
        self.pick(&self.indices_of_kind(kind))
    }

    /// Samples `[start, end)` of every channel.
    pub fn slice_samples(&self, start: usize, end: usize) -> Recording {
        let end = end.min(self.n_samples());
        let start = start.min(end);
        let data = self.data.slice(ndarray::s![.., start..end]).to_owned();
        Recording {
            data,
            fs: self.fs,
            channels: self.channels.clone(),
            t0: self.t0 + start as f64 / self.fs,
        }
    }

    /// Every `factor`-th sample. No anti-alias filtering is applied.
    pub fn downsample(&self, factor: usize) -> Result<Recording> {
        if factor == 0 {
            return Err(Error::InvalidRequest("downsample factor 0".into()));
        }
        Ok(Recording {
            data: self.data.slice(ndarray::s![.., ..;factor]).to_owned(),
            fs: self.fs / factor as f64,
            channels: self.channels.clone(),
            t0: self.t0,
        })
    }

    /// Replace the sample matrix, keeping metadata. Shapes must match.
    pub fn with_data(&self, data: Array2<f64>) -> Result<Recording> {
        if data.nrows() != self.n_channels() {
            return Err(Error::Layout(format!(
                "{} rows for {} channels",
                data.nrows(),
                self.n_channels()
            )));
        }
        Ok(Recording {
            data,
            fs: self.fs,
            channels: self.channels.clone(),
            t0: self.t0,
        })
    }
}
