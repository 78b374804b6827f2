use std::f64::consts::PI;
use std::io::Write;

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use super::dpss::dpss_tapers;
use crate::error::{Error, Result};
use crate::signal::Epochs;

/// Sliding-window multitaper settings. Windows advance by half their
/// length (50% overlap).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultitaperConfig {
    pub window_s: f64,
    pub nw: f64,
    pub n_tapers: usize,
}

impl Default for MultitaperConfig {
    fn default() -> Self {
        Self {
            window_s: 0.5,
            nw: 2.0,
            n_tapers: 3,
        }
    }
}

/// Frequency × time power (V², no baseline correction) for one channel.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeFrequencyMap {
    pub channel: String,
    pub freqs: Vec<f64>,
    pub times: Vec<f64>,
    pub power: Array2<f64>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    channel: &'a str,
    units: &'a str,
    freqs: &'a [f64],
    times: &'a [f64],
}

impl TimeFrequencyMap {
    /// Mean power over `[lo, hi]` Hz at each time point.
    pub fn band_power(&self, lo: f64, hi: f64) -> Vec<f64> {
        let rows: Vec<usize> = self
            .freqs
            .iter()
            .enumerate()
            .filter(|(_, &f)| f >= lo && f <= hi)
            .map(|(i, _)| i)
            .collect();
        (0..self.times.len())
            .map(|t| rows.iter().map(|&r| self.power[[r, t]]).sum::<f64>() / rows.len().max(1) as f64)
            .collect()
    }

    /// Mean of `band_power(lo, hi)` over times in `[t_from, t_to]`.
    pub fn mean_band_power(&self, lo: f64, hi: f64, t_from: f64, t_to: f64) -> f64 {
        let bp = self.band_power(lo, hi);
        let sel: Vec<f64> = self
            .times
            .iter()
            .zip(bp)
            .filter(|(&t, _)| t >= t_from && t <= t_to)
            .map(|(_, p)| p)
            .collect();
        sel.iter().sum::<f64>() / sel.len().max(1) as f64
    }

    /// CSV matrix: header `freq_hz,<time>...`, one row per frequency.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "freq_hz")?;
        for t in &self.times {
            write!(w, ",{t}")?;
        }
        writeln!(w)?;
        for (r, f) in self.freqs.iter().enumerate() {
            write!(w, "{f}")?;
            for c in 0..self.times.len() {
                write!(w, ",{:e}", self.power[[r, c]])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn write_sidecar<W: Write>(&self, w: W) -> Result<()> {
        let meta = Sidecar {
            channel: &self.channel,
            units: "V^2",
            freqs: &self.freqs,
            times: &self.times,
        };
        serde_json::to_writer_pretty(w, &meta)?;
        Ok(())
    }
}

/// `[lo, lo+step, ..., hi]`.
pub fn frequency_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| lo + i as f64 * step).collect()
}

/// Trial-averaged multitaper power for every channel of `epochs`. The
/// epochs are expected to carry `pad_s` of extra data on both sides; only
/// window centers inside the unpadded span are reported.
pub fn multitaper_tfr(epochs: &Epochs, freqs: &[f64], config: &MultitaperConfig, pad_s: f64) -> Result<Vec<TimeFrequencyMap>> {
    let fs = epochs.fs;
    if freqs.is_empty() || freqs.iter().any(|&f| !(f > 0.0 && f < fs / 2.0)) {
        return Err(Error::InvalidBand(format!("frequencies must lie in (0, {}) Hz", fs / 2.0)));
    }
    if freqs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidRequest("frequency grid must be strictly increasing".into()));
    }
    let win = (config.window_s * fs).round() as usize;
    let n = epochs.n_samples();
    if win < 2 || win > n {
        return Err(Error::TooShort(format!("{win}-sample window for {n}-sample epochs")));
    }
    let step = (win / 2).max(1);
    let lo = epochs.tmin + pad_s - 1e-9;
    let hi = epochs.tmax - pad_s + 1e-9;
    let starts: Vec<usize> = (0..=n - win)
        .step_by(step)
        .filter(|&s| {
            let c = epochs.time(s) + win as f64 / (2.0 * fs);
            c >= lo && c <= hi
        })
        .collect();
    if starts.is_empty() {
        return Err(Error::TooShort("no analysis window fits inside the unpadded epoch".into()));
    }
    let times: Vec<f64> = starts.iter().map(|&s| epochs.time(s) + win as f64 / (2.0 * fs)).collect();

    let basis = dpss_tapers(win, config.nw, config.n_tapers)?;
    // tapered complex exponentials, [taper][freq][sample]
    let k = basis.n_tapers();
    let mut kern_re = vec![0.0; k * freqs.len() * win];
    let mut kern_im = vec![0.0; k * freqs.len() * win];
    for t in 0..k {
        for (fi, &f) in freqs.iter().enumerate() {
            let base = (t * freqs.len() + fi) * win;
            for i in 0..win {
                let ph = 2.0 * PI * f * i as f64 / fs;
                let v = basis.tapers[[t, i]];
                kern_re[base + i] = v * ph.cos();
                kern_im[base + i] = -v * ph.sin();
            }
        }
    }

    let n_trials = epochs.n_trials();
    let mut maps = Vec::with_capacity(epochs.n_channels());
    for ch in 0..epochs.n_channels() {
        let mut power = Array2::<f64>::zeros((freqs.len(), starts.len()));
        for trial in 0..n_trials {
            let row = epochs.data.slice(s![trial, ch, ..]);
            let x = row.as_slice().map(|s| s.to_vec()).unwrap_or_else(|| row.to_vec());
            for (ti, &st) in starts.iter().enumerate() {
                let seg = &x[st..st + win];
                for fi in 0..freqs.len() {
                    let mut acc = 0.0;
                    for t in 0..k {
                        let base = (t * freqs.len() + fi) * win;
                        let (mut re, mut im) = (0.0, 0.0);
                        for i in 0..win {
                            re += kern_re[base + i] * seg[i];
                            im += kern_im[base + i] * seg[i];
                        }
                        acc += re * re + im * im;
                    }
                    power[[fi, ti]] += acc / k as f64;
                }
            }
        }
        if n_trials > 0 {
            power /= n_trials as f64;
        }
        maps.push(TimeFrequencyMap {
            channel: epochs.channels[ch].label.clone(),
            freqs: freqs.to_vec(),
            times: times.clone(),
            power,
        });
    }
    Ok(maps)
}
