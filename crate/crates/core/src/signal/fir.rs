//! Linear-phase FIR band-pass (Hamming-windowed sinc) and zero-phase
//! application with reflection padding.

use std::f64::consts::PI;

use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::recording::Recording;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirFilter {
    taps: Vec<f64>,
    pub l_freq: f64,
    pub h_freq: f64,
    pub l_trans: f64,
    pub h_trans: f64,
    pub length_s: f64,
    pub fs: f64,
}

impl FirFilter {
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Magnitude of the tap DFT at `freq_hz` (delay removed).
    pub fn gain(&self, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / self.fs;
        let mid = (self.taps.len() - 1) as f64 / 2.0;
        let (mut re, mut im) = (0.0, 0.0);
        for (n, &h) in self.taps.iter().enumerate() {
            let ph = w * (n as f64 - mid);
            re += h * ph.cos();
            im -= h * ph.sin();
        }
        (re * re + im * im).sqrt()
    }
}

fn sinc_lowpass(cutoff_norm: f64, m: f64) -> f64 {
    // ideal low-pass impulse response, cutoff in cycles/sample
    if m == 0.0 {
        2.0 * cutoff_norm
    } else {
        (2.0 * PI * cutoff_norm * m).sin() / (PI * m)
    }
}

/// Windowed-sinc band-pass. Pass band `[l_freq, h_freq]`, cutoffs at the
/// transition-band midpoints, `round(length_s·fs)` taps forced odd.
pub fn design_fir_bandpass(
    l_freq: f64,
    h_freq: f64,
    l_trans: f64,
    h_trans: f64,
    length_s: f64,
    fs: f64,
) -> Result<FirFilter> {
    let nyq = fs / 2.0;
    if !(l_freq > 0.0 && l_freq < h_freq && h_freq < nyq) {
        return Err(Error::InvalidBand(format!("need 0 < {l_freq} < {h_freq} < {nyq} Hz")));
    }
    if !(l_trans > 0.0 && h_trans > 0.0) {
        return Err(Error::InvalidBand("transition bandwidths must be positive".into()));
    }
    if l_freq - l_trans < 0.0 || h_freq + h_trans > nyq {
        return Err(Error::InvalidBand(format!(
            "transition bands [{}, {}] Hz leave (0, {nyq}) Hz",
            l_freq - l_trans,
            h_freq + h_trans
        )));
    }
    let mut n_taps = (length_s * fs).round() as usize;
    if n_taps < 3 {
        return Err(Error::TooShort(format!("{n_taps} taps; need at least 3")));
    }
    if n_taps % 2 == 0 {
        n_taps += 1;
    }
    let f1 = (l_freq - l_trans / 2.0) / fs;
    let f2 = (h_freq + h_trans / 2.0) / fs;
    let half = (n_taps - 1) / 2;
    let mut taps = vec![0.0; n_taps];
    for k in 0..=half {
        let m = k as f64;
        let n = (half + k) as f64;
        let window = 0.54 - 0.46 * (2.0 * PI * n / (n_taps - 1) as f64).cos();
        let h = (sinc_lowpass(f2, m) - sinc_lowpass(f1, m)) * window;
        taps[half + k] = h;
        taps[half - k] = h;
    }
    Ok(FirFilter {
        taps,
        l_freq,
        h_freq,
        l_trans,
        h_trans,
        length_s,
        fs,
    })
}

/// Delay-compensated application to every channel; output aligned with and
/// as long as the input. Edges are reflection-padded.
pub fn apply_fir_zero_phase(filter: &FirFilter, recording: &Recording) -> Result<Recording> {
    let all: Vec<usize> = (0..recording.n_channels()).collect();
    apply_fir_zero_phase_channels(filter, recording, &all)
}

/// Same as [`apply_fir_zero_phase`] restricted to `channels`; the others are
/// copied through.
pub fn apply_fir_zero_phase_channels(filter: &FirFilter, recording: &Recording, channels: &[usize]) -> Result<Recording> {
    if (recording.fs() - filter.fs).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "filter designed for {} Hz applied to {} Hz data",
            filter.fs,
            recording.fs()
        )));
    }
    let mut data = recording.data().clone();
    filter_rows(filter.taps(), &mut data, channels)?;
    recording.with_data(data)
}

/// Zero-phase filtering of selected rows in place.
pub(crate) fn filter_rows(taps: &[f64], data: &mut Array2<f64>, rows: &[usize]) -> Result<()> {
    let n_taps = taps.len();
    let pad = (n_taps - 1) / 2;
    let len = data.ncols();
    if len <= pad {
        return Err(Error::TooShort(format!(
            "{len} samples; zero-phase filtering with {n_taps} taps needs more than {pad}"
        )));
    }
    if let Some(&bad) = rows.iter().find(|&&r| r >= data.nrows()) {
        return Err(Error::UnknownChannel(format!("index {bad}")));
    }
    // all-zero rows stay exactly zero
    let rows: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|&r| data.row(r).iter().any(|&v| v != 0.0))
        .collect();
    if rows.is_empty() {
        return Ok(());
    }
    let m = (len + n_taps - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);

    let mut h: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); m];
    for (slot, &t) in h.iter_mut().zip(taps) {
        slot.re = t;
    }
    fwd.process(&mut h);
    let scale = 1.0 / m as f64;

    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    // two real rows per complex transform: real and imaginary parts
    for pair in rows.chunks(2) {
        buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for (slot, &row) in pair.iter().enumerate() {
            let x = data.row(row);
            for (i, c) in buf.iter_mut().take(len + 2 * pad).enumerate() {
                let v = if i < pad {
                    x[pad - i]
                } else if i < pad + len {
                    x[i - pad]
                } else {
                    x[len - 2 - (i - pad - len)]
                };
                if slot == 0 {
                    c.re = v;
                } else {
                    c.im = v;
                }
            }
        }
        fwd.process(&mut buf);
        for (c, hk) in buf.iter_mut().zip(&h) {
            *c *= hk * scale;
        }
        inv.process(&mut buf);
        for (slot, &row) in pair.iter().enumerate() {
            let mut out = data.row_mut(row);
            for (n, y) in out.iter_mut().enumerate() {
                let c = buf[n + n_taps - 1];
                *y = if slot == 0 { c.re } else { c.im };
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::recording::{ChannelInfo, ChannelKind};

    fn smr_filter() -> FirFilter {
        design_fir_bandpass(1.0, 35.0, 1.0, 8.75, 3.3, 2048.0).unwrap()
    }

    fn recording(rows: Vec<Vec<f64>>, fs: f64) -> Recording {
        let n = rows[0].len();
        let chans = (0..rows.len())
            .map(|i| ChannelInfo::new(format!("c{i}"), ChannelKind::Eeg))
            .collect();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Recording::new(Array2::from_shape_vec((flat.len() / n, n), flat).unwrap(), fs, chans).unwrap()
    }

    #[test]
    fn tap_count_and_symmetry() {
        let f = smr_filter();
        assert_eq!(f.len(), 6759);
        let t = f.taps();
        for i in 0..t.len() {
            assert_eq!(t[i], t[t.len() - 1 - i]);
        }
    }

    #[test]
    fn midband_gain_and_dc_rejection() {
        let f = smr_filter();
        let g = 20.0 * f.gain(18.0).log10();
        assert!(g.abs() < 0.5, "{g} dB");
        let dc: f64 = f.taps().iter().sum();
        assert!(dc.abs() < 0.05);
    }

    #[test]
    fn invalid_transition_bands() {
        assert!(matches!(
            design_fir_bandpass(1.0, 35.0, 1.5, 8.75, 3.3, 2048.0),
            Err(Error::InvalidBand(_))
        ));
        assert!(matches!(
            design_fir_bandpass(1.0, 1020.0, 1.0, 8.75, 3.3, 2048.0),
            Err(Error::InvalidBand(_))
        ));
    }

    #[test]
    fn sinusoid_passes_with_zero_phase() {
        let fs = 2048.0;
        let n = 20 * 2048;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 18.0 * i as f64 / fs).sin()).collect();
        let out = apply_fir_zero_phase(&smr_filter(), &recording(vec![x.clone()], fs)).unwrap();
        let y = out.channel(0);
        for i in (4 * 2048..16 * 2048).step_by(97) {
            assert!((y[i] - x[i]).abs() < 0.01, "sample {i}: {} vs {}", y[i], x[i]);
        }
    }

    #[test]
    fn dc_and_zero_inputs() {
        let fs = 2048.0;
        let n = 20 * 2048;
        let out = apply_fir_zero_phase(&smr_filter(), &recording(vec![vec![1.0; n], vec![0.0; n]], fs)).unwrap();
        assert!(out.channel(0).iter().all(|v| v.abs() < 0.05));
        assert!(out.channel(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn too_short_recording() {
        let fs = 2048.0;
        let rec = recording(vec![vec![1.0; 3000]], fs);
        assert!(matches!(apply_fir_zero_phase(&smr_filter(), &rec), Err(Error::TooShort(_))));
    }

    #[test]
    fn fft_path_matches_direct_convolution() {
        let f = design_fir_bandpass(5.0, 20.0, 2.0, 5.0, 0.1, 256.0).unwrap();
        let x: Vec<f64> = (0..400).map(|i| ((i * 7919 % 113) as f64 - 56.0) / 30.0).collect();
        let out = apply_fir_zero_phase(&f, &recording(vec![x.clone(), x.iter().map(|v| -v).collect()], 256.0)).unwrap();
        let taps = f.taps();
        let pad = (taps.len() - 1) / 2;
        let refl = |i: isize| -> f64 {
            let l = x.len() as isize;
            let j = if i < 0 { -i } else if i >= l { 2 * (l - 1) - i } else { i };
            x[j as usize]
        };
        for n in 0..x.len() {
            let mut acc = 0.0;
            for (k, &h) in taps.iter().enumerate() {
                acc += h * refl(n as isize + pad as isize - k as isize);
            }
            assert!((acc - out.channel(0)[n]).abs() < 1e-12);
            assert!((acc + out.channel(1)[n]).abs() < 1e-12);
        }
    }
}
