//! Second-order-section IIR filters: Butterworth band-pass via the bilinear
//! transform with pre-warped edges, and a two-pole notch.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::recording::Recording;
use crate::error::{Error, Result};

/// One normalized biquad, `a[0] == 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn response(&self, w: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        (self.b[0] + z1 * self.b[1] + z2 * self.b[2]) / (self.a[0] + z1 * self.a[1] + z2 * self.a[2])
    }

    /// Roots of `z² + a1 z + a2`.
    pub fn poles(&self) -> [Complex64; 2] {
        let (a1, a2) = (self.a[1], self.a[2]);
        let disc = Complex64::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
        [(-a1 + disc) / 2.0, (-a1 - disc) / 2.0]
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.norm() < 1.0)
    }

    #[inline]
    fn step(&self, x: f64, z: &mut [f64; 2]) -> f64 {
        let y = self.b[0] * x + z[0];
        z[0] = self.b[1] * x - self.a[1] * y + z[1];
        z[1] = self.b[2] * x - self.a[2] * y;
        y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum IirKind {
    Bandpass { order: usize, low_hz: f64, high_hz: f64 },
    Notch { freq_hz: f64, quality: f64 },
}

/// SOS cascade with optional per-channel streaming state.
#[derive(Clone, Debug, PartialEq)]
pub struct IirFilter {
    sections: Vec<Biquad>,
    kind: IirKind,
    fs: f64,
    state: Vec<Vec<[f64; 2]>>,
}

impl IirFilter {
    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn kind(&self) -> IirKind {
        self.kind
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(Biquad::is_stable)
    }

    /// Complex frequency response at `freq_hz`.
    pub fn response(&self, freq_hz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz / self.fs;
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(w))
    }

    pub fn magnitude_db(&self, freq_hz: f64) -> f64 {
        20.0 * self.response(freq_hz).norm().log10()
    }

    /// Zeroes every channel's state.
    pub fn reset(&mut self) {
        self.state.clear();
    }

    /// Internal state of one channel, if it has been touched.
    pub fn channel_state(&self, channel: usize) -> Option<&[[f64; 2]]> {
        self.state.get(channel).map(Vec::as_slice)
    }

    pub fn channel_state_mut(&mut self, channel: usize) -> &mut [[f64; 2]] {
        self.ensure_state(channel);
        &mut self.state[channel]
    }

    fn ensure_state(&mut self, channel: usize) {
        if self.state.len() <= channel {
            let n = self.sections.len();
            self.state.resize_with(channel + 1, || vec![[0.0; 2]; n]);
        }
    }

    /// Filters `samples` in place, continuing from `channel`'s carried state.
    pub fn process(&mut self, channel: usize, samples: &mut [f64]) {
        self.ensure_state(channel);
        let state = &mut self.state[channel];
        for x in samples.iter_mut() {
            let mut v = *x;
            for (sec, z) in self.sections.iter().zip(state.iter_mut()) {
                v = sec.step(v, z);
            }
            *x = v;
        }
    }

    /// Single-sample version of [`process`](Self::process).
    #[inline]
    pub fn process_sample(&mut self, channel: usize, x: f64) -> f64 {
        self.ensure_state(channel);
        let state = &mut self.state[channel];
        let mut v = x;
        for (sec, z) in self.sections.iter().zip(state.iter_mut()) {
            v = sec.step(v, z);
        }
        v
    }
}

fn check_band(low_hz: f64, high_hz: f64, fs: f64) -> Result<()> {
    let nyq = fs / 2.0;
    if !(low_hz > 0.0 && low_hz < high_hz && high_hz < nyq) {
        return Err(Error::InvalidBand(format!(
            "need 0 < {low_hz} < {high_hz} < {nyq} Hz"
        )));
    }
    Ok(())
}

fn bilinear(s: Complex64, fs: f64) -> Complex64 {
    let k = 2.0 * fs;
    (k + s) / (k - s)
}

/// Butterworth band-pass of prototype order `order` (yielding `order`
/// biquads), unity gain at the geometric center, −3.01 dB at both edges.
pub fn design_butterworth_bandpass(order: usize, low_hz: f64, high_hz: f64, fs: f64) -> Result<IirFilter> {
    if !matches!(order, 2 | 4 | 6 | 8) {
        return Err(Error::UnsupportedOrder(order));
    }
    check_band(low_hz, high_hz, fs)?;

    let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
    let (wl, wh) = (warp(low_hz), warp(high_hz));
    let bw = wh - wl;
    let w0 = (wl * wh).sqrt();
    let center = 2.0 * (w0 / (2.0 * fs)).atan();

    let mut sections = Vec::with_capacity(order);
    for k in 0..order / 2 {
        let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
        let p = Complex64::from_polar(1.0, theta);
        let pb = p * bw;
        let disc = (pb * pb - 4.0 * w0 * w0).sqrt();
        for s in [(pb + disc) / 2.0, (pb - disc) / 2.0] {
            let z = bilinear(s, fs);
            let mut sec = Biquad {
                b: [1.0, 0.0, -1.0],
                a: [1.0, -2.0 * z.re, z.norm_sqr()],
            };
            let g = sec.response(center).norm();
            for b in sec.b.iter_mut() {
                *b /= g;
            }
            sections.push(sec);
        }
    }
    let filter = IirFilter {
        sections,
        kind: IirKind::Bandpass { order, low_hz, high_hz },
        fs,
        state: Vec::new(),
    };
    if !filter.is_stable() {
        return Err(Error::Numerical("band-pass design produced an unstable section".into()));
    }
    Ok(filter)
}

/// Two-pole notch with −3 dB bandwidth `freq_hz / quality`.
pub fn design_notch(freq_hz: f64, quality: f64, fs: f64) -> Result<IirFilter> {
    if !(freq_hz > 0.0 && freq_hz < fs / 2.0) {
        return Err(Error::InvalidBand(format!(
            "notch at {freq_hz} Hz outside (0, {}) Hz",
            fs / 2.0
        )));
    }
    if !(quality > 0.0) {
        return Err(Error::InvalidRequest(format!("quality must be positive, got {quality}")));
    }
    let w0 = 2.0 * PI * freq_hz / fs;
    let bw = w0 / quality;
    let g = 1.0 / (1.0 + (bw / 2.0).tan());
    let c = w0.cos();
    let sec = Biquad {
        b: [g, -2.0 * g * c, g],
        a: [1.0, -2.0 * g * c, 2.0 * g - 1.0],
    };
    Ok(IirFilter {
        sections: vec![sec],
        kind: IirKind::Notch { freq_hz, quality },
        fs,
        state: Vec::new(),
    })
}

/// Causally filters the listed channels of `recording`, carrying state in
/// `filter` so a following call continues the stream. An empty channel list
/// leaves the recording unchanged and logs a warning.
pub fn apply_iir_causal(filter: &mut IirFilter, recording: &Recording, channels: &[usize]) -> Result<Recording> {
    let mut out = recording.clone();
    apply_iir_in_place(filter, &mut out, channels)?;
    Ok(out)
}

pub fn apply_iir_in_place(filter: &mut IirFilter, recording: &mut Recording, channels: &[usize]) -> Result<()> {
    if channels.is_empty() {
        log::warn!("apply_iir_causal called with an empty channel subset; nothing filtered");
        return Ok(());
    }
    if (recording.fs() - filter.fs).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "filter designed for {} Hz applied to {} Hz data",
            filter.fs,
            recording.fs()
        )));
    }
    let n_ch = recording.n_channels();
    if let Some(&bad) = channels.iter().find(|&&c| c >= n_ch) {
        return Err(Error::UnknownChannel(format!("index {bad}")));
    }
    let data = recording.data_mut();
    for &ch in channels {
        let mut row = data.row_mut(ch);
        match row.as_slice_mut() {
            Some(s) => filter.process(ch, s),
            None => {
                let mut tmp = row.to_vec();
                filter.process(ch, &mut tmp);
                row.iter_mut().zip(tmp).for_each(|(d, v)| *d = v);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::recording::{ChannelInfo, ChannelKind};
    use ndarray::Array2;

    fn prewarped_butterworth_db(order: usize, lo: f64, hi: f64, fs: f64, f: f64) -> f64 {
        // analytic |H|² of the pre-warped analog prototype after LP→BP mapping
        let warp = |x: f64| 2.0 * fs * (PI * x / fs).tan();
        let (wl, wh, w) = (warp(lo), warp(hi), warp(f));
        let w0sq = wl * wh;
        let x = (w * w - w0sq) / (w * (wh - wl));
        -10.0 * (1.0 + x.powi(2 * order as i32)).log10()
    }

    #[test]
    fn bandpass_edges_are_minus_3db() {
        let f = design_butterworth_bandpass(4, 30.0, 500.0, 2048.0).unwrap();
        assert!(f.is_stable());
        assert_eq!(f.sections().len(), 4);
        for edge in [30.0, 500.0] {
            let db = f.magnitude_db(edge);
            assert!((db + 3.0103).abs() < 0.1, "edge {edge}: {db}");
        }
    }

    #[test]
    fn bandpass_matches_analytic_response() {
        for &(order, lo, hi) in &[(4usize, 30.0, 500.0), (8, 0.1, 3.0), (2, 8.0, 12.0), (6, 1.0, 40.0)] {
            let f = design_butterworth_bandpass(order, lo, hi, 2048.0).unwrap();
            assert!(f.is_stable());
            for i in 0..20 {
                let probe = lo * 0.2 * ((hi * 3.0) / (lo * 0.2)).powf(i as f64 / 19.0);
                let probe = probe.min(1000.0);
                let want = prewarped_butterworth_db(order, lo, hi, 2048.0, probe);
                let got = f.magnitude_db(probe);
                assert!((want - got).abs() < 0.1, "{order} {lo}-{hi} @ {probe}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn invalid_designs() {
        assert!(matches!(
            design_butterworth_bandpass(4, 30.0, 30.0, 2048.0),
            Err(Error::InvalidBand(_))
        ));
        assert!(matches!(
            design_butterworth_bandpass(4, 30.0, 1200.0, 2048.0),
            Err(Error::InvalidBand(_))
        ));
        assert!(matches!(
            design_butterworth_bandpass(3, 30.0, 500.0, 2048.0),
            Err(Error::UnsupportedOrder(3))
        ));
        assert!(matches!(design_notch(2000.0, 30.0, 2048.0), Err(Error::InvalidBand(_))));
    }

    #[test]
    fn notch_response_shape() {
        let f = design_notch(50.0, 30.0, 2048.0).unwrap();
        assert!(f.magnitude_db(50.0) <= -30.0);
        assert!(f.magnitude_db(0.0).abs() < 1.0);
        assert!(f.magnitude_db(100.0).abs() < 1.0);
    }

    fn one_channel(x: Vec<f64>) -> Recording {
        let n = x.len();
        Recording::new(
            Array2::from_shape_vec((1, n), x).unwrap(),
            2048.0,
            vec![ChannelInfo::new("x", ChannelKind::Emg)],
        )
        .unwrap()
    }

    #[test]
    fn notch_attenuates_tone_and_passes_dc() {
        let fs = 2048.0;
        let n = 4 * 2048;
        let tone: Vec<f64> = (0..n).map(|i| (2.0 * PI * 50.0 * i as f64 / fs).sin()).collect();
        let mut f = design_notch(50.0, 30.0, fs).unwrap();
        let out = apply_iir_causal(&mut f, &one_channel(tone.clone()), &[0]).unwrap();
        let rms = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
        let y = out.channel(0).to_vec();
        let atten = 20.0 * (rms(&tone[2048..]) / rms(&y[2048..])).log10();
        assert!(atten >= 30.0, "attenuation {atten} dB");

        let mut f = design_notch(50.0, 30.0, fs).unwrap();
        let dc = one_channel(vec![1.0; n]);
        let out = apply_iir_causal(&mut f, &dc, &[0]).unwrap();
        assert!((out.channel(0)[n - 1] - 1.0).abs() < 0.01);
    }

    #[test]
    fn zero_in_zero_out_and_causality() {
        let mut f = design_butterworth_bandpass(4, 30.0, 500.0, 2048.0).unwrap();
        let out = apply_iir_causal(&mut f, &one_channel(vec![0.0; 500]), &[0]).unwrap();
        assert!(out.channel(0).iter().all(|&v| v == 0.0));

        let x: Vec<f64> = (0..400).map(|i| ((i * 37 % 101) as f64 - 50.0) / 50.0).collect();
        let mut y = x.clone();
        y[200] += 5.0;
        let mut f1 = design_butterworth_bandpass(4, 30.0, 500.0, 2048.0).unwrap();
        let mut f2 = f1.clone();
        let a = apply_iir_causal(&mut f1, &one_channel(x), &[0]).unwrap();
        let b = apply_iir_causal(&mut f2, &one_channel(y), &[0]).unwrap();
        for n in 0..200 {
            assert_eq!(a.channel(0)[n], b.channel(0)[n]);
        }
        assert_ne!(a.channel(0)[200], b.channel(0)[200]);
    }

    #[test]
    fn empty_subset_is_noop() {
        let rec = one_channel(vec![1.0, 2.0, 3.0]);
        let mut f = design_notch(50.0, 30.0, 2048.0).unwrap();
        let out = apply_iir_causal(&mut f, &rec, &[]).unwrap();
        assert_eq!(out, rec);
    }

    #[test]
    fn chunked_filtering_is_bit_identical() {
        let fs = 2048.0;
        let n = 10 * 2048;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * 80.0 * i as f64 / fs).sin() + 0.3 * (2.0 * PI * 50.0 * i as f64 / fs).cos())
            .collect();
        let mut whole = design_butterworth_bandpass(4, 30.0, 500.0, fs).unwrap();
        let oracle = apply_iir_causal(&mut whole, &one_channel(x.clone()), &[0]).unwrap();

        let mut chunked = design_butterworth_bandpass(4, 30.0, 500.0, fs).unwrap();
        let chunk = (0.1 * fs) as usize;
        let mut got = Vec::with_capacity(n);
        for block in x.chunks(chunk) {
            let rec = one_channel(block.to_vec());
            let out = apply_iir_causal(&mut chunked, &rec, &[0]).unwrap();
            got.extend(out.channel(0).iter().copied());
        }
        assert_eq!(got, oracle.channel(0).to_vec());
    }
}
