//! Causal EMG decoder: CAR → band-pass → notch per sample, mean power over a
//! trailing window, one class every emit period.

use std::io::Write;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::frame::{FrameBody, StreamFrame};
use crate::decoding::LinearModel;
use crate::error::{Error, Result};
use crate::signal::{design_butterworth_bandpass, design_notch, Class, IirFilter, Recording};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmgChainConfig {
    pub band_hz: (f64, f64),
    pub order: usize,
    pub notch_hz: f64,
    pub notch_q: f64,
}

impl Default for EmgChainConfig {
    fn default() -> Self {
        Self {
            band_hz: (30.0, 500.0),
            order: 4,
            notch_hz: 50.0,
            notch_q: 30.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderConfig {
    pub chain: EmgChainConfig,
    pub window_s: f64,
    pub emit_period_s: f64,
    /// Stream to decode; other streams are ignored.
    pub data_stream: u16,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            chain: EmgChainConfig::default(),
            window_s: 0.2,
            emit_period_s: 0.05,
            data_stream: super::transport::DEFAULT_DATA_STREAM,
        }
    }
}

impl DecoderConfig {
    pub fn window_samples(&self, fs: f64) -> usize {
        (self.window_s * fs).round() as usize
    }

    /// Sample index whose arrival triggers emission `k`.
    pub fn emit_sample(&self, k: u64, fs: f64) -> u64 {
        (k as f64 * self.emit_period_s * fs + 1e-9).floor() as u64
    }

    fn validate(&self, fs: f64) -> Result<()> {
        if !(self.emit_period_s > 0.0) || !(self.window_s > 0.0) || self.window_samples(fs) == 0 {
            return Err(Error::InvalidRequest(format!(
                "window {} s / emit period {} s at {fs} Hz",
                self.window_s, self.emit_period_s
            )));
        }
        Ok(())
    }
}

/// Per-sample causal filter chain shared by training and online decoding.
#[derive(Clone, Debug)]
pub struct EmgChain {
    n_channels: usize,
    bandpass: IirFilter,
    notch: IirFilter,
}

impl EmgChain {
    pub fn new(n_channels: usize, fs: f64, cfg: &EmgChainConfig) -> Result<Self> {
        if n_channels == 0 {
            return Err(Error::InsufficientChannels("EMG chain needs channels".into()));
        }
        Ok(Self {
            n_channels,
            bandpass: design_butterworth_bandpass(cfg.order, cfg.band_hz.0, cfg.band_hz.1, fs)?,
            notch: design_notch(cfg.notch_hz, cfg.notch_q, fs)?,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    /// Filters one multichannel sample in place.
    pub fn push_sample(&mut self, x: &mut [f64]) {
        car_sample(x);
        for (c, v) in x.iter_mut().enumerate() {
            *v = self.notch.process_sample(c, self.bandpass.process_sample(c, *v));
        }
    }

    /// Whole-array path: CAR per sample, then each filter over full channels.
    pub fn filter(&mut self, data: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if data.nrows() != self.n_channels {
            return Err(Error::Layout(format!(
                "{} channels given to a {}-channel chain",
                data.nrows(),
                self.n_channels
            )));
        }
        let mut out = data.to_owned();
        let mut col = vec![0.0; self.n_channels];
        for j in 0..out.ncols() {
            for c in 0..self.n_channels {
                col[c] = out[[c, j]];
            }
            car_sample(&mut col);
            for c in 0..self.n_channels {
                out[[c, j]] = col[c];
            }
        }
        for c in 0..self.n_channels {
            let mut row = out.row(c).to_vec();
            self.bandpass.process(c, &mut row);
            self.notch.process(c, &mut row);
            out.row_mut(c).assign(&ndarray::ArrayView1::from(&row));
        }
        Ok(out)
    }
}

fn car_sample(x: &mut [f64]) {
    let mut s = 0.0;
    for v in x.iter() {
        s += *v;
    }
    let m = s / x.len() as f64;
    for v in x.iter_mut() {
        *v -= m;
    }
}

/// Filters `channels` of `recording` with a fresh chain, returning a
/// recording of just those channels.
pub fn emg_chain_filter(recording: &Recording, channels: &[usize], cfg: &EmgChainConfig) -> Result<Recording> {
    let picked = recording.pick(channels)?;
    let mut chain = EmgChain::new(channels.len(), recording.fs(), cfg)?;
    let out = chain.filter(picked.data().view())?;
    picked.with_data(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub time_s: f64,
    pub class: Class,
}

/// Mean of squares per channel over `window`, summed oldest first.
fn window_features(window: impl Fn(usize, usize) -> f64, n_channels: usize, w: usize, out: &mut [f64]) {
    for (c, o) in out.iter_mut().enumerate().take(n_channels) {
        let mut s = 0.0;
        for i in 0..w {
            let v = window(i, c);
            s += v * v;
        }
        *o = s / w as f64;
    }
}

/// Online decoder state. Consumes DATA frames of one stream in order.
#[derive(Clone, Debug)]
pub struct DecoderState {
    cfg: DecoderConfig,
    fs: f64,
    chain: EmgChain,
    model: LinearModel,
    window: usize,
    /// Filtered samples, `window` rows of `n_channels`.
    ring: Vec<f64>,
    head: usize,
    consumed: u64,
    next_emit: u64,
    t0: Option<f64>,
    last_ts: f64,
    last_class: Option<Class>,
    ended: bool,
    scratch: Vec<f64>,
    features: Vec<f64>,
    fault: bool,
}

impl DecoderState {
    pub fn new(model: LinearModel, n_channels: usize, fs: f64, cfg: DecoderConfig) -> Result<Self> {
        cfg.validate(fs)?;
        if model.n_features() != n_channels {
            return Err(Error::Layout(format!(
                "model expects {} features but the stream has {n_channels} channels",
                model.n_features()
            )));
        }
        let window = cfg.window_samples(fs);
        Ok(Self {
            chain: EmgChain::new(n_channels, fs, &cfg.chain)?,
            cfg,
            fs,
            model,
            window,
            ring: vec![0.0; window * n_channels],
            head: 0,
            consumed: 0,
            next_emit: 0,
            t0: None,
            last_ts: f64::NEG_INFINITY,
            last_class: None,
            ended: false,
            scratch: vec![0.0; n_channels],
            features: vec![0.0; n_channels],
            fault: false,
        })
    }

    pub fn last_class(&self) -> Option<Class> {
        self.last_class
    }

    pub fn samples_consumed(&self) -> u64 {
        self.consumed
    }

    pub fn is_ended(&self) -> bool {
        self.ended
    }

    /// Perturbs the feature window so the online stream diverges from the
    /// offline reference. Only for exercising the equivalence check.
    #[doc(hidden)]
    pub fn inject_fault(&mut self) {
        self.fault = true;
    }

    /// Feeds one frame, appending any predictions it completes.
    pub fn push_frame(&mut self, frame: &StreamFrame, out: &mut Vec<Prediction>) -> Result<()> {
        if frame.stream_id != self.cfg.data_stream {
            return Ok(());
        }
        if self.ended {
            return Err(Error::Protocol("frame after END".into()));
        }
        if !(frame.timestamp > self.last_ts) {
            return Err(Error::Protocol(format!(
                "timestamp {} does not follow {}",
                frame.timestamp, self.last_ts
            )));
        }
        self.last_ts = frame.timestamp;
        match &frame.body {
            FrameBody::End => {
                self.ended = true;
                Ok(())
            }
            FrameBody::Marker(_) => Ok(()),
            FrameBody::Data {
                n_channels,
                n_samples,
                samples,
            } => {
                let nc = self.chain.n_channels();
                if *n_channels as usize != nc {
                    return Err(Error::Layout(format!("frame has {n_channels} channels, decoder {nc}")));
                }
                if self.t0.is_none() {
                    self.t0 = Some(frame.timestamp);
                }
                let ns = *n_samples as usize;
                for j in 0..ns {
                    for c in 0..nc {
                        self.scratch[c] = samples[c * ns + j] as f64;
                    }
                    self.push_sample(out)?;
                }
                Ok(())
            }
        }
    }

    fn push_sample(&mut self, out: &mut Vec<Prediction>) -> Result<()> {
        let nc = self.chain.n_channels();
        self.chain.push_sample(&mut self.scratch);
        self.ring[self.head * nc..(self.head + 1) * nc].copy_from_slice(&self.scratch);
        if self.fault {
            self.ring[self.head * nc] += 1e-3;
        }
        self.head = (self.head + 1) % self.window;
        let idx = self.consumed;
        self.consumed += 1;
        while self.cfg.emit_sample(self.next_emit, self.fs) < idx {
            self.next_emit += 1;
        }
        if self.cfg.emit_sample(self.next_emit, self.fs) == idx && self.consumed >= self.window as u64 {
            let (w, head, ring) = (self.window, self.head, &self.ring);
            window_features(|i, c| ring[((head + i) % w) * nc + c], nc, w, &mut self.features);
            let class = self.model.predict_one(&self.features)?;
            let time_s = self.t0.expect("set on first data") + self.next_emit as f64 * self.cfg.emit_period_s;
            out.push(Prediction { time_s, class });
            self.last_class = Some(class);
            self.next_emit += 1;
        }
        Ok(())
    }
}

/// Runs a decoder over an in-memory frame sequence.
pub fn online_emg_decode(
    frames: &[StreamFrame],
    model: &LinearModel,
    n_channels: usize,
    fs: f64,
    cfg: &DecoderConfig,
) -> Result<Vec<Prediction>> {
    let mut st = DecoderState::new(model.clone(), n_channels, fs, cfg.clone())?;
    let mut out = Vec::new();
    for f in frames {
        st.push_frame(f, &mut out)?;
    }
    Ok(out)
}

/// Batch reference for [`online_emg_decode`]: filters the whole recording at
/// once and evaluates every emission instant directly. Feed it the data at
/// wire precision to compare against a streamed run.
pub fn offline_emg_decode(recording: &Recording, model: &LinearModel, cfg: &DecoderConfig) -> Result<Vec<Prediction>> {
    let fs = recording.fs();
    cfg.validate(fs)?;
    let nc = recording.n_channels();
    let mut chain = EmgChain::new(nc, fs, &cfg.chain)?;
    let filtered = chain.filter(recording.data().view())?;
    let w = cfg.window_samples(fs);
    let n = filtered.ncols() as u64;
    let mut feats = vec![0.0; nc];
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let e = cfg.emit_sample(k, fs);
        if e >= n {
            break;
        }
        if e + 1 >= w as u64 {
            let start = (e + 1) as usize - w;
            window_features(|i, c| filtered[[c, start + i]], nc, w, &mut feats);
            out.push(Prediction {
                time_s: recording.t0 + k as f64 * cfg.emit_period_s,
                class: model.predict_one(&feats)?,
            });
        }
        k += 1;
    }
    Ok(out)
}

pub fn write_predictions_csv<W: Write>(preds: &[Prediction], mut w: W) -> Result<()> {
    writeln!(w, "time_s,class")?;
    for p in preds {
        writeln!(w, "{},{}", p.time_s, p.class.name())?;
    }
    Ok(())
}

pub fn read_predictions_csv(text: &str) -> Result<Vec<Prediction>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("time_s,class") {
        return Err(Error::Format("predictions: CSV header must be time_s,class".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (t, c) = l
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("predictions: bad prediction row {l:?}")))?;
            Ok(Prediction {
                time_s: t.trim().parse().map_err(|_| Error::Format(format!("predictions: bad time {t:?}")))?,
                class: c.trim().parse().map_err(|_| Error::Format(format!("predictions: bad class {c:?}")))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoding::ModelKind;
    use crate::signal::{ChannelInfo, ChannelKind, MarkerList};
    use crate::stream::transport::{plan_frames, wire_precision, ProducerConfig};
    use ndarray::array;
    use rand::{Rng, SeedableRng};

    fn model() -> LinearModel {
        // Power in channel 0 → LEFT, channel 2 → RIGHT, neither → REST.
        LinearModel {
            kind: ModelKind::Lda,
            classes: vec![Class::Left, Class::Right, Class::Rest],
            weights: array![[1e10, 0.0, -1e10, 0.0], [-1e10, 0.0, 1e10, 0.0], [0.0; 4]],
            intercepts: array![-1.0, -1.0, 0.0],
        }
    }

    fn recording(n: usize, seed: u64) -> Recording {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data = Array2::from_shape_fn((4, n), |(c, i)| {
            let burst = if c == 0 && (800..1600).contains(&i) || c == 2 && (2400..3000).contains(&i) {
                1e-4
            } else {
                1e-6
            };
            burst * rng.gen_range(-1.0..1.0)
        });
        let ch = (0..4).map(|i| ChannelInfo::new(format!("EMG{i}"), ChannelKind::Emg)).collect();
        Recording::new(data, 2048.0, ch).unwrap().with_t0(12.5)
    }

    fn decode(rec: &Recording, chunk: usize) -> Vec<Prediction> {
        let pc = ProducerConfig { chunk_samples: chunk, ..Default::default() };
        let frames = plan_frames(rec, &MarkerList::new(), &pc).unwrap();
        online_emg_decode(&frames, &model(), 4, rec.fs(), &DecoderConfig::default()).unwrap()
    }

    #[test]
    fn online_matches_offline_bitwise() {
        let rec = recording(4096, 1);
        let on = decode(&rec, 32);
        let off = offline_emg_decode(&wire_precision(&rec), &model(), &DecoderConfig::default()).unwrap();
        assert!(!on.is_empty());
        assert_eq!(on, off);
        assert!(on.iter().any(|p| p.class == Class::Left));
        assert!(on.iter().any(|p| p.class == Class::Right));
        assert!(on.iter().any(|p| p.class == Class::Rest));
    }

    #[test]
    fn chunk_invariant() {
        let rec = recording(3000, 2);
        assert_eq!(decode(&rec, 1), decode(&rec, 256));
    }

    #[test]
    fn emission_grid_and_latency() {
        let rec = recording(4096, 3);
        let cfg = DecoderConfig::default();
        let p = decode(&rec, 50);
        let w = cfg.window_samples(2048.0) as f64;
        // First emission is the first grid point after the window fills.
        let first = p[0].time_s - rec.t0;
        assert!(first * 2048.0 >= w - 1.0 - 1e-9);
        assert!(first - (w - 1.0) / 2048.0 < cfg.emit_period_s);
        for pair in p.windows(2) {
            assert!((pair[1].time_s - pair[0].time_s - 0.05).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_input_is_rest() {
        let mut rec = recording(2048, 4);
        rec.data_mut().fill(0.0);
        assert!(decode(&rec, 64).iter().all(|p| p.class == Class::Rest));
    }

    #[test]
    fn out_of_order_is_protocol_error() {
        let rec = recording(512, 5);
        let mut frames = plan_frames(&rec, &MarkerList::new(), &ProducerConfig::default()).unwrap();
        frames.swap(2, 3);
        let r = online_emg_decode(&frames, &model(), 4, 2048.0, &DecoderConfig::default());
        assert!(matches!(r, Err(Error::Protocol(_))));
    }

    #[test]
    fn fault_breaks_equivalence() {
        let rec = recording(4096, 6);
        let frames = plan_frames(&rec, &MarkerList::new(), &ProducerConfig::default()).unwrap();
        let mut st = DecoderState::new(model(), 4, 2048.0, DecoderConfig::default()).unwrap();
        st.inject_fault();
        let mut on = Vec::new();
        for f in &frames {
            st.push_frame(f, &mut on).unwrap();
        }
        let off = offline_emg_decode(&wire_precision(&rec), &model(), &DecoderConfig::default()).unwrap();
        assert_ne!(on, off);
    }

    #[test]
    fn csv_round_trip() {
        let p = vec![
            Prediction { time_s: 0.1 + 0.2, class: Class::Left },
            Prediction { time_s: 7.05, class: Class::Rest },
        ];
        let mut buf = Vec::new();
        write_predictions_csv(&p, &mut buf).unwrap();
        assert_eq!(read_predictions_csv(std::str::from_utf8(&buf).unwrap()).unwrap(), p);
    }

    #[test]
    fn sample_and_block_filtering_agree() {
        let rec = recording(1000, 7);
        let mut a = EmgChain::new(4, 2048.0, &EmgChainConfig::default()).unwrap();
        let block = a.filter(rec.data().view()).unwrap();
        let mut b = EmgChain::new(4, 2048.0, &EmgChainConfig::default()).unwrap();
        let mut x = [0.0; 4];
        for j in 0..1000 {
            for c in 0..4 {
                x[c] = rec.data()[[c, j]];
            }
            b.push_sample(&mut x);
            for c in 0..4 {
                assert_eq!(x[c].to_bits(), block[[c, j]].to_bits());
            }
        }
    }
}
