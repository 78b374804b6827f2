//! Multi-stream recorder: per-capture clock offset estimation, gap filling,
//! marker placement on a shared axis.

use std::collections::BTreeMap;
use std::io::Read;
use std::time::Instant;

use ndarray::Array2;
use serde::Serialize;

use super::frame::{read_frame, FrameBody, StreamFrame};
use crate::error::{Error, Result};
use crate::signal::{ChannelInfo, MarkerLabel, MarkerList, Recording};

/// A frame together with the receiver's local clock at arrival.
#[derive(Clone, Debug, PartialEq)]
pub struct TimedFrame {
    pub arrival_s: f64,
    pub frame: StreamFrame,
}

/// What the recorder must be told about a data stream, since the wire
/// carries no metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamInfo {
    pub stream_id: u16,
    pub fs: f64,
    pub channels: Vec<ChannelInfo>,
}

/// Frames received over one transport. All streams in a capture share the
/// sender's clock.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Capture {
    pub frames: Vec<TimedFrame>,
}

impl Capture {
    /// Reads frames until every stream seen has sent END or the transport
    /// closes, stamping each with `clock()`.
    pub fn read_from<R: Read>(mut r: R, mut clock: impl FnMut() -> f64) -> Result<Self> {
        let mut frames = Vec::new();
        let mut open: BTreeMap<u16, bool> = BTreeMap::new();
        while let Some(frame) = read_frame(&mut r)? {
            let arrival_s = clock();
            let ended = matches!(frame.body, FrameBody::End);
            let e = open.entry(frame.stream_id).or_insert(true);
            if ended {
                *e = false;
            }
            frames.push(TimedFrame { arrival_s, frame });
            if ended && open.values().all(|o| !o) {
                break;
            }
        }
        Ok(Self { frames })
    }

    /// [`read_from`](Self::read_from) stamped with the wall clock since `start`.
    pub fn read_wallclock<R: Read>(r: R, start: Instant) -> Result<Self> {
        Self::read_from(r, || start.elapsed().as_secs_f64())
    }

    /// Stamps each frame as if it arrived the moment its last sample was due,
    /// on a clock `offset_s` behind the sender's. Deterministic stand-in for
    /// a paced link.
    pub fn ideal(frames: Vec<StreamFrame>, fs_of: impl Fn(u16) -> f64, offset_s: f64) -> Self {
        let frames = frames
            .into_iter()
            .map(|frame| TimedFrame {
                arrival_s: anchor_time(&frame, fs_of(frame.stream_id)) - offset_s,
                frame,
            })
            .collect();
        Self { frames }
    }
}

/// Time the frame could first have been sent: last sample for DATA.
fn anchor_time(frame: &StreamFrame, fs: f64) -> f64 {
    match &frame.body {
        FrameBody::Data { n_samples, .. } if fs > 0.0 => frame.timestamp + (*n_samples as f64 - 1.0) / fs,
        _ => frame.timestamp,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gap {
    pub stream_id: u16,
    /// Seconds on the shared axis.
    pub start_s: f64,
    pub n_samples: usize,
}

#[derive(Clone, Debug)]
pub struct RecordedSession {
    /// One per data stream, keyed by stream id; `t0` is on the shared axis.
    pub recordings: BTreeMap<u16, Recording>,
    pub markers: MarkerList,
    /// Estimated sender clock minus reference clock, one per capture.
    pub offsets: Vec<f64>,
    pub gaps: Vec<Gap>,
    /// Reference-clock timestamp of the shared axis zero.
    pub origin_s: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median over a capture's frames of (anchor − arrival) minus the same
/// quantity for the reference frame nearest in arrival.
fn estimate_offset(cap: &[(f64, f64)], reference: &[(f64, f64)]) -> f64 {
    if cap.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let diffs = cap
        .iter()
        .map(|&(anchor, arr)| {
            let i = reference.partition_point(|r| r.1 < arr);
            let cand = [i.checked_sub(1), (i < reference.len()).then_some(i)];
            let j = cand
                .into_iter()
                .flatten()
                .min_by(|&a, &b| (reference[a].1 - arr).abs().total_cmp(&(reference[b].1 - arr).abs()))
                .expect("non-empty reference");
            (anchor - arr) - (reference[j].0 - reference[j].1)
        })
        .collect();
    median(diffs)
}

/// Aligns several captures onto the clock of the one holding the lowest data
/// stream id. Streams without a [`StreamInfo`] are treated as marker streams.
pub fn record_streams(captures: &[Capture], infos: &[StreamInfo]) -> Result<RecordedSession> {
    if captures.iter().all(|c| c.frames.is_empty()) {
        return Err(Error::Validation("no streams to record".into()));
    }
    let info: BTreeMap<u16, &StreamInfo> = infos.iter().map(|i| (i.stream_id, i)).collect();
    let fs_of = |id: u16| info.get(&id).map(|i| i.fs).unwrap_or(0.0);

    let ref_cap = captures
        .iter()
        .enumerate()
        .filter_map(|(ci, c)| {
            c.frames
                .iter()
                .filter(|f| matches!(f.frame.body, FrameBody::Data { .. }) && info.contains_key(&f.frame.stream_id))
                .map(|f| f.frame.stream_id)
                .min()
                .map(|id| (id, ci))
        })
        .min()
        .map(|(_, ci)| ci)
        .unwrap_or(0);

    let pairs = |c: &Capture| -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = c
            .frames
            .iter()
            .filter(|f| !matches!(f.frame.body, FrameBody::End))
            .map(|f| (anchor_time(&f.frame, fs_of(f.frame.stream_id)), f.arrival_s))
            .collect();
        v.sort_by(|a, b| a.1.total_cmp(&b.1));
        v
    };
    let ref_pairs = pairs(&captures[ref_cap]);
    let offsets: Vec<f64> = captures
        .iter()
        .enumerate()
        .map(|(ci, c)| if ci == ref_cap { 0.0 } else { estimate_offset(&pairs(c), &ref_pairs) })
        .collect();

    // Corrected frames, merged by (timestamp, stream id).
    let mut all: Vec<(f64, u16, &StreamFrame)> = Vec::new();
    for (c, off) in captures.iter().zip(&offsets) {
        let mut last: BTreeMap<u16, f64> = BTreeMap::new();
        for f in &c.frames {
            let prev = last.insert(f.frame.stream_id, f.frame.timestamp);
            if prev.is_some_and(|p| f.frame.timestamp <= p) {
                return Err(Error::Protocol(format!(
                    "stream {} timestamps not increasing at {}",
                    f.frame.stream_id, f.frame.timestamp
                )));
            }
            if !matches!(f.frame.body, FrameBody::End) {
                all.push((f.frame.timestamp - off, f.frame.stream_id, &f.frame));
            }
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let origin_s = all
        .iter()
        .filter(|(_, id, f)| matches!(f.body, FrameBody::Data { .. }) && info.contains_key(id))
        .map(|(t, ..)| *t)
        .fold(f64::INFINITY, f64::min);
    let origin_s = if origin_s.is_finite() { origin_s } else { all.first().map(|a| a.0).unwrap_or(0.0) };

    struct Acc {
        t0: f64,
        cols: Vec<Vec<f64>>,
    }
    let mut acc: BTreeMap<u16, Acc> = BTreeMap::new();
    let mut gaps = Vec::new();
    let mut markers: Vec<(f64, MarkerLabel)> = Vec::new();
    for (t, id, f) in &all {
        match &f.body {
            FrameBody::Data {
                n_channels,
                n_samples,
                samples,
            } => {
                let Some(si) = info.get(id) else {
                    return Err(Error::Validation(format!("no stream info for data stream {id}")));
                };
                let nc = *n_channels as usize;
                if nc != si.channels.len() {
                    return Err(Error::Layout(format!(
                        "stream {id} sends {nc} channels, {} declared",
                        si.channels.len()
                    )));
                }
                let a = acc.entry(*id).or_insert_with(|| Acc {
                    t0: t - origin_s,
                    cols: vec![Vec::new(); nc],
                });
                let have = a.cols[0].len();
                let start = ((t - origin_s - a.t0) * si.fs).round();
                if start < have as f64 {
                    return Err(Error::Protocol(format!("stream {id} overlaps itself at {t}")));
                }
                let start = start as usize;
                if start > have {
                    gaps.push(Gap {
                        stream_id: *id,
                        start_s: a.t0 + have as f64 / si.fs,
                        n_samples: start - have,
                    });
                    for col in &mut a.cols {
                        col.resize(start, 0.0);
                    }
                }
                let ns = *n_samples as usize;
                for (c, col) in a.cols.iter_mut().enumerate() {
                    col.extend(samples[c * ns..(c + 1) * ns].iter().map(|&v| v as f64));
                }
            }
            FrameBody::Marker(label) => markers.push((t - origin_s, MarkerLabel::from(label.as_str()))),
            FrameBody::End => {}
        }
    }

    let mut recordings = BTreeMap::new();
    for (id, a) in acc {
        let si = info[&id];
        let n = a.cols[0].len();
        let data = Array2::from_shape_fn((a.cols.len(), n), |(c, j)| a.cols[c][j]);
        recordings.insert(id, Recording::new(data, si.fs, si.channels.clone())?.with_t0(a.t0));
    }
    let mut ml = MarkerList::new();
    for (t, l) in markers {
        ml.push(t, l)?;
    }
    Ok(RecordedSession {
        recordings,
        markers: ml,
        offsets,
        gaps,
        origin_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{ChannelKind, Class};
    use crate::stream::transport::{plan_frames, ProducerConfig};

    const FS: f64 = 512.0;

    fn rec(n: usize, t0: f64) -> Recording {
        let data = Array2::from_shape_fn((2, n), |(c, i)| ((c + 1) * i) as f64 * 0.25);
        Recording::new(
            data,
            FS,
            vec![ChannelInfo::new("x", ChannelKind::Eeg), ChannelInfo::new("y", ChannelKind::Eeg)],
        )
        .unwrap()
        .with_t0(t0)
    }

    fn info(id: u16) -> StreamInfo {
        StreamInfo {
            stream_id: id,
            fs: FS,
            channels: rec(1, 0.0).channels().to_vec(),
        }
    }

    fn frames(r: &Recording, m: &MarkerList, id: u16, mid: u16, chunk: usize) -> Vec<StreamFrame> {
        let cfg = ProducerConfig {
            chunk_samples: chunk,
            data_stream: id,
            marker_stream: mid,
            ..Default::default()
        };
        plan_frames(r, m, &cfg).unwrap()
    }

    #[test]
    fn identical_clocks_zero_offset() {
        let a = Capture::ideal(frames(&rec(2000, 100.0), &MarkerList::new(), 1, 9, 32), |_| FS, 0.0);
        let b = Capture::ideal(frames(&rec(2000, 100.0), &MarkerList::new(), 3, 8, 20), |_| FS, 0.0);
        let s = record_streams(&[a, b], &[info(1), info(3)]).unwrap();
        assert_eq!(s.offsets, vec![0.0, 0.0]);
        assert!(s.gaps.is_empty());
        assert_eq!(s.recordings[&1].data(), s.recordings[&3].data());
    }

    #[test]
    fn shifted_clock_is_estimated_and_removed() {
        let a = Capture::ideal(frames(&rec(4000, 50.0), &MarkerList::new(), 1, 9, 32), |_| FS, 0.0);
        // Same acquisition, sender clock running 0.5 s ahead.
        let b = Capture::ideal(frames(&rec(4000, 50.5), &MarkerList::new(), 2, 8, 17), |_| FS, 0.5);
        let s = record_streams(&[b, a], &[info(1), info(2)]).unwrap();
        assert!((s.offsets[0] - 0.5).abs() <= 1.0 / FS);
        assert_eq!(s.offsets[1], 0.0);
        assert!((s.recordings[&2].t0 - s.recordings[&1].t0).abs() <= 1.0 / FS);
    }

    #[test]
    fn markers_return_to_their_samples() {
        let r = rec(5000, 3.0);
        let mut m = MarkerList::new();
        for (i, t) in [0.37, 2.0, 5.123, 9.0].iter().enumerate() {
            m.push(*t, if i % 2 == 0 { Class::Left } else { Class::Rest }).unwrap();
        }
        let cap = Capture::ideal(frames(&r, &m, 1, 2, 64), |id| if id == 1 { FS } else { 0.0 }, 0.0);
        let s = record_streams(&[cap], &[info(1)]).unwrap();
        assert_eq!(s.markers.len(), 4);
        for (a, b) in s.markers.iter().zip(m.iter()) {
            assert!(((a.time_s - b.time_s) * FS).abs() <= 1.0);
            assert_eq!(a.label, b.label);
        }
        assert_eq!(s.recordings[&1].data(), r.data());
    }

    #[test]
    fn dropped_frame_is_a_gap() {
        let r = rec(1000, 0.0);
        let mut f = frames(&r, &MarkerList::new(), 1, 2, 100);
        f.remove(4);
        let s = record_streams(&[Capture::ideal(f, |_| FS, 0.0)], &[info(1)]).unwrap();
        assert_eq!(s.gaps, vec![Gap { stream_id: 1, start_s: 400.0 / FS, n_samples: 100 }]);
        assert_eq!(s.recordings[&1].n_samples(), 1000);
        assert!(s.recordings[&1].data().column(450).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_is_validation_error() {
        assert!(matches!(record_streams(&[], &[]), Err(Error::Validation(_))));
    }

    #[test]
    fn reads_from_transport() {
        let r = rec(600, 0.0);
        let f = frames(&r, &MarkerList::new(), 1, 2, 64);
        let mut bytes = Vec::new();
        for fr in &f {
            bytes.extend(crate::stream::frame::encode_frame(fr));
        }
        let mut t = 0.0;
        let cap = Capture::read_from(bytes.as_slice(), || {
            t += 1.0;
            t
        })
        .unwrap();
        assert_eq!(cap.frames.len(), f.len());
    }
}
