//! Producer side: slicing a recording into frames and pushing them over an
//! ordered byte transport, optionally paced against the wall clock.

use std::io::{Read, Write};
use std::sync::mpsc::{sync_channel, Receiver, SyncSender};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use super::frame::{encode_frame, read_frame, FrameBody, StreamFrame};
use crate::error::{Error, Result};
use crate::signal::{MarkerList, Recording};

pub const DEFAULT_DATA_STREAM: u16 = 1;
pub const DEFAULT_MARKER_STREAM: u16 = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct ProducerConfig {
    pub chunk_samples: usize,
    /// Real-time factor; 0 sends as fast as the transport accepts.
    pub pacing: f64,
    pub data_stream: u16,
    pub marker_stream: u16,
}

impl Default for ProducerConfig {
    fn default() -> Self {
        Self {
            chunk_samples: 32,
            pacing: 0.0,
            data_stream: DEFAULT_DATA_STREAM,
            marker_stream: DEFAULT_MARKER_STREAM,
        }
    }
}

/// Frames covering `recording` exactly once, marker frames merged by
/// timestamp (markers first on ties), terminated by one END frame.
pub fn plan_frames(recording: &Recording, markers: &MarkerList, cfg: &ProducerConfig) -> Result<Vec<StreamFrame>> {
    if cfg.chunk_samples == 0 || cfg.chunk_samples > u16::MAX as usize {
        return Err(Error::InvalidRequest(format!("chunk_samples {}", cfg.chunk_samples)));
    }
    if !(cfg.pacing >= 0.0) {
        return Err(Error::InvalidRequest(format!("pacing {}", cfg.pacing)));
    }
    if cfg.data_stream == cfg.marker_stream {
        return Err(Error::InvalidRequest("data and marker streams need distinct ids".into()));
    }
    let fs = recording.fs();
    let n = recording.n_samples();
    let nc = recording.n_channels();
    let data = recording.data();
    let mut marker_frames = Vec::with_capacity(markers.len());
    let mut last = f64::NEG_INFINITY;
    for m in markers.iter() {
        let ts = recording.t0 + m.time_s;
        if ts <= last {
            return Err(Error::Protocol(format!("marker timestamps not strictly increasing at {ts}")));
        }
        last = ts;
        marker_frames.push(StreamFrame::marker(cfg.marker_stream, ts, m.label.to_string())?);
    }
    let mut out = Vec::with_capacity(n / cfg.chunk_samples + markers.len() + 2);
    let mut mi = marker_frames.into_iter().peekable();
    let mut start = 0;
    while start < n {
        let len = cfg.chunk_samples.min(n - start);
        let ts = recording.t0 + start as f64 / fs;
        while mi.peek().is_some_and(|m| m.timestamp <= ts) {
            out.push(mi.next().expect("peeked"));
        }
        let mut samples = Vec::with_capacity(nc * len);
        for c in 0..nc {
            samples.extend(data.row(c).iter().skip(start).take(len).map(|&v| v as f32));
        }
        out.push(StreamFrame::data(cfg.data_stream, ts, nc, len, samples)?);
        start += len;
    }
    out.extend(mi);
    out.push(StreamFrame::end(cfg.data_stream, recording.t0 + n as f64 / fs));
    Ok(out)
}

/// The recording as it looks after a trip through the wire (f32 samples).
pub fn wire_precision(recording: &Recording) -> Recording {
    let mut r = recording.clone();
    r.data_mut().mapv_inplace(|v| v as f32 as f64);
    r
}

/// Sending half of an in-process bounded pipe.
pub struct ChannelWriter(SyncSender<Vec<u8>>);

/// Receiving half of an in-process bounded pipe.
pub struct ChannelReader {
    rx: Receiver<Vec<u8>>,
    buf: Vec<u8>,
    pos: usize,
}

/// Bounded FIFO byte pipe holding at most `capacity` writes in flight;
/// writers block when it is full.
pub fn pipe(capacity: usize) -> (ChannelWriter, ChannelReader) {
    let (tx, rx) = sync_channel(capacity.max(1));
    (
        ChannelWriter(tx),
        ChannelReader {
            rx,
            buf: Vec::new(),
            pos: 0,
        },
    )
}

impl Write for ChannelWriter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0
            .send(buf.to_vec())
            .map_err(|_| std::io::Error::new(std::io::ErrorKind::BrokenPipe, "receiver dropped"))?;
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

impl Read for ChannelReader {
    fn read(&mut self, out: &mut [u8]) -> std::io::Result<usize> {
        while self.pos == self.buf.len() {
            match self.rx.recv() {
                Ok(b) => {
                    self.buf = b;
                    self.pos = 0;
                }
                Err(_) => return Ok(0),
            }
        }
        let n = out.len().min(self.buf.len() - self.pos);
        out[..n].copy_from_slice(&self.buf[self.pos..self.pos + n]);
        self.pos += n;
        Ok(n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProducerStats {
    pub frames: usize,
    pub bytes: usize,
}

/// Writes every frame in order. With pacing > 0 each DATA frame is held back
/// until `(frame end − stream start) / pacing` of wall time has elapsed.
pub fn stream_producer<W: Write>(frames: &[StreamFrame], fs: f64, pacing: f64, mut sink: W) -> Result<ProducerStats> {
    let t_first = frames.first().map(|f| f.timestamp).unwrap_or(0.0);
    let wall0 = Instant::now();
    let mut bytes = 0;
    for f in frames {
        if pacing > 0.0 {
            if let FrameBody::Data { n_samples, .. } = &f.body {
                let due = (f.timestamp + *n_samples as f64 / fs - t_first) / pacing;
                let elapsed = wall0.elapsed().as_secs_f64();
                if due > elapsed {
                    std::thread::sleep(Duration::from_secs_f64(due - elapsed));
                }
            }
        }
        let enc = encode_frame(f);
        sink.write_all(&enc)
            .map_err(|e| Error::Transport(format!("frame at {}: {e}", f.timestamp)))?;
        bytes += enc.len();
    }
    sink.flush().map_err(|e| Error::Transport(e.to_string()))?;
    Ok(ProducerStats {
        frames: frames.len(),
        bytes,
    })
}

/// Runs [`stream_producer`] on its own thread.
pub fn spawn_producer<W: Write + Send + 'static>(
    frames: Vec<StreamFrame>,
    fs: f64,
    pacing: f64,
    sink: W,
) -> JoinHandle<Result<ProducerStats>> {
    std::thread::spawn(move || stream_producer(&frames, fs, pacing, sink))
}

/// Reads frames until END (inclusive) or end of transport.
pub fn read_all_frames<R: Read>(mut r: R) -> Result<Vec<StreamFrame>> {
    let mut out = Vec::new();
    while let Some(f) = read_frame(&mut r)? {
        let end = matches!(f.body, FrameBody::End);
        out.push(f);
        if end {
            break;
        }
    }
    Ok(out)
}
