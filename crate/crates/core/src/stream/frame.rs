//! `BSTR` wire format. Header (little-endian, 20 bytes):
//! magic[4] · version u8 · stream_id u16 · kind u8 · n_channels u16 ·
//! n_samples u16 · timestamp f64. DATA payloads are f32 channel-major;
//! MARKER payloads are UTF-8 labels with `n_samples` = byte length.

use std::io::Read;

use crate::error::{Error, Result};

pub const FRAME_MAGIC: &[u8; 4] = b"BSTR";
pub const FRAME_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum FrameKind {
    Data = 0,
    Marker = 1,
    End = 2,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FrameBody {
    /// `samples[c * n_samples + i]`.
    Data { n_channels: u16, n_samples: u16, samples: Vec<f32> },
    Marker(String),
    End,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StreamFrame {
    pub stream_id: u16,
    /// Seconds; the first sample's time for DATA frames.
    pub timestamp: f64,
    pub body: FrameBody,
}

impl StreamFrame {
    pub fn data(stream_id: u16, timestamp: f64, n_channels: usize, n_samples: usize, samples: Vec<f32>) -> Result<Self> {
        if n_channels > u16::MAX as usize || n_samples > u16::MAX as usize {
            return Err(Error::Protocol(format!("{n_channels}×{n_samples} frame exceeds u16 fields")));
        }
        if samples.len() != n_channels * n_samples {
            return Err(Error::Protocol(format!(
                "{} samples for {n_channels}×{n_samples}",
                samples.len()
            )));
        }
        Ok(Self {
            stream_id,
            timestamp,
            body: FrameBody::Data {
                n_channels: n_channels as u16,
                n_samples: n_samples as u16,
                samples,
            },
        })
    }

    pub fn marker(stream_id: u16, timestamp: f64, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if label.len() > u16::MAX as usize {
            return Err(Error::Protocol("marker label longer than 65535 bytes".into()));
        }
        Ok(Self {
            stream_id,
            timestamp,
            body: FrameBody::Marker(label),
        })
    }

    pub fn end(stream_id: u16, timestamp: f64) -> Self {
        Self {
            stream_id,
            timestamp,
            body: FrameBody::End,
        }
    }

    pub fn kind(&self) -> FrameKind {
        match self.body {
            FrameBody::Data { .. } => FrameKind::Data,
            FrameBody::Marker(_) => FrameKind::Marker,
            FrameBody::End => FrameKind::End,
        }
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN
            + match &self.body {
                FrameBody::Data { samples, .. } => samples.len() * 4,
                FrameBody::Marker(s) => s.len(),
                FrameBody::End => 0,
            }
    }
}

pub fn encode_frame(frame: &StreamFrame) -> Vec<u8> {
    let mut out = Vec::with_capacity(frame.encoded_len());
    out.extend_from_slice(FRAME_MAGIC);
    out.push(FRAME_VERSION);
    out.extend_from_slice(&frame.stream_id.to_le_bytes());
    out.push(frame.kind() as u8);
    let (nc, ns) = match &frame.body {
        FrameBody::Data {
            n_channels, n_samples, ..
        } => (*n_channels, *n_samples),
        FrameBody::Marker(s) => (0, s.len() as u16),
        FrameBody::End => (0, 0),
    };
    out.extend_from_slice(&nc.to_le_bytes());
    out.extend_from_slice(&ns.to_le_bytes());
    out.extend_from_slice(&frame.timestamp.to_le_bytes());
    match &frame.body {
        FrameBody::Data { samples, .. } => {
            for v in samples {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        FrameBody::Marker(s) => out.extend_from_slice(s.as_bytes()),
        FrameBody::End => {}
    }
    out
}

struct Header {
    stream_id: u16,
    kind: u8,
    n_channels: u16,
    n_samples: u16,
    timestamp: f64,
}

fn parse_header(h: &[u8]) -> Result<(Header, usize)> {
    if &h[..4] != FRAME_MAGIC {
        return Err(Error::Decode(format!("bad magic {:02x?}", &h[..4])));
    }
    if h[4] != FRAME_VERSION {
        return Err(Error::Decode(format!("unsupported version {}", h[4])));
    }
    let header = Header {
        stream_id: u16::from_le_bytes([h[5], h[6]]),
        kind: h[7],
        n_channels: u16::from_le_bytes([h[8], h[9]]),
        n_samples: u16::from_le_bytes([h[10], h[11]]),
        timestamp: f64::from_le_bytes(h[12..20].try_into().expect("8 bytes")),
    };
    let payload = match header.kind {
        0 => header.n_channels as usize * header.n_samples as usize * 4,
        1 => {
            if header.n_channels != 0 {
                return Err(Error::Decode("marker frame with channels".into()));
            }
            header.n_samples as usize
        }
        2 => {
            if header.n_channels != 0 || header.n_samples != 0 {
                return Err(Error::Decode("end frame with a payload".into()));
            }
            0
        }
        k => return Err(Error::Decode(format!("unknown frame kind {k}"))),
    };
    Ok((header, payload))
}

fn build(h: Header, payload: &[u8]) -> Result<StreamFrame> {
    let body = match h.kind {
        0 => FrameBody::Data {
            n_channels: h.n_channels,
            n_samples: h.n_samples,
            samples: payload
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")))
                .collect(),
        },
        1 => FrameBody::Marker(
            String::from_utf8(payload.to_vec()).map_err(|e| Error::Decode(format!("marker label: {e}")))?,
        ),
        _ => FrameBody::End,
    };
    Ok(StreamFrame {
        stream_id: h.stream_id,
        timestamp: h.timestamp,
        body,
    })
}

/// Decodes one frame from the front of `bytes`, returning it and the number
/// of bytes consumed.
pub fn decode_frame(bytes: &[u8]) -> Result<(StreamFrame, usize)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Decode(format!("{} bytes, header needs {HEADER_LEN}", bytes.len())));
    }
    let (h, payload) = parse_header(&bytes[..HEADER_LEN])?;
    let total = HEADER_LEN + payload;
    if bytes.len() < total {
        return Err(Error::Decode(format!("truncated payload: {} of {payload} bytes", bytes.len() - HEADER_LEN)));
    }
    Ok((build(h, &bytes[HEADER_LEN..total])?, total))
}

/// Reads one frame; `Ok(None)` on a clean end of stream before any header byte.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<StreamFrame>> {
    let mut head = [0u8; HEADER_LEN];
    let mut got = 0;
    while got < HEADER_LEN {
        let n = r.read(&mut head[got..])?;
        if n == 0 {
            if got == 0 {
                return Ok(None);
            }
            return Err(Error::Decode("stream ended inside a frame header".into()));
        }
        got += n;
    }
    let (h, payload) = parse_header(&head)?;
    // Grow with the bytes actually received rather than trusting the header.
    let mut buf = Vec::with_capacity(payload.min(1 << 16));
    r.take(payload as u64).read_to_end(&mut buf)?;
    if buf.len() != payload {
        return Err(Error::Decode("stream ended inside a frame payload".into()));
    }
    Ok(Some(build(h, &buf)?))
}
