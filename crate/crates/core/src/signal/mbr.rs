//! MBR1 recording container.
//!
//! Layout (all little-endian):
//!
//! ```text
//! "MBR1" | version u16 | fs f64 | n_channels u16
//! per channel: label_len u16 | label UTF-8 | kind u8 (0 EEG, 1 EMG, 2 EOG)
//!              | has_position u8 | [x f64, y f64 if has_position == 1]
//! samples: f32, channel-major (all of channel 0, then channel 1, ...)
//! ```
//!
//! The sample count is implied by the remaining payload length. `t0` is not
//! stored; files read back with `t0 = 0`.

use std::io::{Read, Write};

use ndarray::Array2;

use super::recording::{ChannelInfo, ChannelKind, Recording};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MBR1";
pub const VERSION: u16 = 1;

fn kind_code(kind: ChannelKind) -> u8 {
    match kind {
        ChannelKind::Eeg => 0,
        ChannelKind::Emg => 1,
        ChannelKind::Eog => 2,
    }
}

pub fn write_mbr<W: Write>(recording: &Recording, mut w: W) -> Result<()> {
    let n_ch = u16::try_from(recording.n_channels())
        .map_err(|_| Error::Format("recording: more than 65535 channels".into()))?;
    let mut buf = Vec::with_capacity(64 + recording.data().len() * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&recording.fs().to_le_bytes());
    buf.extend_from_slice(&n_ch.to_le_bytes());
    for ch in recording.channels() {
        let label = ch.label.as_bytes();
        let len = u16::try_from(label.len()).map_err(|_| Error::Format("recording: channel label too long".into()))?;
        buf.extend_from_slice(&len.to_le_bytes());
        buf.extend_from_slice(label);
        buf.push(kind_code(ch.kind));
        match ch.position {
            Some([x, y]) => {
                buf.push(1);
                buf.extend_from_slice(&x.to_le_bytes());
                buf.extend_from_slice(&y.to_le_bytes());
            }
            None => buf.push(0),
        }
    }
    for row in recording.data().rows() {
        for &v in row {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format(format!("recording: truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn read_mbr<R: Read>(mut r: R) -> Result<Recording> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode_mbr(&bytes)
}

pub fn decode_mbr(bytes: &[u8]) -> Result<Recording> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4)? != MAGIC {
        return Err(Error::Format("recording: bad magic".into()));
    }
    let version = c.u16()?;
    if version != VERSION {
        return Err(Error::Format(format!("recording: unsupported version {version}")));
    }
    let fs = c.f64()?;
    let n_ch = c.u16()? as usize;
    let mut channels = Vec::with_capacity(n_ch);
    for _ in 0..n_ch {
        let len = c.u16()? as usize;
        let label = std::str::from_utf8(c.take(len)?)
            .map_err(|_| Error::Format("recording: channel label is not UTF-8".into()))?
            .to_string();
        let kind = match c.u8()? {
            0 => ChannelKind::Eeg,
            1 => ChannelKind::Emg,
            2 => ChannelKind::Eog,
            k => return Err(Error::Format(format!("recording: unknown channel kind {k}"))),
        };
        let position = match c.u8()? {
            0 => None,
            1 => Some([c.f64()?, c.f64()?]),
            f => return Err(Error::Format(format!("recording: bad position flag {f}"))),
        };
        channels.push(ChannelInfo { label, kind, position });
    }
    let rest = &bytes[c.pos..];
    if n_ch == 0 {
        if !rest.is_empty() {
            return Err(Error::Format("recording: samples present with zero channels".into()));
        }
        return Recording::new(Array2::zeros((0, 0)), fs, channels);
    }
    if rest.len() % (4 * n_ch) != 0 {
        return Err(Error::Format(format!(
            "{} payload bytes is not a whole number of {n_ch}-channel f32 frames",
            rest.len()
        )));
    }
    let n = rest.len() / (4 * n_ch);
    let samples: Vec<f64> = rest
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    let data = Array2::from_shape_vec((n_ch, n), samples).map_err(|e| Error::Format(e.to_string()))?;
    Recording::new(data, fs, channels)
}
