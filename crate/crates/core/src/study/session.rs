use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::signal::mbr::{read_mbr, write_mbr};
use crate::signal::{MarkerList, Recording};
use crate::stream::wire_precision;
use crate::synth::{default_track_sequence, generate_calibration_session, generate_driving_session, GroundTruth};

#[derive(Clone, Debug)]
pub struct Session {
    pub recording: Recording,
    pub markers: MarkerList,
    pub truth: Option<GroundTruth>,
}

#[derive(Clone, Debug)]
pub struct SessionPair {
    pub calibration: Session,
    pub driving: Session,
}

/// Both sessions for `cfg.seed`, sample values rounded to the f32 storage
/// precision so in-memory and on-disk analyses agree exactly.
pub fn generate_sessions(cfg: &ExperimentConfig) -> Result<SessionPair> {
    let (rec, markers, truth) = generate_calibration_session(&cfg.synth, cfg.seed)?;
    let calibration = Session {
        recording: wire_precision(&rec),
        markers,
        truth: Some(truth),
    };
    let track = default_track_sequence(cfg.laps, cfg.seed);
    let (rec, markers, truth) = generate_driving_session(&cfg.synth, cfg.seed, &track)?;
    let driving = Session {
        recording: wire_precision(&rec),
        markers,
        truth: Some(truth),
    };
    Ok(SessionPair { calibration, driving })
}

pub const SESSION_NAMES: [&str; 2] = ["calibration", "driving"];

pub fn recording_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.mbr"))
}

pub fn markers_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.markers.jsonl"))
}

pub fn truth_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.truth.json"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))
}

/// Writes recordings, markers and (when present) ground truth; returns the
/// paths written.
pub fn write_sessions(pair: &SessionPair, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Format(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, s) in SESSION_NAMES.iter().zip([&pair.calibration, &pair.driving]) {
        let p = recording_path(dir, name);
        let mut w = create(&p)?;
        write_mbr(&s.recording, &mut w)?;
        w.flush()?;
        written.push(p);
        let p = markers_path(dir, name);
        let mut w = create(&p)?;
        s.markers.write_jsonl(&mut w)?;
        w.flush()?;
        written.push(p);
        if let Some(t) = &s.truth {
            let p = truth_path(dir, name);
            let mut w = create(&p)?;
            t.write_json(&mut w)?;
            w.flush()?;
            written.push(p);
        }
    }
    Ok(written)
}

fn read_session(dir: &Path, name: &str) -> Result<Session> {
    let recording = read_mbr(open(&recording_path(dir, name))?)?;
    let markers = MarkerList::read_jsonl(open(&markers_path(dir, name))?)?;
    let tp = truth_path(dir, name);
    let truth = if tp.exists() {
        Some(serde_json::from_reader(open(&tp)?)?)
    } else {
        None
    };
    Ok(Session {
        recording,
        markers,
        truth,
    })
}

pub fn read_sessions(dir: &Path) -> Result<SessionPair> {
    Ok(SessionPair {
        calibration: read_session(dir, SESSION_NAMES[0])?,
        driving: read_session(dir, SESSION_NAMES[1])?,
    })
}
