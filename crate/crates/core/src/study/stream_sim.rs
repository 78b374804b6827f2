use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::emg::{emg_picks, segment_predictions, summarize_runs, train_emg_decoder, SegmentationSummary};
use super::session::SessionPair;
use super::{calibration_schedule, write_json};
use crate::error::{Error, Result};
use crate::paradigm::{write_runs_jsonl, DrivingRun};
use crate::stream::{
    offline_emg_decode, pipe, plan_frames, read_frame, record_streams, spawn_producer, wire_precision,
    write_predictions_csv, Capture, DecoderState, Prediction, ProducerConfig, StreamInfo, TimedFrame,
};

#[derive(Clone, Debug, PartialEq)]
pub struct StreamSimOptions {
    pub chunk_samples: usize,
    pub pacing: f64,
    pub pipe_capacity: usize,
    /// Perturb the online decoder so the equivalence check must fail.
    pub tamper: bool,
}

impl StreamSimOptions {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            chunk_samples: cfg.stream.chunk_samples,
            pacing: cfg.stream.pacing,
            pipe_capacity: cfg.stream.pipe_capacity,
            tamper: false,
        }
    }
}

/// Deterministic summary; wall-clock figures are kept out of it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StreamSimReport {
    pub chunk_samples: usize,
    pub pacing: f64,
    pub n_frames: usize,
    pub n_bytes: usize,
    pub n_predictions: usize,
    pub n_offline_predictions: usize,
    /// Online stream equals the offline causal reference bit for bit.
    pub equivalent: bool,
    pub first_mismatch: Option<usize>,
    /// Recorder reproduced the sent samples and marker positions.
    pub recorder_round_trip: bool,
    pub n_gaps: usize,
    pub segmentation: SegmentationSummary,
}

#[derive(Clone, Debug)]
pub struct StreamSimOutcome {
    pub report: StreamSimReport,
    pub predictions: Vec<Prediction>,
    pub runs: Vec<DrivingRun>,
    pub wall_s: f64,
}

/// Streams the driving EMG through a producer thread and a bounded pipe into
/// the online decoder, records the streams, and compares the predictions
/// with the offline reference.
pub fn stream_sim(cfg: &ExperimentConfig, sessions: &SessionPair, opts: &StreamSimOptions) -> Result<StreamSimOutcome> {
    let schedule = calibration_schedule(&sessions.calibration)?;
    let emg_cal = train_emg_decoder(&sessions.calibration.recording, &schedule, &cfg.emg, cfg.seed)?;
    let drv = &sessions.driving.recording;
    let emg = wire_precision(&drv.pick(&emg_picks(drv)?)?);
    let pc = ProducerConfig {
        chunk_samples: opts.chunk_samples,
        pacing: opts.pacing,
        data_stream: cfg.emg.decoder.data_stream,
        ..Default::default()
    };
    if pc.marker_stream == pc.data_stream {
        return Err(Error::InvalidRequest("decoder stream id collides with the marker stream".into()));
    }
    let frames = plan_frames(&emg, &sessions.driving.markers, &pc)?;
    let n_frames = frames.len();

    let mut decoder = DecoderState::new(emg_cal.model.clone(), emg.n_channels(), emg.fs(), cfg.emg.decoder.clone())?;
    if opts.tamper {
        decoder.inject_fault();
    }
    let start = Instant::now();
    let (tx, mut rx) = pipe(opts.pipe_capacity);
    let producer = spawn_producer(frames, emg.fs(), opts.pacing, tx);
    let mut online = Vec::new();
    let mut capture = Capture::default();
    let consumed: Result<()> = (|| {
        while let Some(frame) = read_frame(&mut rx)? {
            decoder.push_frame(&frame, &mut online)?;
            capture.frames.push(TimedFrame {
                arrival_s: start.elapsed().as_secs_f64(),
                frame,
            });
        }
        Ok(())
    })();
    drop(rx);
    let stats = producer
        .join()
        .map_err(|_| Error::Transport("producer thread panicked".into()))?;
    consumed?;
    let stats = stats?;
    let wall_s = start.elapsed().as_secs_f64();

    let info = StreamInfo {
        stream_id: pc.data_stream,
        fs: emg.fs(),
        channels: emg.channels().to_vec(),
    };
    let recorded = record_streams(&[capture], &[info])?;
    let rec_ok = recorded
        .recordings
        .get(&pc.data_stream)
        .is_some_and(|r| r.data() == emg.data())
        && recorded.markers.len() == sessions.driving.markers.len()
        && recorded
            .markers
            .iter()
            .zip(sessions.driving.markers.iter())
            .all(|(a, b)| a.label == b.label && ((a.time_s - b.time_s) * emg.fs()).abs() <= 1.0);

    let offline = offline_emg_decode(&emg, &emg_cal.model, &cfg.emg.decoder)?;
    let first_mismatch = online
        .iter()
        .zip(&offline)
        .position(|(a, b)| a != b)
        .or_else(|| (online.len() != offline.len()).then(|| online.len().min(offline.len())));
    let runs = segment_predictions(&online, emg.t0)?;
    let report = StreamSimReport {
        chunk_samples: opts.chunk_samples,
        pacing: opts.pacing,
        n_frames,
        n_bytes: stats.bytes,
        n_predictions: online.len(),
        n_offline_predictions: offline.len(),
        equivalent: first_mismatch.is_none(),
        first_mismatch,
        recorder_round_trip: rec_ok,
        n_gaps: recorded.gaps.len(),
        segmentation: summarize_runs(&online, &runs),
    };
    Ok(StreamSimOutcome {
        report,
        predictions: online,
        runs,
        wall_s,
    })
}

/// `stream_predictions.csv`, `stream_runs.jsonl`, `stream_report.json`.
pub fn write_stream_outputs(o: &StreamSimOutcome, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Format(format!("cannot create {}: {e}", dir.display())))?;
    let p1 = dir.join("stream_predictions.csv");
    let mut buf = Vec::new();
    write_predictions_csv(&o.predictions, &mut buf)?;
    std::fs::write(&p1, buf).map_err(|e| Error::Format(format!("cannot write {}: {e}", p1.display())))?;
    let p2 = dir.join("stream_runs.jsonl");
    let mut buf = Vec::new();
    write_runs_jsonl(&o.runs, &mut buf)?;
    std::fs::write(&p2, buf).map_err(|e| Error::Format(format!("cannot write {}: {e}", p2.display())))?;
    let p3 = dir.join("stream_report.json");
    write_json(&o.report, &p3)?;
    Ok(vec![p1, p2, p3])
}
