//! Trains the four-feature EMG LDA on the calibration session, decodes the
//! driving session causally, and cuts the prediction stream into runs of at
//! least 3.75 s.
//!
//! cargo run --example emg_decoder -- [seed]

use mockbci::study::emg::{decode_session_emg, segment_predictions, summarize_runs, train_emg_decoder};
use mockbci::study::{calibration_schedule, generate_sessions, ExperimentConfig};

fn main() -> mockbci::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let cfg = ExperimentConfig { seed, ..Default::default() };
    let pair = generate_sessions(&cfg)?;
    let schedule = calibration_schedule(&pair.calibration)?;
    let emg = train_emg_decoder(&pair.calibration.recording, &schedule, &cfg.emg, seed)?;
    println!("{}-fold CV accuracy {:.3}", cfg.emg.cv_folds, emg.cv.report.accuracy);
    println!("confusion (rows LEFT, RIGHT, REST): {:?}", emg.cv.report.confusion);

    let preds = decode_session_emg(&pair.driving.recording, &emg.model, &cfg.emg)?;
    let runs = segment_predictions(&preds, pair.driving.recording.t0)?;
    let summary = summarize_runs(&preds, &runs);
    println!("{} predictions at {} Hz", preds.len(), 1.0 / cfg.emg.decoder.emit_period_s);
    println!("runs of at least 3.75 s: {:?}", summary.runs_per_class);
    for r in runs.iter().take(6) {
        println!("  {:>5} at {:7.2} s for {:.2} s", r.class.name(), r.onset_s, r.duration_s);
    }
    Ok(())
}
