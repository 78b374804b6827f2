//! The mock BCI loop: a producer thread streams the driving EMG in framed
//! chunks over a bounded pipe, the online decoder emits a class every 50 ms,
//! and the stream is checked against the offline causal reference.
//!
//! cargo run --example online_decoder -- [chunk-samples]

use mockbci::stream::{
    offline_emg_decode, pipe, plan_frames, read_frame, spawn_producer, wire_precision, DecoderState, ProducerConfig,
};
use mockbci::study::emg::{emg_picks, train_emg_decoder};
use mockbci::study::{calibration_schedule, generate_sessions, ExperimentConfig};

fn main() -> mockbci::Result<()> {
    let chunk = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let cfg = ExperimentConfig::default();
    let pair = generate_sessions(&cfg)?;
    let schedule = calibration_schedule(&pair.calibration)?;
    let model = train_emg_decoder(&pair.calibration.recording, &schedule, &cfg.emg, cfg.seed)?.model;

    let drv = &pair.driving.recording;
    let emg = wire_precision(&drv.pick(&emg_picks(drv)?)?);
    let pc = ProducerConfig {
        chunk_samples: chunk,
        ..Default::default()
    };
    let frames = plan_frames(&emg, &pair.driving.markers, &pc)?;
    println!("{} frames of up to {chunk} samples", frames.len());

    let (tx, mut rx) = pipe(64);
    let producer = spawn_producer(frames, emg.fs(), 0.0, tx);
    let mut decoder = DecoderState::new(model.clone(), emg.n_channels(), emg.fs(), cfg.emg.decoder.clone())?;
    let mut online = Vec::new();
    while let Some(frame) = read_frame(&mut rx)? {
        decoder.push_frame(&frame, &mut online)?;
    }
    let stats = producer.join().expect("producer thread")?;
    println!("{} bytes streamed, {} predictions", stats.bytes, online.len());

    let offline = offline_emg_decode(&emg, &model, &cfg.emg.decoder)?;
    println!("bit-identical to offline: {}", online == offline);
    for p in online.iter().step_by(400).take(8) {
        println!("  {:8.2} s  {}", p.time_s, p.class.name());
    }
    Ok(())
}
