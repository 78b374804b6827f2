//! Generates one synthetic subject and runs the whole offline study in memory.
//!
//! cargo run --release --example full_study -- [seed]

use std::time::Instant;

use mockbci::study::{generate_sessions, run_study, ExperimentConfig};

fn main() -> mockbci::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let cfg = ExperimentConfig { seed, ..Default::default() };
    let t = Instant::now();
    let sessions = generate_sessions(&cfg)?;
    eprintln!("generated in {:.1} s", t.elapsed().as_secs_f64());
    let t = Instant::now();
    let out = run_study(&cfg, &sessions)?;
    eprintln!("analyzed in {:.1} s", t.elapsed().as_secs_f64());
    let r = &out.report;
    println!("EMG 10-fold accuracy     {:.3}", r.emg.cv_accuracy);
    println!("driving runs             {:?}", r.segmentation.runs_per_class);
    println!("ICA rejected             {:?}", r.ica.rejected);
    println!("calibration macro-F1     {:.3}", r.calibration.macro_f1);
    println!("driving macro-F1         {:.3}", r.driving.macro_f1);
    println!("transfer macro-F1        {:.3} (θ = {:.2})", r.transfer.macro_f1, r.transfer.threshold.theta);
    println!("transfer confusion       {:?}", r.transfer.confusion);
    if let Some(t) = &sessions.calibration.truth { println!("injected {:?}", t.cnv_injected_uv); }
    println!("MRCP negativity (µV)     calibration {:?} driving {:?}", r.mrcp.calibration.negativity_uv, r.mrcp.driving.negativity_uv);
    Ok(())
}
