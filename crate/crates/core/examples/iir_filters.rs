//! Causal Butterworth band-pass and notch designs: magnitude response and a
//! quick check on a mixed tone signal.
//!
//! cargo run --example iir_filters

use std::f64::consts::PI;

use mockbci::signal::{design_butterworth_bandpass, design_notch};

fn main() -> mockbci::Result<()> {
    let fs = 2048.0;
    let emg = design_butterworth_bandpass(4, 30.0, 500.0, fs)?;
    let mrcp = design_butterworth_bandpass(8, 0.1, 3.0, fs)?;
    let notch = design_notch(50.0, 30.0, fs)?;

    println!("{:>8} {:>12} {:>12} {:>12}", "Hz", "30-500 dB", "0.1-3 dB", "notch dB");
    for f in [0.05, 0.1, 0.5, 1.0, 3.0, 10.0, 30.0, 50.0, 120.0, 500.0, 900.0] {
        println!(
            "{f:>8.2} {:>12.2} {:>12.2} {:>12.2}",
            emg.magnitude_db(f),
            mrcp.magnitude_db(f),
            notch.magnitude_db(f)
        );
    }

    // 50 Hz mains plus a 120 Hz component, one second.
    let mut x: Vec<f64> = (0..2048)
        .map(|i| {
            let t = i as f64 / fs;
            (2.0 * PI * 50.0 * t).sin() + 0.5 * (2.0 * PI * 120.0 * t).sin()
        })
        .collect();
    let mut notch = notch;
    notch.process(0, &mut x);
    let tail = &x[1024..];
    let rms = (tail.iter().map(|v| v * v).sum::<f64>() / tail.len() as f64).sqrt();
    println!("after notch: rms {rms:.3} (a lone 0.5-amplitude sine has {:.3})", 0.5 / 2f64.sqrt());
    Ok(())
}
