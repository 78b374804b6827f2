//! Zero-phase windowed-sinc band-pass, 1-35 Hz with 1 Hz / 8.75 Hz
//! transitions and a 3.3 s kernel.
//!
//! cargo run --example fir_bandpass

use std::f64::consts::PI;

use mockbci::signal::{apply_fir_zero_phase, design_fir_bandpass, ChannelInfo, ChannelKind, Recording};
use ndarray::Array2;

fn main() -> mockbci::Result<()> {
    let fs = 256.0;
    let fir = design_fir_bandpass(1.0, 35.0, 1.0, 8.75, 3.3, fs)?;
    let taps = fir.taps();
    let n = taps.len();
    let symmetric = (0..n / 2).all(|i| taps[i] == taps[n - 1 - i]);
    println!("{n} taps, symmetric: {symmetric}");
    for f in [0.25, 0.5, 1.0, 10.0, 20.0, 35.0, 39.4, 50.0] {
        println!("{f:>6.2} Hz  {:>8.2} dB", 20.0 * fir.gain(f).log10());
    }

    // A 10 Hz burst riding on a slow drift; the filtered burst keeps its timing.
    let len = 10 * fs as usize;
    let data = Array2::from_shape_fn((1, len), |(_, i)| {
        let t = i as f64 / fs;
        let env = (-((t - 5.0) / 0.3).powi(2)).exp();
        env * (2.0 * PI * 10.0 * t).sin() + 3.0 * (2.0 * PI * 0.05 * t).sin()
    });
    let rec = Recording::new(data, fs, vec![ChannelInfo::new("Cz", ChannelKind::Eeg)])?;
    let out = apply_fir_zero_phase(&fir, &rec)?;
    let y = out.channel(0);
    let peak = (0..len).max_by(|&a, &b| y[a].abs().total_cmp(&y[b].abs())).unwrap();
    println!("burst peak at {:.3} s (injected at 5.000 s)", peak as f64 / fs);
    Ok(())
}
