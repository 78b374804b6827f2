//! DPSS tapers and a multitaper time-frequency map of a transient 10 Hz
//! desynchronization.
//!
//! cargo run --example multitaper

use std::f64::consts::PI;

use mockbci::signal::{ChannelInfo, ChannelKind, Class, Epochs};
use mockbci::spectral::{dpss_tapers, frequency_grid, multitaper_tfr, MultitaperConfig};
use ndarray::Array3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> mockbci::Result<()> {
    let basis = dpss_tapers(512, 4.0, 7)?;
    let gram = basis.tapers.dot(&basis.tapers.t());
    let off = (0..7)
        .flat_map(|i| (0..7).map(move |j| (i, j)))
        .map(|(i, j)| (gram[[i, j]] - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    println!("N=512 NW=4: λ0 = {:.8}, max |T·Tᵀ - I| = {off:.2e}", basis.concentrations[0]);

    // 30 trials, alpha amplitude halves between 1 and 3 s.
    let fs = 256.0;
    let (tmin, tmax) = (-1.0, 5.0);
    let ns = ((tmax - tmin) * fs) as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut data = Array3::<f64>::zeros((30, 1, ns));
    for k in 0..30 {
        let phase: f64 = StandardNormal.sample(&mut rng);
        for i in 0..ns {
            let t = tmin + i as f64 / fs;
            let amp = if (1.0..3.0).contains(&t) { 0.5 } else { 1.0 };
            let noise: f64 = StandardNormal.sample(&mut rng);
            data[[k, 0, i]] = 1e-5 * (amp * (2.0 * PI * 10.0 * t + phase).sin() + 0.2 * noise);
        }
    }
    let epochs = Epochs {
        data,
        labels: vec![Class::Left; 30],
        onsets: (0..30).map(|k| 10.0 * k as f64).collect(),
        tmin,
        tmax,
        fs,
        channels: vec![ChannelInfo::new("C4", ChannelKind::Eeg)],
    };
    let freqs = frequency_grid(5.0, 35.0, 1.0);
    let maps = multitaper_tfr(&epochs, &freqs, &MultitaperConfig::default(), 0.5)?;
    let map = &maps[0];
    println!("map: {} frequencies × {} times", map.freqs.len(), map.times.len());
    let before = map.mean_band_power(8.0, 12.0, -0.5, 0.5);
    let during = map.mean_band_power(8.0, 12.0, 1.5, 2.5);
    let after = map.mean_band_power(8.0, 12.0, 3.5, 4.5);
    println!("8-12 Hz power  before {before:.3e}  during {during:.3e}  after {after:.3e} V²");
    Ok(())
}
