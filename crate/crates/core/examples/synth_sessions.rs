//! Generates the calibration and driving sessions for one synthetic subject,
//! writes them to disk and reads them back.
//!
//! cargo run --example synth_sessions -- [seed] [out-dir]

use std::path::PathBuf;

use mockbci::signal::ChannelKind;
use mockbci::study::{generate_sessions, read_sessions, write_sessions, ExperimentConfig};

fn main() -> mockbci::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let dir = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("mockbci-synth"));
    let cfg = ExperimentConfig { seed, ..Default::default() };
    let pair = generate_sessions(&cfg)?;
    for (name, s) in [("calibration", &pair.calibration), ("driving", &pair.driving)] {
        let r = &s.recording;
        println!(
            "{name}: {:.1} s at {} Hz, {} EEG / {} EMG / {} EOG channels, {} markers",
            r.duration(),
            r.fs(),
            r.indices_of_kind(ChannelKind::Eeg).len(),
            r.indices_of_kind(ChannelKind::Emg).len(),
            r.indices_of_kind(ChannelKind::Eog).len(),
            s.markers.len()
        );
    }
    if let Some(t) = &pair.calibration.truth {
        println!("CNV injected at C3/C4: {:?} µV", t.cnv_injected_uv);
    }
    for p in write_sessions(&pair, &dir)? {
        println!("wrote {}", p.display());
    }
    let back = read_sessions(&dir)?;
    println!("read back identical: {}", back.driving.recording.data() == pair.driving.recording.data());
    Ok(())
}
