//! The cue-based calibration timeline: 30 s preparation, 2×20 shuffled
//! trials of cross (3 s), arrow (1.25 s), hold (3.75 s) and a 1.5-3.5 s
//! rest, plus the derived REST trials and EMG crop windows.
//!
//! cargo run --example calibration_paradigm -- [seed]

use mockbci::paradigm::{
    calibration_trial_markers, emg_crop_window, make_calibration_schedule, rest_emg_crop_window,
    run_length_encode, segment_driving,
};
use mockbci::signal::Class;

fn main() -> mockbci::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let s = make_calibration_schedule(seed);
    println!("preparation {:.1} s, {} trials", s.preparation_s, s.trials.len());
    for t in s.trials.iter().take(4) {
        let (a, b) = emg_crop_window(t);
        let (ra, rb) = rest_emg_crop_window(t);
        println!(
            "{:>5}: cross {:7.2}  cue {:7.2}  move {:7.2}  end {:7.2}  rest {:.2} s  EMG crop {a:.3}-{b:.3}  rest crop {ra:.3}-{rb:.3}",
            t.class.name(),
            t.cross_onset_s,
            t.cue_onset_s,
            t.movement_onset_s,
            t.trial_end_s,
            t.rest_gap_s
        );
    }
    let m = calibration_trial_markers(&s);
    let count = |c: Class| m.iter().filter(|k| k.label.as_class() == Some(c)).count();
    println!("class markers: {} LEFT, {} RIGHT, {} REST", count(Class::Left), count(Class::Right), count(Class::Rest));

    // Segmentation keeps only runs of one class lasting at least 3.75 s.
    let stream: Vec<(f64, Class)> = (0..400)
        .map(|k| {
            let t = k as f64 * 0.05;
            let c = if (2.0..6.0).contains(&t) {
                Class::Left
            } else if (9.0..11.0).contains(&t) {
                Class::Right
            } else {
                Class::Rest
            };
            (t, c)
        })
        .collect();
    println!("all runs:  {:?}", run_length_encode(&stream)?.iter().map(|r| (r.class.name(), r.duration_s)).collect::<Vec<_>>());
    println!("kept runs: {:?}", segment_driving(&stream)?.iter().map(|r| (r.class.name(), r.duration_s)).collect::<Vec<_>>());
    Ok(())
}
