//! Framing, transport and multi-stream recording: frames from a clock that
//! runs 0.5 s ahead are merged with a reference stream, the offset is
//! estimated and removed, and a dropped frame shows up as a gap.
//!
//! cargo run --example stream_recorder

use mockbci::signal::{ChannelInfo, ChannelKind, MarkerList, Recording};
use mockbci::stream::{
    decode_frame, encode_frame, plan_frames, record_streams, Capture, FrameBody, ProducerConfig, StreamInfo,
};
use ndarray::Array2;

fn main() -> mockbci::Result<()> {
    let fs = 256.0;
    let sine = |phase: f64| {
        Array2::from_shape_fn((2, 2560), |(c, i)| (0.1 * i as f64 + phase * (c + 1) as f64).sin() as f32 as f64)
    };
    let chans = |p: &str| {
        (0..2)
            .map(|i| ChannelInfo::new(format!("{p}{i}"), ChannelKind::Emg))
            .collect::<Vec<_>>()
    };
    let a = Recording::new(sine(0.0), fs, chans("A"))?;
    let b = Recording::new(sine(1.0), fs, chans("B"))?;
    let mut markers = MarkerList::new();
    markers.push(2.0, "LEFT")?;
    markers.push(6.5, "RIGHT")?;

    let pa = ProducerConfig::default();
    let pb = ProducerConfig {
        data_stream: 3,
        marker_stream: 4,
        ..Default::default()
    };
    let fa = plan_frames(&a, &markers, &pa)?;
    let mut fb = plan_frames(&b, &MarkerList::new(), &pb)?;

    let bytes = encode_frame(&fa[1]);
    let (back, used) = decode_frame(&bytes)?;
    println!("one frame: {used} bytes, round trip exact: {}", back == fa[1]);

    // Lose one chunk of stream B in transit.
    let lost = fb.iter().position(|f| matches!(f.body, FrameBody::Data { .. }) && f.timestamp > 4.0).unwrap();
    fb.remove(lost);

    let fs_of = |_: u16| fs;
    let captures = [Capture::ideal(fa, fs_of, 0.0), Capture::ideal(fb, fs_of, -0.5)];
    let infos = [
        StreamInfo {
            stream_id: 1,
            fs,
            channels: chans("A"),
        },
        StreamInfo {
            stream_id: 3,
            fs,
            channels: chans("B"),
        },
    ];
    let rec = record_streams(&captures, &infos)?;
    println!("estimated clock offsets {:?} s", rec.offsets);
    println!("markers {:?}", rec.markers.iter().map(|m| (m.time_s, m.label.to_string())).collect::<Vec<_>>());
    for g in &rec.gaps {
        println!("gap in stream {} at {:.3} s, {} samples zero-filled", g.stream_id, g.start_s, g.n_samples);
    }
    println!("stream A recovered exactly: {}", rec.recordings[&1].data() == a.data());
    Ok(())
}
