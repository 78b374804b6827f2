//! Framed streaming transport, recorder, and the online EMG decoder.

pub mod decoder;
pub mod frame;
pub mod recorder;
pub mod transport;

pub use decoder::{
    emg_chain_filter, offline_emg_decode, online_emg_decode, read_predictions_csv, write_predictions_csv, DecoderConfig,
    DecoderState, EmgChain, EmgChainConfig, Prediction,
};
pub use frame::{decode_frame, encode_frame, read_frame, FrameBody, FrameKind, StreamFrame, HEADER_LEN};
pub use recorder::{record_streams, Capture, Gap, RecordedSession, StreamInfo, TimedFrame};
pub use transport::{
    pipe, plan_frames, read_all_frames, spawn_producer, stream_producer, wire_precision, ChannelReader, ChannelWriter,
    ProducerConfig, ProducerStats, DEFAULT_DATA_STREAM, DEFAULT_MARKER_STREAM,
};
