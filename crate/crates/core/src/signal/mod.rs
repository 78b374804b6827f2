//! Continuous-signal data model, filtering, re-referencing and epoching.

pub mod epochs;
pub mod fir;
pub mod iir;
pub mod markers;
pub mod mbr;
pub mod montage;
pub mod recording;
pub mod reference;

pub use epochs::{epoch_extract, peak_to_peak_reject, EpochExtraction, Epochs, Volts};
pub use fir::{apply_fir_zero_phase, design_fir_bandpass, FirFilter};
pub use iir::{apply_iir_causal, design_butterworth_bandpass, design_notch, IirFilter, IirKind};
pub use markers::{Class, Marker, MarkerLabel, MarkerList};
pub use recording::{ChannelInfo, ChannelKind, Recording};
pub use reference::{common_average_reference, surface_laplacian};
