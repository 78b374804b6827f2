//! Multitaper time-frequency estimation and ICA artifact removal.

pub mod dpss;
pub mod ica;
pub mod tfr;

pub use dpss::{dpss_tapers, DpssBasis};
pub use ica::{
    amari_index, fastica_fit, fastica_fit_recording, ica_apply, ica_mark_artifacts, FastIcaConfig, IcaDecomposition,
};
pub use tfr::{frequency_grid, multitaper_tfr, MultitaperConfig, TimeFrequencyMap};
