pub mod decoding;
pub mod error;
pub mod paradigm;
mod linalg;
pub mod signal;
pub mod spectral;
pub mod stream;
pub mod study;
pub mod synth;

pub use error::{Error, Result};
