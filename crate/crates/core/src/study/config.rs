use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decoding::csp::DEFAULT_N_FILTERS;
use crate::decoding::logistic::DEFAULT_L2;
use crate::decoding::Shrinkage;
use crate::error::{Error, Result};
use crate::spectral::MultitaperConfig;
use crate::stream::DecoderConfig;
use crate::synth::SynthSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EegConfig {
    pub band_hz: (f64, f64),
    pub transition_hz: (f64, f64),
    pub fir_length_s: f64,
    pub ica_components: usize,
    pub reject_uv: f64,
}

impl Default for EegConfig {
    fn default() -> Self {
        Self {
            band_hz: (1.0, 35.0),
            transition_hz: (1.0, 8.75),
            fir_length_s: 3.3,
            ica_components: 20,
            reject_uv: 100.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CspConfig {
    pub n_filters: usize,
    pub shrinkage: Shrinkage,
    pub l2: f64,
    pub cv_folds: usize,
    pub cv_repeats: usize,
    pub threshold_split: f64,
}

impl Default for CspConfig {
    fn default() -> Self {
        Self {
            n_filters: DEFAULT_N_FILTERS,
            shrinkage: Shrinkage::Auto,
            l2: DEFAULT_L2,
            cv_folds: 5,
            cv_repeats: 5,
            threshold_split: 0.10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmrConfig {
    /// Cue-frame window; the movement starts at 1.25 s.
    pub window_s: (f64, f64),
    pub freqs_hz: (f64, f64, f64),
    pub pad_s: f64,
    pub multitaper: MultitaperConfig,
}

impl Default for SmrConfig {
    fn default() -> Self {
        Self {
            window_s: (-3.0, 5.0),
            freqs_hz: (5.0, 35.0, 1.0),
            pad_s: 0.5,
            multitaper: MultitaperConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MrcpConfig {
    pub band_hz: (f64, f64),
    pub order: usize,
    pub window_s: (f64, f64),
    /// Reference span for the negativity measure (cue frame).
    pub baseline_s: (f64, f64),
    /// Span searched for the most negative point of the average (cue frame).
    pub peak_s: (f64, f64),
}

impl Default for MrcpConfig {
    fn default() -> Self {
        Self {
            band_hz: (0.1, 3.0),
            order: 8,
            window_s: (-2.0, 5.0),
            baseline_s: (-1.5, -0.5),
            peak_s: (0.0, 1.25),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmgConfig {
    pub cv_folds: usize,
    pub decoder: DecoderConfig,
}

impl Default for EmgConfig {
    fn default() -> Self {
        Self {
            cv_folds: 10,
            decoder: DecoderConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StreamSimConfig {
    pub chunk_samples: usize,
    pub pacing: f64,
    pub pipe_capacity: usize,
}

impl Default for StreamSimConfig {
    fn default() -> Self {
        Self {
            chunk_samples: 32,
            pacing: 0.0,
            pipe_capacity: 64,
        }
    }
}

/// Everything a reproducible run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub laps: usize,
    pub synth: SynthSpec,
    pub emg: EmgConfig,
    pub eeg: EegConfig,
    pub csp: CspConfig,
    pub smr: SmrConfig,
    pub mrcp: MrcpConfig,
    pub stream: StreamSimConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            out_dir: PathBuf::from("out"),
            laps: 15,
            synth: SynthSpec::default(),
            emg: EmgConfig::default(),
            eeg: EegConfig::default(),
            csp: CspConfig::default(),
            smr: SmrConfig::default(),
            mrcp: MrcpConfig::default(),
            stream: StreamSimConfig::default(),
        }
    }
}

fn bad(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidSpec {
        field: field.to_string(),
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Format(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        if self.laps == 0 {
            return Err(bad("laps", "need at least one lap"));
        }
        if self.emg.cv_folds < 2 {
            return Err(bad("emg.cv_folds", "need at least 2 folds"));
        }
        if self.csp.cv_folds < 2 || self.csp.cv_repeats == 0 {
            return Err(bad("csp.cv_folds", "need ≥ 2 folds and ≥ 1 repeat"));
        }
        if self.csp.n_filters == 0 || self.csp.n_filters % 3 != 0 {
            return Err(bad("csp.n_filters", "must be a positive multiple of the 3 classes"));
        }
        if !(self.csp.threshold_split > 0.0 && self.csp.threshold_split < 1.0) {
            return Err(bad("csp.threshold_split", "must lie in (0, 1)"));
        }
        if !(self.eeg.reject_uv > 0.0) {
            return Err(bad("eeg.reject_uv", "must be positive"));
        }
        if self.eeg.ica_components == 0 {
            return Err(bad("eeg.ica_components", "must be ≥ 1"));
        }
        if self.stream.chunk_samples == 0 || self.stream.chunk_samples > u16::MAX as usize {
            return Err(bad("stream.chunk_samples", "must be in 1..=65535"));
        }
        if !(self.stream.pacing >= 0.0) {
            return Err(bad("stream.pacing", "must be ≥ 0"));
        }
        if !(self.emg.decoder.emit_period_s > 0.0 && self.emg.decoder.window_s > 0.0) {
            return Err(bad("emg.decoder", "window and emit period must be positive"));
        }
        Ok(())
    }
}
