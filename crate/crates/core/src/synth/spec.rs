use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One sensorimotor rhythm and its event-related desynchronization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhythmSpec {
    pub low_hz: f64,
    pub high_hz: f64,
    pub amplitude_uv: f64,
    /// Fractional amplitude drop over the contralateral source during movement.
    pub erd_drop: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErdTiming {
    pub ramp_s: f64,
    /// ERD onset before movement onset, per session type.
    pub lead_calibration_s: f64,
    pub lead_driving_s: f64,
    /// Release starts this long before the movement period ends.
    pub release_before_end_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaDipSpec {
    pub depth: f64,
    pub width_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MrcpSpec {
    /// Peak negativity of the contingent negative variation source.
    pub cnv_amplitude_uv: f64,
    pub calibration_only: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmgSpec {
    pub low_hz: f64,
    pub high_hz: f64,
    pub burst_uv: f64,
    pub flexor_gain: f64,
    pub extensor_gain: f64,
    /// Leakage of a burst into the other forearm's channels.
    pub crosstalk: f64,
    /// Log-normal spread of per-movement burst strength.
    pub gain_jitter: f64,
    pub baseline_uv: f64,
    pub line_noise_uv: f64,
    pub line_hz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EogSpec {
    pub blink_rate_hz: f64,
    pub blink_amplitude_uv: f64,
    pub noise_uv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub n_pink_sources: usize,
    pub pink_uv: f64,
    pub white_uv: f64,
    pub posterior_alpha_uv: f64,
    /// Stationary std of the slow log-amplitude drift on the motor rhythms.
    pub drift_sigma: f64,
    pub drift_tau_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainShiftSpec {
    pub enabled: bool,
    /// Multiplier on motor and posterior α amplitude while driving.
    pub alpha_scale: f64,
    /// Extra per-electrode 1/f noise while driving.
    pub extra_noise_uv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub fs: f64,
    pub alpha: RhythmSpec,
    pub beta: RhythmSpec,
    pub erd: ErdTiming,
    pub beta_dip: BetaDipSpec,
    pub mrcp: MrcpSpec,
    pub emg: EmgSpec,
    pub eog: EogSpec,
    pub noise: NoiseSpec,
    pub domain_shift: DomainShiftSpec,
    pub trials_per_class: usize,
    /// Exchange which hemisphere and forearm each hand class drives.
    pub mirror_hemispheres: bool,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            fs: 2048.0,
            alpha: RhythmSpec {
                low_hz: 8.0,
                high_hz: 12.0,
                amplitude_uv: 7.0,
                erd_drop: 0.5,
            },
            beta: RhythmSpec {
                low_hz: 12.5,
                high_hz: 30.0,
                amplitude_uv: 3.0,
                erd_drop: 0.3,
            },
            erd: ErdTiming {
                ramp_s: 0.25,
                lead_calibration_s: 0.25,
                lead_driving_s: 1.25,
                release_before_end_s: 0.5,
            },
            beta_dip: BetaDipSpec {
                depth: 0.6,
                width_s: 0.25,
            },
            mrcp: MrcpSpec {
                cnv_amplitude_uv: 20.0,
                calibration_only: true,
            },
            emg: EmgSpec {
                low_hz: 30.0,
                high_hz: 500.0,
                burst_uv: 60.0,
                flexor_gain: 1.0,
                extensor_gain: 0.6,
                crosstalk: 0.05,
                gain_jitter: 0.15,
                baseline_uv: 3.0,
                line_noise_uv: 20.0,
                line_hz: 50.0,
            },
            eog: EogSpec {
                blink_rate_hz: 0.2,
                blink_amplitude_uv: 150.0,
                noise_uv: 4.0,
            },
            noise: NoiseSpec {
                n_pink_sources: 8,
                pink_uv: 5.0,
                white_uv: 1.0,
                posterior_alpha_uv: 6.0,
                drift_sigma: 0.4,
                drift_tau_s: 2.0,
            },
            domain_shift: DomainShiftSpec {
                enabled: true,
                alpha_scale: 0.6,
                extra_noise_uv: 4.0,
            },
            trials_per_class: 20,
            mirror_hemispheres: false,
            seed: 0,
        }
    }
}

fn band(field: &str, low: f64, high: f64, fs: f64) -> Result<()> {
    if !(low > 0.0 && low < high && high < fs / 2.0) {
        return Err(Error::spec(field, format!("need 0 < {low} < {high} < {} Hz", fs / 2.0)));
    }
    Ok(())
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::spec(field, format!("{v} must be a finite value ≥ 0")));
    }
    Ok(())
}

fn fraction(field: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::spec(field, format!("{v} must lie in (0, 1)")));
    }
    Ok(())
}

impl SynthSpec {
    /// Checks every field; the error names the offending one.
    pub fn validate(&self) -> Result<()> {
        if !(self.fs > 0.0 && self.fs.is_finite()) {
            return Err(Error::spec("fs", format!("{} must be positive", self.fs)));
        }
        band("alpha", self.alpha.low_hz, self.alpha.high_hz, self.fs)?;
        band("beta", self.beta.low_hz, self.beta.high_hz, self.fs)?;
        band("emg", self.emg.low_hz, self.emg.high_hz, self.fs)?;
        fraction("alpha.erd_drop", self.alpha.erd_drop)?;
        fraction("beta.erd_drop", self.beta.erd_drop)?;
        non_negative("alpha.amplitude_uv", self.alpha.amplitude_uv)?;
        non_negative("beta.amplitude_uv", self.beta.amplitude_uv)?;
        non_negative("erd.ramp_s", self.erd.ramp_s)?;
        non_negative("erd.lead_calibration_s", self.erd.lead_calibration_s)?;
        non_negative("erd.lead_driving_s", self.erd.lead_driving_s)?;
        non_negative("erd.release_before_end_s", self.erd.release_before_end_s)?;
        if !(0.0..=1.0).contains(&self.beta_dip.depth) {
            return Err(Error::spec("beta_dip.depth", "must lie in [0, 1]"));
        }
        if !(self.beta_dip.width_s > 0.0) {
            return Err(Error::spec("beta_dip.width_s", "must be positive"));
        }
        non_negative("mrcp.cnv_amplitude_uv", self.mrcp.cnv_amplitude_uv)?;
        for (f, v) in [
            ("emg.burst_uv", self.emg.burst_uv),
            ("emg.flexor_gain", self.emg.flexor_gain),
            ("emg.extensor_gain", self.emg.extensor_gain),
            ("emg.crosstalk", self.emg.crosstalk),
            ("emg.gain_jitter", self.emg.gain_jitter),
            ("emg.baseline_uv", self.emg.baseline_uv),
            ("emg.line_noise_uv", self.emg.line_noise_uv),
            ("eog.blink_rate_hz", self.eog.blink_rate_hz),
            ("eog.blink_amplitude_uv", self.eog.blink_amplitude_uv),
            ("eog.noise_uv", self.eog.noise_uv),
            ("noise.pink_uv", self.noise.pink_uv),
            ("noise.white_uv", self.noise.white_uv),
            ("noise.posterior_alpha_uv", self.noise.posterior_alpha_uv),
            ("noise.drift_sigma", self.noise.drift_sigma),
            ("domain_shift.alpha_scale", self.domain_shift.alpha_scale),
            ("domain_shift.extra_noise_uv", self.domain_shift.extra_noise_uv),
        ] {
            non_negative(f, v)?;
        }
        if !(self.emg.line_hz > 0.0 && self.emg.line_hz < self.fs / 2.0) {
            return Err(Error::spec("emg.line_hz", "must lie below Nyquist"));
        }
        if !(self.noise.drift_tau_s > 0.0) {
            return Err(Error::spec("noise.drift_tau_s", "must be positive"));
        }
        if self.trials_per_class == 0 {
            return Err(Error::spec("trials_per_class", "must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_toml_round_trips() {
        let s = SynthSpec::default();
        s.validate().unwrap();
        let text = toml::to_string(&s).unwrap();
        let back: SynthSpec = toml::from_str(&text).unwrap();
        assert_eq!(back, s);
        let partial: SynthSpec = toml::from_str("fs = 1024.0\n[alpha]\nlow_hz = 8.0\nhigh_hz = 13.0\namplitude_uv = 5.0\nerd_drop = 0.4\n").unwrap();
        assert_eq!(partial.fs, 1024.0);
        assert_eq!(partial.beta, s.beta);
    }

    #[test]
    fn errors_name_the_field() {
        let mut s = SynthSpec::default();
        s.alpha.erd_drop = 1.0;
        match s.validate() {
            Err(Error::InvalidSpec { field, .. }) => assert_eq!(field, "alpha.erd_drop"),
            other => panic!("{other:?}"),
        }
        let mut s = SynthSpec::default();
        s.beta.low_hz = 40.0;
        assert!(matches!(s.validate(), Err(Error::InvalidSpec { field, .. }) if field == "beta"));
        let mut s = SynthSpec::default();
        s.emg.flexor_gain = -1.0;
        assert!(matches!(s.validate(), Err(Error::InvalidSpec { field, .. }) if field == "emg.flexor_gain"));
    }
}
