use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::signal::{ChannelKind, Epochs};

/// Mean of x² per trial and EMG channel.
pub fn emg_mean_power_features(epochs: &Epochs) -> Result<Array2<f64>> {
    if epochs.n_channels() != 4 || epochs.channels.iter().any(|c| c.kind != ChannelKind::Emg) {
        let labels: Vec<&str> = epochs.channels.iter().map(|c| c.label.as_str()).collect();
        return Err(Error::Layout(format!("expected exactly 4 EMG channels, got {labels:?}")));
    }
    if epochs.n_samples() == 0 {
        return Err(Error::TooShort("empty EMG epochs".into()));
    }
    Ok(epochs.data.map_axis(Axis(2), |x| x.dot(&x) / x.len() as f64))
}
