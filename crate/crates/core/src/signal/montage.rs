//! The 40-channel acquisition layout: 32 EEG electrodes on the 10-20 system,
//! two monopolar EMG pairs (flexor/extensor per forearm) and four EOG leads.

use super::recording::{ChannelInfo, ChannelKind};

/// (label, radius, azimuth in degrees from the nose, positive to the right).
/// Radius 1 is the T7–Fpz–T8 circumference, 0 is the vertex.
const EEG_POLAR: [(&str, f64, f64); 32] = [
    ("Fp1", 1.0, -18.0),
    ("AF3", 0.74, -22.0),
    ("F7", 1.0, -54.0),
    ("F3", 0.56, -40.0),
    ("FC1", 0.30, -45.0),
    ("FC5", 0.80, -69.0),
    ("T7", 1.0, -90.0),
    ("C3", 0.5, -90.0),
    ("CP1", 0.30, -135.0),
    ("CP5", 0.80, -111.0),
    ("P7", 1.0, -126.0),
    ("P3", 0.56, -140.0),
    ("Pz", 0.5, 180.0),
    ("PO3", 0.74, -158.0),
    ("O1", 1.0, -162.0),
    ("Oz", 1.0, 180.0),
    ("O2", 1.0, 162.0),
    ("PO4", 0.74, 158.0),
    ("P4", 0.56, 140.0),
    ("P8", 1.0, 126.0),
    ("CP6", 0.80, 111.0),
    ("CP2", 0.30, 135.0),
    ("C4", 0.5, 90.0),
    ("T8", 1.0, 90.0),
    ("FC6", 0.80, 69.0),
    ("FC2", 0.30, 45.0),
    ("F4", 0.56, 40.0),
    ("F8", 1.0, 54.0),
    ("AF4", 0.74, 22.0),
    ("Fp2", 1.0, 18.0),
    ("Fz", 0.5, 0.0),
    ("Cz", 0.0, 0.0),
];

/// Left flexor, left extensor, right flexor, right extensor.
pub const EMG_LABELS: [&str; 4] = ["EMG-LF", "EMG-LE", "EMG-RF", "EMG-RE"];
pub const EOG_LABELS: [&str; 4] = ["HEOG-L", "HEOG-R", "VEOG-U", "VEOG-L"];

pub const C3_NEIGHBORS: [&str; 4] = ["FC1", "FC5", "CP1", "CP5"];
pub const C4_NEIGHBORS: [&str; 4] = ["FC2", "FC6", "CP2", "CP6"];

pub fn eeg_position(label: &str) -> Option<[f64; 2]> {
    EEG_POLAR
        .iter()
        .find(|(l, _, _)| *l == label)
        .map(|&(_, r, az)| polar_to_xy(r, az))
}

fn polar_to_xy(r: f64, az_deg: f64) -> [f64; 2] {
    let az = az_deg.to_radians();
    [r * az.sin(), r * az.cos()]
}

pub fn eeg_channels() -> Vec<ChannelInfo> {
    EEG_POLAR
        .iter()
        .map(|&(label, r, az)| {
            let [x, y] = polar_to_xy(r, az);
            ChannelInfo::new(label, ChannelKind::Eeg).with_position(x, y)
        })
        .collect()
}

/// 32 EEG + 4 EMG + 4 EOG, in that order.
pub fn standard_montage() -> Vec<ChannelInfo> {
    let mut chans = eeg_channels();
    chans.extend(EMG_LABELS.iter().map(|l| ChannelInfo::new(*l, ChannelKind::Emg)));
    chans.extend(EOG_LABELS.iter().map(|l| ChannelInfo::new(*l, ChannelKind::Eog)));
    chans
}

/// Hjorth neighbors used for the small Laplacian at a motor electrode.
pub fn laplacian_neighbors(center: &str) -> Option<&'static [&'static str]> {
    match center {
        "C3" => Some(&C3_NEIGHBORS),
        "C4" => Some(&C4_NEIGHBORS),
        _ => None,
    }
}
