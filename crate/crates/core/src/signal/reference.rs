use ndarray::Array1;

use super::recording::{ChannelKind, Recording};
use crate::error::{Error, Result};

/// Subtracts, per sample, the mean over every channel whose kind is in
/// `kinds`. Other channels are untouched.
pub fn common_average_reference(recording: &Recording, kinds: &[ChannelKind]) -> Result<Recording> {
    let mut out = recording.clone();
    car_in_place(&mut out, kinds)?;
    Ok(out)
}

pub fn car_in_place(recording: &mut Recording, kinds: &[ChannelKind]) -> Result<()> {
    let idx: Vec<usize> = recording
        .channels()
        .iter()
        .enumerate()
        .filter(|(_, c)| kinds.contains(&c.kind))
        .map(|(i, _)| i)
        .collect();
    if idx.len() < 2 {
        return Err(Error::InsufficientChannels(format!(
            "common average reference needs at least 2 channels of {kinds:?}, found {}",
            idx.len()
        )));
    }
    let n = recording.n_samples();
    let data = recording.data_mut();
    let mut mean = Array1::<f64>::zeros(n);
    for &i in &idx {
        mean += &data.row(i);
    }
    mean /= idx.len() as f64;
    for &i in &idx {
        let mut row = data.row_mut(i);
        row -= &mean;
    }
    Ok(())
}

/// Hjorth small Laplacian: `center − mean(neighbors)` per sample.
pub fn surface_laplacian(recording: &Recording, center: &str, neighbors: &[&str]) -> Result<Array1<f64>> {
    let c = eeg_index(recording, center)?;
    if neighbors.is_empty() {
        return Err(Error::InsufficientChannels("Laplacian needs at least one neighbor".into()));
    }
    let nb = neighbors
        .iter()
        .map(|l| eeg_index(recording, l))
        .collect::<Result<Vec<_>>>()?;
    let data = recording.data();
    let mut mean = Array1::<f64>::zeros(recording.n_samples());
    for &i in &nb {
        mean += &data.row(i);
    }
    mean /= nb.len() as f64;
    Ok(&data.row(c) - &mean)
}

fn eeg_index(recording: &Recording, label: &str) -> Result<usize> {
    let i = recording.index_of(label)?;
    if recording.channels()[i].kind != ChannelKind::Eeg {
        return Err(Error::Layout(format!("channel `{label}` is not EEG")));
    }
    Ok(i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::recording::ChannelInfo;
    use ndarray::{array, Array2};
    use proptest::prelude::*;

    fn rec(data: Array2<f64>, kinds: &[ChannelKind]) -> Recording {
        let chans = kinds
            .iter()
            .enumerate()
            .map(|(i, k)| ChannelInfo::new(format!("c{i}"), *k))
            .collect();
        Recording::new(data, 100.0, chans).unwrap()
    }

    #[test]
    fn car_two_channels() {
        let r = rec(array![[3.0], [1.0]], &[ChannelKind::Emg, ChannelKind::Emg]);
        let out = common_average_reference(&r, &[ChannelKind::Emg]).unwrap();
        assert_eq!(out.data(), &array![[1.0], [-1.0]]);
    }

    #[test]
    fn car_leaves_other_kinds() {
        let r = rec(
            array![[3.0, 1.0], [1.0, 5.0], [7.0, 7.0]],
            &[ChannelKind::Emg, ChannelKind::Emg, ChannelKind::Eeg],
        );
        let out = common_average_reference(&r, &[ChannelKind::Emg]).unwrap();
        assert_eq!(out.data().row(2), r.data().row(2));
    }

    #[test]
    fn car_needs_two_channels() {
        let r = rec(array![[3.0], [1.0]], &[ChannelKind::Emg, ChannelKind::Eeg]);
        assert!(matches!(
            common_average_reference(&r, &[ChannelKind::Emg]),
            Err(Error::InsufficientChannels(_))
        ));
    }

    proptest! {
        #[test]
        fn car_zero_mean_and_idempotent(values in proptest::collection::vec(-1e-4f64..1e-4, 40)) {
            let data = Array2::from_shape_vec((4, 10), values).unwrap();
            let r = rec(data, &[ChannelKind::Eeg; 4]);
            let once = common_average_reference(&r, &[ChannelKind::Eeg]).unwrap();
            for col in once.data().columns() {
                prop_assert!(col.sum().abs() / 4.0 <= 1e-12);
            }
            let twice = common_average_reference(&once, &[ChannelKind::Eeg]).unwrap();
            for (a, b) in once.data().iter().zip(twice.data().iter()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn laplacian_is_linear(a in proptest::collection::vec(-1.0f64..1.0, 15), b in proptest::collection::vec(-1.0f64..1.0, 15)) {
            let ra = rec(Array2::from_shape_vec((5, 3), a).unwrap(), &[ChannelKind::Eeg; 5]);
            let rb = rec(Array2::from_shape_vec((5, 3), b).unwrap(), &[ChannelKind::Eeg; 5]);
            let rs = ra.with_data(ra.data() + rb.data()).unwrap();
            let nb = ["c1", "c2", "c3", "c4"];
            let la = surface_laplacian(&ra, "c0", &nb).unwrap();
            let lb = surface_laplacian(&rb, "c0", &nb).unwrap();
            let ls = surface_laplacian(&rs, "c0", &nb).unwrap();
            for i in 0..3 {
                prop_assert!((ls[i] - la[i] - lb[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn laplacian_arithmetic() {
        let r = rec(array![[2.0], [1.0], [1.0], [1.0], [1.0]], &[ChannelKind::Eeg; 5]);
        let l = surface_laplacian(&r, "c0", &["c1", "c2", "c3", "c4"]).unwrap();
        assert_eq!(l[0], 1.0);
        let flat = rec(Array2::from_elem((5, 8), 0.7), &[ChannelKind::Eeg; 5]);
        let l = surface_laplacian(&flat, "c0", &["c1", "c2", "c3", "c4"]).unwrap();
        assert!(l.iter().all(|&v| v == 0.0));
        assert!(matches!(
            surface_laplacian(&r, "c0", &["c1", "nope"]),
            Err(Error::UnknownChannel(_))
        ));
    }
}
