//! FastICA (symmetric fixed-point, log-cosh contrast) with PCA whitening,
//! EOG-correlation artifact marking, and reconstruction with rejected
//! components removed.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{from_na, sym_eig_desc, symmetric_decorrelation, to_na};
use crate::signal::{ChannelKind, Recording};

/// Components whose source correlates with any EOG channel beyond this
/// magnitude are rejected.
pub const EOG_CORRELATION_THRESHOLD: f64 = 0.7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FastIcaConfig {
    pub n_components: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    /// Fit on every `decimate`-th sample.
    pub decimate: usize,
}

impl FastIcaConfig {
    pub fn new(n_components: usize, seed: u64) -> Self {
        Self {
            n_components,
            max_iter: 200,
            tol: 1e-4,
            seed,
            decimate: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IcaDecomposition {
    /// n_components × n_channels, whitening included.
    pub unmixing: Array2<f64>,
    /// n_channels × n_components; `unmixing · mixing = I`.
    pub mixing: Array2<f64>,
    pub mean: Array1<f64>,
    /// Labels of the channels the decomposition was fitted on, in order.
    pub channels: Vec<String>,
    pub rejected: BTreeSet<usize>,
    pub converged: bool,
    pub n_iter: usize,
    /// Free-form provenance, e.g. "calibration".
    pub fitted_on: String,
}

impl IcaDecomposition {
    pub fn n_components(&self) -> usize {
        self.unmixing.nrows()
    }

    /// Source time courses for centered-by-fit-mean data (channels × samples).
    pub fn sources(&self, data: ArrayView2<'_, f64>) -> Array2<f64> {
        let centered = &data - &self.mean.view().insert_axis(Axis(1));
        self.unmixing.dot(&centered)
    }

    fn channel_indices(&self, recording: &Recording) -> Result<Vec<usize>> {
        self.channels
            .iter()
            .map(|l| {
                recording
                    .index_of(l)
                    .map_err(|_| Error::Layout(format!("channel `{l}` used by the ICA fit is missing")))
            })
            .collect()
    }
}

/// Fits on `data` (channels × samples).
pub fn fastica_fit(data: ArrayView2<'_, f64>, channels: &[String], config: &FastIcaConfig) -> Result<IcaDecomposition> {
    let n_ch = data.nrows();
    if channels.len() != n_ch {
        return Err(Error::Layout(format!("{} labels for {n_ch} rows", channels.len())));
    }
    if config.n_components == 0 || config.n_components > n_ch {
        return Err(Error::InvalidRequest(format!(
            "{} components requested from {n_ch} channels",
            config.n_components
        )));
    }
    let step = config.decimate.max(1);
    let x = data.slice(ndarray::s![.., ..;step]);
    let n = x.ncols();
    if n < 2 * config.n_components {
        return Err(Error::InsufficientData(format!("{n} samples for {} components", config.n_components)));
    }
    let mean = x.mean_axis(Axis(1)).unwrap();
    let xc = &x - &mean.view().insert_axis(Axis(1));
    let cov = xc.dot(&xc.t()) / n as f64;

    let (vals, vecs) = sym_eig_desc(&to_na(&cov));
    let k = config.n_components;
    if !(vals[k - 1] > vals[0] * 1e-14) {
        return Err(Error::Numerical("data rank below the requested component count".into()));
    }
    let whitener = DMatrix::from_fn(k, n_ch, |r, c| vecs[(c, r)] / vals[r].sqrt());
    let dewhitener = DMatrix::from_fn(n_ch, k, |r, c| vecs[(r, c)] * vals[c].sqrt());
    let z = from_na(&whitener).dot(&xc);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let w0 = DMatrix::from_fn(k, k, |_, _| StandardNormal.sample(&mut rng));
    let mut w = symmetric_decorrelation(&w0)?;
    let mut best = (f64::INFINITY, w.clone());
    let mut converged = false;
    let mut n_iter = 0;
    for it in 0..config.max_iter {
        n_iter = it + 1;
        let wa = from_na(&w);
        let mut y = wa.dot(&z);
        let mut dg = Array1::<f64>::zeros(k);
        for (mut row, d) in y.axis_iter_mut(Axis(0)).zip(dg.iter_mut()) {
            let mut acc = 0.0;
            row.mapv_inplace(|v| {
                let t = v.tanh();
                acc += 1.0 - t * t;
                t
            });
            *d = acc / n as f64;
        }
        let mut w_new = y.dot(&z.t()) / n as f64;
        for (mut row, (&d, wrow)) in w_new.axis_iter_mut(Axis(0)).zip(dg.iter().zip(wa.axis_iter(Axis(0)))) {
            row.scaled_add(-d, &wrow);
        }
        let w_new = symmetric_decorrelation(&to_na(&w_new))?;
        let change = (0..k)
            .map(|i| (1.0 - w_new.row(i).dot(&w.row(i)).abs()).abs())
            .fold(0.0, f64::max);
        w = w_new;
        if change < best.0 {
            best = (change, w.clone());
        }
        if change < config.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("FastICA did not converge in {} iterations (best change {:.3e})", config.max_iter, best.0);
        w = best.1;
    }
    let unmixing = from_na(&(&w * &whitener));
    let mixing = from_na(&(&dewhitener * w.transpose()));
    Ok(IcaDecomposition {
        unmixing,
        mixing,
        mean,
        channels: channels.to_vec(),
        rejected: BTreeSet::new(),
        converged,
        n_iter,
        fitted_on: String::new(),
    })
}

/// Fits on the listed channels of a recording.
pub fn fastica_fit_recording(recording: &Recording, picks: &[usize], config: &FastIcaConfig) -> Result<IcaDecomposition> {
    let sub = recording.pick(picks)?;
    let labels: Vec<String> = sub.channels().iter().map(|c| c.label.clone()).collect();
    fastica_fit(sub.data().view(), &labels, config)
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Indices of rows whose largest |r| strictly exceeds `threshold`.
pub fn components_exceeding(correlations: &[Vec<f64>], threshold: f64) -> BTreeSet<usize> {
    correlations
        .iter()
        .enumerate()
        .filter(|(_, rs)| rs.iter().any(|r| r.abs() > threshold))
        .map(|(i, _)| i)
        .collect()
}

/// |Pearson r| of each component source against each EOG channel;
/// rows are components.
pub fn eog_correlations(ica: &IcaDecomposition, recording: &Recording, eog_labels: &[&str]) -> Result<Vec<Vec<f64>>> {
    let eog: Vec<usize> = if eog_labels.is_empty() {
        recording.indices_of_kind(ChannelKind::Eog)
    } else {
        eog_labels
            .iter()
            .filter_map(|l| recording.index_of(l).ok())
            .collect()
    };
    if eog.is_empty() {
        return Err(Error::CriterionUnavailable("no EOG channels in the recording".into()));
    }
    let idx = ica.channel_indices(recording)?;
    let sub = recording.data().select(Axis(0), &idx);
    let sources = ica.sources(sub.view());
    let eog_rows: Vec<Vec<f64>> = eog.iter().map(|&i| recording.channel(i).to_vec()).collect();
    Ok(sources
        .axis_iter(Axis(0))
        .map(|s| {
            let s = s.to_vec();
            eog_rows.iter().map(|e| pearson(&s, e)).collect()
        })
        .collect())
}

/// Marks components correlated with EOG (|r| > 0.7) as rejected.
pub fn ica_mark_artifacts(ica: &IcaDecomposition, recording: &Recording, eog_labels: &[&str]) -> Result<IcaDecomposition> {
    let corr = eog_correlations(ica, recording, eog_labels)?;
    let mut out = ica.clone();
    out.rejected = components_exceeding(&corr, EOG_CORRELATION_THRESHOLD);
    Ok(out)
}

/// Removes the rejected components' contribution from the fitted channels:
/// `x − A[:, rejected] · s[rejected]`. With nothing rejected the output
/// equals the input.
pub fn ica_apply(ica: &IcaDecomposition, recording: &Recording) -> Result<Recording> {
    let idx = ica.channel_indices(recording)?;
    let mut out = recording.clone();
    if ica.rejected.is_empty() {
        return Ok(out);
    }
    let rej: Vec<usize> = ica.rejected.iter().copied().collect();
    let sub = recording.data().select(Axis(0), &idx);
    let src = ica.unmixing.select(Axis(0), &rej).dot(&(&sub - &ica.mean.view().insert_axis(Axis(1))));
    let contrib = ica.mixing.select(Axis(1), &rej).dot(&src);
    let data = out.data_mut();
    for (k, &ch) in idx.iter().enumerate() {
        let mut row = data.row_mut(ch);
        row -= &contrib.row(k);
    }
    Ok(out)
}

/// Amari distance of a (should-be scaled permutation) matrix, in [0, 1].
pub fn amari_index(p: &Array2<f64>) -> f64 {
    let n = p.nrows();
    assert_eq!(n, p.ncols(), "Amari index needs a square matrix");
    if n < 2 {
        return 0.0;
    }
    let a = p.mapv(f64::abs);
    let rows: f64 = a
        .axis_iter(Axis(0))
        .map(|r| r.sum() / r.fold(0.0f64, |m, &v| m.max(v)) - 1.0)
        .sum();
    let cols: f64 = a
        .axis_iter(Axis(1))
        .map(|c| c.sum() / c.fold(0.0f64, |m, &v| m.max(v)) - 1.0)
        .sum();
    (rows + cols) / (2.0 * n as f64 * (n as f64 - 1.0))
}
