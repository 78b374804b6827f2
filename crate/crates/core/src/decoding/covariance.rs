use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Epochs;

/// Covariance regularization: analytic Ledoit-Wolf or a fixed coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum Shrinkage {
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ShrinkageRepr {
    Fixed(f64),
    Named(String),
}

impl Serialize for Shrinkage {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shrinkage::Auto => ShrinkageRepr::Named("auto".into()).serialize(s),
            Shrinkage::Fixed(v) => ShrinkageRepr::Fixed(*v).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Shrinkage {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match ShrinkageRepr::deserialize(d)? {
            ShrinkageRepr::Named(s) if s == "auto" => Ok(Shrinkage::Auto),
            ShrinkageRepr::Named(s) => Err(serde::de::Error::custom(format!("unknown shrinkage `{s}`"))),
            ShrinkageRepr::Fixed(v) if (0.0..=1.0).contains(&v) => Ok(Shrinkage::Fixed(v)),
            ShrinkageRepr::Fixed(v) => Err(serde::de::Error::custom(format!("shrinkage {v} outside [0, 1]"))),
        }
    }
}

/// Sufficient statistics of one mean-removed trial (channels × samples).
#[derive(Clone, Debug, PartialEq)]
pub struct TrialStats {
    /// Σ_t x_t x_tᵀ.
    pub scatter: Array2<f64>,
    pub n_samples: usize,
    /// Σ_t ‖x_t‖⁴.
    pub sum_norm4: f64,
}

impl TrialStats {
    pub fn from_trial(x: ArrayView2<'_, f64>) -> Self {
        let mean = x.mean_axis(Axis(1)).expect("non-empty trial");
        let xc = &x - &mean.insert_axis(Axis(1));
        let scatter = xc.dot(&xc.t());
        let sum_norm4 = xc
            .axis_iter(Axis(1))
            .map(|col| {
                let s = col.dot(&col);
                s * s
            })
            .sum();
        Self {
            scatter,
            n_samples: x.ncols(),
            sum_norm4,
        }
    }

    /// Per-trial covariance `scatter / n`.
    pub fn covariance(&self) -> Array2<f64> {
        &self.scatter / self.n_samples as f64
    }
}

/// Per-trial statistics cached once so that fold fits only sum matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialCovariances {
    pub trials: Vec<TrialStats>,
    pub channels: Vec<String>,
}

impl TrialCovariances {
    pub fn from_epochs(epochs: &Epochs) -> Result<Self> {
        if epochs.n_samples() < 2 {
            return Err(Error::TooShort("epochs need at least two samples".into()));
        }
        let trials = epochs
            .data
            .axis_iter(Axis(0))
            .map(TrialStats::from_trial)
            .collect();
        Ok(Self {
            trials,
            channels: epochs.channels.iter().map(|c| c.label.clone()).collect(),
        })
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }
}

/// Regularized covariance of the pooled samples of the given trials.
/// Returns the matrix and the shrinkage coefficient actually used.
pub fn pooled_covariance(stats: &[&TrialStats], shrinkage: Shrinkage) -> Result<(Array2<f64>, f64)> {
    let first = stats
        .first()
        .ok_or_else(|| Error::InsufficientData("no trials to pool".into()))?;
    let p = first.scatter.nrows();
    let mut scatter = Array2::<f64>::zeros((p, p));
    let mut n = 0usize;
    let mut norm4 = 0.0;
    for s in stats {
        scatter += &s.scatter;
        n += s.n_samples;
        norm4 += s.sum_norm4;
    }
    let emp = scatter / n as f64;
    let coef = match shrinkage {
        Shrinkage::Fixed(v) => v,
        Shrinkage::Auto => ledoit_wolf_coefficient(&emp, n, norm4),
    };
    Ok((shrink(&emp, coef), coef))
}

/// `(1 − s)·S + s·(tr S / p)·I`.
pub fn shrink(emp: &Array2<f64>, s: f64) -> Array2<f64> {
    let p = emp.nrows();
    let mu = emp.diag().sum() / p as f64;
    let mut out = emp * (1.0 - s);
    out.diag_mut().mapv_inplace(|v| v + s * mu);
    out
}

/// Ledoit-Wolf optimal shrinkage toward a scaled identity from the empirical
/// covariance `emp` of `n` centered samples with `Σ‖x‖⁴ = sum_norm4`.
pub fn ledoit_wolf_coefficient(emp: &Array2<f64>, n: usize, sum_norm4: f64) -> f64 {
    let p = emp.nrows() as f64;
    let n = n as f64;
    let tr = emp.diag().sum();
    let mu = tr / p;
    let fro2 = emp.iter().map(|v| v * v).sum::<f64>();
    let beta = (sum_norm4 / n - fro2) / (p * n);
    let delta = (fro2 - 2.0 * mu * tr + p * mu * mu) / p;
    let beta = beta.min(delta);
    if beta <= 0.0 || delta <= 0.0 {
        0.0
    } else {
        beta / delta
    }
}
