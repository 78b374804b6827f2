use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Class;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModelKind {
    Lda,
    Logistic,
}

/// Linear scores `W x + b`, one row per class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: ModelKind,
    /// Sorted by class index.
    pub classes: Vec<Class>,
    pub weights: Array2<f64>,
    pub intercepts: Array1<f64>,
}

impl LinearModel {
    pub fn n_features(&self) -> usize {
        self.weights.ncols()
    }

    pub fn scores(&self, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if features.ncols() != self.n_features() {
            return Err(Error::Layout(format!(
                "{} features given to a model trained on {}",
                features.ncols(),
                self.n_features()
            )));
        }
        Ok(features.dot(&self.weights.t()) + &self.intercepts.view().insert_axis(Axis(0)))
    }

    pub fn predict(&self, features: ArrayView2<'_, f64>) -> Result<Vec<Class>> {
        let s = self.scores(features)?;
        Ok(s.axis_iter(Axis(0)).map(|row| self.classes[argmax(row.iter().copied())]).collect())
    }

    /// Class for a single feature vector, with a fixed accumulation order
    /// so streaming and batch callers agree bit for bit.
    pub fn predict_one(&self, features: &[f64]) -> Result<Class> {
        if features.len() != self.n_features() {
            return Err(Error::Layout(format!(
                "{} features given to a model trained on {}",
                features.len(),
                self.n_features()
            )));
        }
        let mut best = (0, f64::NEG_INFINITY);
        for j in 0..self.classes.len() {
            let mut s = self.intercepts[j];
            for (i, &x) in features.iter().enumerate() {
                s += self.weights[[j, i]] * x;
            }
            if s > best.1 {
                best = (j, s);
            }
        }
        Ok(self.classes[best.0])
    }

    /// Softmax of the scores.
    pub fn predict_proba(&self, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let mut s = self.scores(features)?;
        for mut row in s.axis_iter_mut(Axis(0)) {
            softmax_in_place(row.as_slice_mut().expect("contiguous row"));
        }
        Ok(s)
    }

    /// Probabilities laid out in `Class::ALL` column order, zero for classes
    /// the model never saw.
    pub fn predict_proba_all(&self, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let p = self.predict_proba(features)?;
        let mut out = Array2::zeros((p.nrows(), Class::ALL.len()));
        for (j, c) in self.classes.iter().enumerate() {
            out.column_mut(c.index()).assign(&p.column(j));
        }
        Ok(out)
    }
}

/// Index of the first maximum, so ties go to the lowest index.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for v in row.iter_mut() {
        *v = (*v - m).exp();
        z += *v;
    }
    for v in row.iter_mut() {
        *v /= z;
    }
}

/// Sorted distinct classes and, per trial, the position of its class.
pub(crate) fn encode_labels(labels: &[Class]) -> (Vec<Class>, Vec<usize>) {
    let mut classes: Vec<Class> = labels.to_vec();
    classes.sort();
    classes.dedup();
    let idx = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("present"))
        .collect();
    (classes, idx)
}

pub(crate) fn check_finite(features: ArrayView2<'_, f64>) -> Result<()> {
    if features.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Validation("non-finite feature value".into()))
    }
}
