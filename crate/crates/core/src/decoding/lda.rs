use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::model::{check_finite, encode_labels, LinearModel, ModelKind};
use crate::error::{Error, Result};
use crate::linalg::{from_na, to_na};
use crate::signal::Class;

/// Ridge added to the pooled covariance, relative to its mean eigenvalue.
pub const LDA_RIDGE: f64 = 1e-9;

/// Closed-form LDA with pooled within-class covariance:
/// `w_c = Σ⁻¹μ_c`, `b_c = −½ μ_cᵀΣ⁻¹μ_c + log π_c`.
pub fn lda_fit(features: ArrayView2<'_, f64>, labels: &[Class]) -> Result<LinearModel> {
    if features.nrows() != labels.len() {
        return Err(Error::Validation(format!("{} rows vs {} labels", features.nrows(), labels.len())));
    }
    check_finite(features)?;
    let (classes, idx) = encode_labels(labels);
    if classes.len() < 2 {
        return Err(Error::InsufficientData("LDA needs at least two classes".into()));
    }
    let (n, p) = features.dim();
    let k = classes.len();
    let mut means = Array2::<f64>::zeros((k, p));
    let mut counts = vec![0usize; k];
    for (row, &c) in features.axis_iter(Axis(0)).zip(&idx) {
        means.row_mut(c).scaled_add(1.0, &row);
        counts[c] += 1;
    }
    for (c, &m) in counts.iter().enumerate() {
        if m < 2 {
            return Err(Error::InsufficientData(format!("class {} has {m} sample(s)", classes[c])));
        }
        means.row_mut(c).mapv_inplace(|v| v / m as f64);
    }
    let mut centered = features.to_owned();
    for (mut row, &c) in centered.axis_iter_mut(Axis(0)).zip(&idx) {
        row -= &means.row(c);
    }
    let mut cov = centered.t().dot(&centered) / (n - k) as f64;
    let ridge = LDA_RIDGE * cov.diag().sum() / p as f64;
    let ridge = if ridge > 0.0 { ridge } else { LDA_RIDGE };
    cov.diag_mut().mapv_inplace(|v| v + ridge);
    let chol = to_na(&cov)
        .cholesky()
        .ok_or_else(|| Error::Numerical("pooled covariance not positive definite".into()))?;
    let mt = DMatrix::from_fn(p, k, |r, c| means[[c, r]]);
    let w = from_na(&chol.solve(&mt)).reversed_axes();
    let intercepts = Array1::from_shape_fn(k, |c| {
        -0.5 * w.row(c).dot(&means.row(c)) + (counts[c] as f64 / n as f64).ln()
    });
    Ok(LinearModel {
        kind: ModelKind::Lda,
        classes,
        weights: w,
        intercepts,
    })
}

pub fn lda_predict(model: &LinearModel, features: ArrayView2<'_, f64>) -> Result<Vec<Class>> {
    model.predict(features)
}
