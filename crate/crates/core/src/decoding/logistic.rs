use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::model::{check_finite, encode_labels, softmax_in_place, LinearModel, ModelKind};
use crate::error::{Error, Result};
use crate::signal::Class;

pub const DEFAULT_L2: f64 = 1.0;
const GRAD_TOL: f64 = 1e-6;
const MAX_NEWTON: usize = 200;

/// Multinomial log-likelihood with an L2 penalty on the weights (intercepts
/// unpenalized). Parameters are flattened per class as `[w_c…, b_c]`.
pub struct LogisticObjective<'a> {
    x: ArrayView2<'a, f64>,
    y: &'a [usize],
    n_classes: usize,
    l2: f64,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(x: ArrayView2<'a, f64>, y: &'a [usize], n_classes: usize, l2: f64) -> Self {
        Self { x, y, n_classes, l2 }
    }

    pub fn dim(&self) -> usize {
        self.n_classes * (self.x.ncols() + 1)
    }

    fn probabilities(&self, theta: &[f64]) -> Array2<f64> {
        let (n, p) = self.x.dim();
        let k = self.n_classes;
        let mut s = Array2::<f64>::zeros((n, k));
        for c in 0..k {
            let blk = &theta[c * (p + 1)..(c + 1) * (p + 1)];
            let w = ndarray::ArrayView1::from(&blk[..p]);
            let col = self.x.dot(&w) + blk[p];
            s.column_mut(c).assign(&col);
        }
        s
    }

    /// Loss and gradient at `theta`.
    pub fn loss_grad(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let p = self.x.ncols();
        let mut probs = self.probabilities(theta);
        let mut loss = 0.0;
        for (mut row, &yi) in probs.axis_iter_mut(Axis(0)).zip(self.y) {
            let r = row.as_slice_mut().expect("contiguous");
            let m = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + r.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            loss += lse - r[yi];
            softmax_in_place(r);
        }
        let mut grad = vec![0.0; self.dim()];
        for (i, (row, &yi)) in probs.axis_iter(Axis(0)).zip(self.y).enumerate() {
            let xi = self.x.row(i);
            for c in 0..self.n_classes {
                let r = row[c] - if c == yi { 1.0 } else { 0.0 };
                let off = c * (p + 1);
                for j in 0..p {
                    grad[off + j] += r * xi[j];
                }
                grad[off + p] += r;
            }
        }
        for c in 0..self.n_classes {
            let off = c * (p + 1);
            for j in 0..p {
                loss += 0.5 * self.l2 * theta[off + j] * theta[off + j];
                grad[off + j] += self.l2 * theta[off + j];
            }
        }
        (loss, grad)
    }

    fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        let (n, p) = self.x.dim();
        let k = self.n_classes;
        let d = self.dim();
        let mut probs = self.probabilities(theta);
        for mut row in probs.axis_iter_mut(Axis(0)) {
            softmax_in_place(row.as_slice_mut().expect("contiguous"));
        }
        let mut h = DMatrix::<f64>::zeros(d, d);
        let mut xt = vec![0.0; p + 1];
        for i in 0..n {
            for j in 0..p {
                xt[j] = self.x[[i, j]];
            }
            xt[p] = 1.0;
            for c in 0..k {
                for e in c..k {
                    let wgt = probs[[i, c]] * (if c == e { 1.0 } else { 0.0 } - probs[[i, e]]);
                    if wgt == 0.0 {
                        continue;
                    }
                    for a in 0..=p {
                        for b in 0..=p {
                            h[(c * (p + 1) + a, e * (p + 1) + b)] += wgt * xt[a] * xt[b];
                        }
                    }
                }
            }
        }
        for c in 0..k {
            for e in (c + 1)..k {
                for a in 0..=p {
                    for b in 0..=p {
                        h[(e * (p + 1) + b, c * (p + 1) + a)] = h[(c * (p + 1) + a, e * (p + 1) + b)];
                    }
                }
            }
            for j in 0..p {
                h[(c * (p + 1) + j, c * (p + 1) + j)] += self.l2;
            }
        }
        h
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton with backtracking until the gradient norm drops below 1e-6.
pub fn logistic_fit(features: ArrayView2<'_, f64>, labels: &[Class], l2: f64) -> Result<LinearModel> {
    if features.nrows() != labels.len() {
        return Err(Error::Validation(format!("{} rows vs {} labels", features.nrows(), labels.len())));
    }
    check_finite(features)?;
    if !(l2 >= 0.0) || !l2.is_finite() {
        return Err(Error::Validation(format!("L2 strength {l2}")));
    }
    let (classes, idx) = encode_labels(labels);
    if classes.len() < 2 {
        return Err(Error::InsufficientData("logistic regression needs at least two classes".into()));
    }
    let p = features.ncols();
    let obj = LogisticObjective::new(features.view(), &idx, classes.len(), l2);
    let d = obj.dim();
    let mut theta = vec![0.0; d];
    let (mut loss, mut grad) = obj.loss_grad(&theta);
    let mut iters = 0;
    while norm(&grad) >= GRAD_TOL && iters < MAX_NEWTON {
        iters += 1;
        let h = obj.hessian(&theta);
        let g = DVector::from_column_slice(&grad);
        let scale = 1.0 + h.trace() / d as f64;
        let mut damping = 1e-10 * scale;
        let step = loop {
            let mut hd = h.clone();
            for i in 0..d {
                hd[(i, i)] += damping;
            }
            if let Some(ch) = hd.cholesky() {
                break -ch.solve(&g);
            }
            damping *= 100.0;
            if damping > 1e6 * scale {
                return Err(Error::Numerical("logistic Hessian could not be regularized".into()));
            }
        };
        let slope = g.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let (l, gr) = obj.loss_grad(&trial);
            if l <= loss + 1e-4 * t * slope || (l - loss).abs() <= 1e-15 * loss.abs().max(1.0) {
                theta = trial;
                loss = l;
                grad = gr;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm(&grad) >= GRAD_TOL {
        log::warn!("logistic regression stopped at gradient norm {:.3e}", norm(&grad));
    }
    let k = classes.len();
    let weights = Array2::from_shape_fn((k, p), |(c, j)| theta[c * (p + 1) + j]);
    let intercepts = Array1::from_shape_fn(k, |c| theta[c * (p + 1) + p]);
    Ok(LinearModel {
        kind: ModelKind::Logistic,
        classes,
        weights,
        intercepts,
    })
}

pub fn logistic_predict_proba(model: &LinearModel, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_finite(features)?;
    model.predict_proba(features)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn toy(seed: u64, n: usize, sep: f64) -> (Array2<f64>, Vec<Class>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Array2::<f64>::from_shape_fn((n, 3), |_| StandardNormal.sample(&mut rng));
        let y: Vec<Class> = (0..n).map(|i| Class::ALL[i % 3]).collect();
        for (i, c) in y.iter().enumerate() {
            x[[i, c.index()]] += sep;
        }
        (x, y)
    }

    #[test]
    fn zero_model_is_uniform() {
        let m = LinearModel {
            kind: ModelKind::Logistic,
            classes: Class::ALL.to_vec(),
            weights: Array2::zeros((3, 2)),
            intercepts: Array1::zeros(3),
        };
        let p = logistic_predict_proba(&m, ndarray::array![[1.0, -4.0]].view()).unwrap();
        for v in p.iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y) = toy(3, 30, 1.0);
        let idx: Vec<usize> = y.iter().map(|c| c.index()).collect();
        let obj = LogisticObjective::new(x.view(), &idx, 3, DEFAULT_L2);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let theta: Vec<f64> = (0..obj.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (_, g) = obj.loss_grad(&theta);
            let eps = 1e-5;
            for j in 0..obj.dim() {
                let mut a = theta.clone();
                let mut b = theta.clone();
                a[j] += eps;
                b[j] -= eps;
                let fd = (obj.loss_grad(&a).0 - obj.loss_grad(&b).0) / (2.0 * eps);
                assert!((fd - g[j]).abs() < 1e-6, "coord {j}: fd {fd} vs {}", g[j]);
            }
        }
    }

    #[test]
    fn fit_reaches_stationary_point_and_probabilities_sum_to_one() {
        let (x, y) = toy(5, 90, 1.5);
        let m = logistic_fit(x.view(), &y, DEFAULT_L2).unwrap();
        let idx: Vec<usize> = y.iter().map(|c| c.index()).collect();
        let obj = LogisticObjective::new(x.view(), &idx, 3, DEFAULT_L2);
        let mut theta = Vec::new();
        for c in 0..3 {
            theta.extend(m.weights.row(c).iter());
            theta.push(m.intercepts[c]);
        }
        assert!(norm(&obj.loss_grad(&theta).1) < 1e-6);
        let p = logistic_predict_proba(&m, x.view()).unwrap();
        for row in p.axis_iter(Axis(0)) {
            assert!((row.sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn separable_two_class() {
        let x = ndarray::array![[-2.0, 0.1], [-1.5, -0.3], [-1.0, 0.2], [1.0, 0.0], [1.2, 0.5], [2.0, -0.2]];
        let y = [Class::Left, Class::Left, Class::Left, Class::Rest, Class::Rest, Class::Rest];
        let m = logistic_fit(x.view(), &y, DEFAULT_L2).unwrap();
        assert_eq!(m.predict(x.view()).unwrap(), y);
    }

    #[test]
    fn non_finite_rejected() {
        let x = ndarray::array![[f64::NAN], [1.0]];
        assert!(matches!(
            logistic_fit(x.view(), &[Class::Left, Class::Right], 1.0),
            Err(Error::Validation(_))
        ));
    }
}
