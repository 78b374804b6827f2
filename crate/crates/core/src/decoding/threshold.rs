use ndarray::{ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::metrics::evaluate;
use crate::error::{Error, Result};
use crate::signal::Class;

pub const THRESHOLD_GRID_POINTS: usize = 101;
pub const DEFAULT_SPLIT_FRACTION: f64 = 0.10;
pub const FALLBACK_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestThreshold {
    pub theta: f64,
    /// Leading trials used for calibration; evaluation starts here.
    pub n_calibration: usize,
    pub calibration_macro_f1: f64,
    /// True when the calibration split lacked a class and θ fell back to 0.5.
    pub degenerate: bool,
}

/// Number of leading trials in the calibration split: ⌈fraction · n⌉.
pub fn calibration_split_len(n: usize, fraction: f64) -> usize {
    (((fraction * n as f64) - 1e-9).ceil().max(0.0) as usize).min(n)
}

/// Probabilities have columns in `Class::ALL` order. REST iff p(REST) ≥ θ,
/// otherwise the likelier of LEFT and RIGHT (LEFT on ties).
pub fn apply_rest_threshold(proba: ArrayView2<'_, f64>, theta: f64) -> Vec<Class> {
    proba
        .axis_iter(Axis(0))
        .map(|p| {
            if p[Class::Rest.index()] >= theta {
                Class::Rest
            } else if p[Class::Right.index()] > p[Class::Left.index()] {
                Class::Right
            } else {
                Class::Left
            }
        })
        .collect()
}

/// Chooses θ on the grid {0, 0.01, …, 1} maximizing macro-F1 over the first
/// ⌈fraction·N⌉ trials; the lowest θ wins ties.
pub fn rest_threshold_calibrate(proba: ArrayView2<'_, f64>, labels: &[Class], split_fraction: f64) -> Result<RestThreshold> {
    if proba.nrows() != labels.len() || proba.ncols() != Class::ALL.len() {
        return Err(Error::Validation(format!(
            "probabilities {:?} vs {} labels",
            proba.dim(),
            labels.len()
        )));
    }
    if !labels.contains(&Class::Rest) {
        return Err(Error::Validation("no REST trials".into()));
    }
    let n_cal = calibration_split_len(labels.len(), split_fraction);
    let cal = proba.slice(ndarray::s![..n_cal, ..]);
    let y = &labels[..n_cal];
    let score = |theta: f64| -> Result<f64> {
        Ok(evaluate(y, &apply_rest_threshold(cal, theta), &Class::ALL)?.macro_f1)
    };
    if Class::ALL.iter().any(|c| !y.contains(c)) {
        log::warn!("degenerate rest-threshold split ({n_cal} trials lack a class); using θ = {FALLBACK_THRESHOLD}");
        return Ok(RestThreshold {
            theta: FALLBACK_THRESHOLD,
            n_calibration: n_cal,
            calibration_macro_f1: score(FALLBACK_THRESHOLD)?,
            degenerate: true,
        });
    }
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..THRESHOLD_GRID_POINTS {
        let theta = i as f64 / (THRESHOLD_GRID_POINTS - 1) as f64;
        let f = score(theta)?;
        if f > best.1 {
            best = (theta, f);
        }
    }
    Ok(RestThreshold {
        theta: best.0,
        n_calibration: n_cal,
        calibration_macro_f1: best.1,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one_hot(labels: &[Class]) -> Array2<f64> {
        Array2::from_shape_fn((labels.len(), 3), |(i, j)| if labels[i].index() == j { 0.9 } else { 0.05 })
    }

    #[test]
    fn split_is_first_ten_percent() {
        assert_eq!(calibration_split_len(100, 0.10), 10);
        assert_eq!(calibration_split_len(101, 0.10), 11);
        assert_eq!(calibration_split_len(9, 0.10), 1);
        assert_eq!(calibration_split_len(0, 0.10), 0);
    }

    #[test]
    fn perfect_probabilities_give_perfect_split() {
        let y: Vec<Class> = (0..100).map(|i| Class::ALL[i % 3]).collect();
        let t = rest_threshold_calibrate(one_hot(&y).view(), &y, 0.10).unwrap();
        assert_eq!(t.n_calibration, 10);
        assert_eq!(t.calibration_macro_f1, 1.0);
        assert!(!t.degenerate);
    }

    #[test]
    fn matches_exhaustive_grid_and_ignores_later_trials() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y: Vec<Class> = (0..200).map(|_| Class::ALL[rng.gen_range(0..3)]).collect();
        let mut p = Array2::<f64>::from_shape_fn((200, 3), |_| rng.gen_range(0.0..1.0));
        for mut row in p.axis_iter_mut(Axis(0)) {
            let s = row.sum();
            row /= s;
        }
        let t = rest_threshold_calibrate(p.view(), &y, 0.10).unwrap();
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0.0;
        for i in 0..=100 {
            let th = i as f64 * 0.01;
            let f = evaluate(&y[..20], &apply_rest_threshold(p.slice(ndarray::s![..20, ..]), th), &Class::ALL)
                .unwrap()
                .macro_f1;
            if f > best + 1e-15 {
                best = f;
                arg = th;
            }
        }
        assert!((t.theta - arg).abs() < 1e-12);
        assert_eq!(t.calibration_macro_f1, best);
        let mut q = p.clone();
        q.slice_mut(ndarray::s![20.., ..]).fill(1.0 / 3.0);
        assert_eq!(rest_threshold_calibrate(q.view(), &y, 0.10).unwrap(), t);
    }

    #[test]
    fn degenerate_split_falls_back() {
        let mut y = vec![Class::Left; 10];
        y.extend([Class::Right, Class::Rest].iter().cycle().take(90));
        let t = rest_threshold_calibrate(one_hot(&y).view(), &y, 0.10).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.theta, FALLBACK_THRESHOLD);
    }

    #[test]
    fn rule_at_boundary() {
        let p = ndarray::array![[0.2, 0.3, 0.5], [0.3, 0.3, 0.4]];
        assert_eq!(apply_rest_threshold(p.view(), 0.5), vec![Class::Rest, Class::Left]);
    }
}
