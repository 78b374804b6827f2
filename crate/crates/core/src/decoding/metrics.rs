use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Class;

/// F1, confusion and accuracy for one set of predictions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub macro_f1: f64,
    pub per_class_f1: BTreeMap<String, f64>,
    /// Rows are true classes, columns predicted, both in `classes` order.
    pub confusion: Vec<Vec<usize>>,
    pub n_trials: usize,
    pub classes: Vec<Class>,
    pub accuracy: f64,
}

impl EvalReport {
    /// Confusion rows divided by their true-class counts; empty rows stay zero.
    pub fn confusion_normalized(&self) -> Vec<Vec<f64>> {
        self.confusion
            .iter()
            .map(|row| {
                let n: usize = row.iter().sum();
                row.iter()
                    .map(|&c| if n == 0 { 0.0 } else { c as f64 / n as f64 })
                    .collect()
            })
            .collect()
    }

    pub fn f1(&self, class: Class) -> Option<f64> {
        self.per_class_f1.get(class.name()).copied()
    }

    pub fn count(&self, truth: Class, predicted: Class) -> usize {
        match (self.position(truth), self.position(predicted)) {
            (Some(i), Some(j)) => self.confusion[i][j],
            _ => 0,
        }
    }

    fn position(&self, class: Class) -> Option<usize> {
        self.classes.iter().position(|&c| c == class)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `2·tp / (2·tp + fp + fn)`, which is 0 when the class never occurs in
/// either sequence.
pub fn f1_score(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

pub fn evaluate(y_true: &[Class], y_pred: &[Class], classes: &[Class]) -> Result<EvalReport> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Validation(format!(
            "{} true labels vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let pos = |c: Class| {
        classes
            .iter()
            .position(|&k| k == c)
            .ok_or_else(|| Error::Validation(format!("label {c} is not among the evaluated classes")))
    };
    let k = classes.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        confusion[pos(t)?][pos(p)?] += 1;
    }
    let mut per_class_f1 = BTreeMap::new();
    let mut sum = 0.0;
    for (i, c) in classes.iter().enumerate() {
        let tp = confusion[i][i];
        let fn_: usize = confusion[i].iter().sum::<usize>() - tp;
        let fp: usize = (0..k).map(|r| confusion[r][i]).sum::<usize>() - tp;
        let f = f1_score(tp, fp, fn_);
        sum += f;
        per_class_f1.insert(c.name().to_string(), f);
    }
    let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
    let n = y_true.len();
    Ok(EvalReport {
        macro_f1: if k == 0 { 0.0 } else { sum / k as f64 },
        per_class_f1,
        confusion,
        n_trials: n,
        classes: classes.to_vec(),
        accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
    })
}

/// Mean and (population) variance.
pub fn mean_var(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    (m, values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n)
}

/// Element-wise sum of confusion matrices of equal shape.
pub fn pooled_confusion<'a>(reports: impl IntoIterator<Item = &'a EvalReport>) -> Option<Vec<Vec<usize>>> {
    let mut acc: Option<Vec<Vec<usize>>> = None;
    for r in reports {
        match &mut acc {
            None => acc = Some(r.confusion.clone()),
            Some(a) => {
                for (ra, rb) in a.iter_mut().zip(&r.confusion) {
                    for (x, y) in ra.iter_mut().zip(rb) {
                        *x += y;
                    }
                }
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use Class::*;

    #[test]
    fn hand_computed_example() {
        let r = evaluate(&[Left, Right, Right, Rest], &[Left, Left, Right, Rest], &Class::ALL).unwrap();
        assert!((r.f1(Left).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.f1(Right).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.f1(Rest), Some(1.0));
        assert!((r.macro_f1 - 7.0 / 9.0).abs() < 1e-12);
        assert_eq!(r.confusion, vec![vec![1, 0, 0], vec![1, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn perfect_and_empty_class() {
        let y = [Left, Right, Left];
        let r = evaluate(&y, &y, &Class::ALL).unwrap();
        assert_eq!(r.f1(Rest), Some(0.0));
        assert_eq!(r.f1(Left), Some(1.0));
        let r2 = evaluate(&y, &y, &[Left, Right]).unwrap();
        assert_eq!(r2.macro_f1, 1.0);
        assert_eq!(r2.confusion, vec![vec![2, 0], vec![0, 1]]);
    }

    #[test]
    fn row_sums_and_unknown_labels() {
        let t = [Left, Left, Rest, Right, Rest];
        let p = [Rest, Left, Rest, Left, Right];
        let r = evaluate(&t, &p, &Class::ALL).unwrap();
        let sums: Vec<usize> = r.confusion.iter().map(|row| row.iter().sum()).collect();
        assert_eq!(sums, vec![2, 1, 2]);
        let norm = r.confusion_normalized();
        assert!((norm[0][2] - 0.5).abs() < 1e-12);
        assert!(matches!(evaluate(&t, &p, &[Left, Right]), Err(Error::Validation(_))));
        let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert!(json.get("macro_f1").is_some() && json.get("n_trials").is_some());
    }
}
