use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, mean_var, EvalReport};
use crate::error::{Error, Result};
use crate::signal::Class;

/// Something that can be trained on one subset of trials and predict another.
/// Implementors own (or borrow) the trial data; only indices cross this API.
pub trait Pipeline {
    fn fit_predict(&self, train: &[usize], test: &[usize]) -> Result<Vec<Class>>;
}

impl<F> Pipeline for F
where
    F: Fn(&[usize], &[usize]) -> Result<Vec<Class>>,
{
    fn fit_predict(&self, train: &[usize], test: &[usize]) -> Result<Vec<Class>> {
        self(train, test)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossValResult {
    /// Out-of-fold prediction per trial.
    pub predictions: Vec<Class>,
    /// Fold each trial was held out in.
    pub folds: Vec<usize>,
    pub report: EvalReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatedCrossVal {
    pub runs: Vec<CrossValResult>,
    pub mean_macro_f1: f64,
    pub var_macro_f1: f64,
}

/// Stratified fold assignment: each class is shuffled, then dealt
/// round-robin, continuing where the previous class stopped.
pub fn stratified_folds(labels: &[Class], k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Folds(format!("k = {k}, need at least 2")));
    }
    let mut classes: Vec<Class> = labels.to_vec();
    classes.sort();
    classes.dedup();
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for c in classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if members.len() < k {
            return Err(Error::Folds(format!("k = {k} exceeds the {} trial(s) of class {c}", members.len())));
        }
        members.shuffle(rng);
        for i in members {
            folds[i] = next % k;
            next += 1;
        }
    }
    Ok(folds)
}

pub fn crossval<P: Pipeline + ?Sized>(pipeline: &P, labels: &[Class], k: usize, seed: u64) -> Result<CrossValResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    crossval_with_rng(pipeline, labels, k, &mut rng)
}

fn crossval_with_rng<P: Pipeline + ?Sized>(
    pipeline: &P,
    labels: &[Class],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<CrossValResult> {
    let folds = stratified_folds(labels, k, rng)?;
    let mut predictions: Vec<Option<Class>> = vec![None; labels.len()];
    for f in 0..k {
        let train: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] != f).collect();
        let test: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] == f).collect();
        let pred = pipeline.fit_predict(&train, &test)?;
        if pred.len() != test.len() {
            return Err(Error::Validation(format!(
                "pipeline returned {} predictions for {} trials",
                pred.len(),
                test.len()
            )));
        }
        for (&i, p) in test.iter().zip(pred) {
            predictions[i] = Some(p);
        }
    }
    let predictions: Vec<Class> = predictions.into_iter().map(|p| p.expect("every trial is tested once")).collect();
    let mut classes: Vec<Class> = labels.to_vec();
    classes.sort();
    classes.dedup();
    let report = evaluate(labels, &predictions, &classes)?;
    Ok(CrossValResult {
        predictions,
        folds,
        report,
    })
}

/// `repeats` independent k-fold runs; repeat `r` uses RNG stream `r`.
pub fn repeated_crossval<P: Pipeline + ?Sized>(
    pipeline: &P,
    labels: &[Class],
    k: usize,
    repeats: usize,
    seed: u64,
) -> Result<RepeatedCrossVal> {
    let mut runs = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        runs.push(crossval_with_rng(pipeline, labels, k, &mut rng)?);
    }
    let f1s: Vec<f64> = runs.iter().map(|r| r.report.macro_f1).collect();
    let (mean_macro_f1, var_macro_f1) = mean_var(&f1s);
    Ok(RepeatedCrossVal {
        runs,
        mean_macro_f1,
        var_macro_f1,
    })
}
