//! Multiclass shrinkage CSP with log band power and logistic regression,
//! scored by stratified cross-validation, then a rest threshold tuned on the
//! first tenth of a held-out set.
//!
//! cargo run --example csp_classifier

use mockbci::decoding::{
    apply_rest_threshold, evaluate, repeated_crossval, rest_threshold_calibrate, CspLogistic, Shrinkage,
    TrialCovariances,
};
use mockbci::signal::{ChannelInfo, ChannelKind, Class, Epochs};
use ndarray::Array3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Eight channels of white noise; LEFT boosts channel 5, RIGHT channel 2.
fn toy_epochs(n_per_class: usize, seed: u64) -> Epochs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<Class> = Class::ALL.iter().flat_map(|&c| std::iter::repeat(c).take(n_per_class)).collect();
    for i in (1..labels.len()).rev() {
        labels.swap(i, rng.gen_range(0..=i));
    }
    let (n_ch, ns) = (8, 256);
    let mut data = Array3::<f64>::zeros((labels.len(), n_ch, ns));
    for (k, c) in labels.iter().enumerate() {
        for ch in 0..n_ch {
            let gain = match (c, ch) {
                (Class::Left, 5) | (Class::Right, 2) => 1.8,
                _ => 1.0,
            };
            for i in 0..ns {
                let z: f64 = StandardNormal.sample(&mut rng);
                data[[k, ch, i]] = 1e-6 * gain * z;
            }
        }
    }
    Epochs {
        data,
        onsets: (0..labels.len()).map(|k| 8.0 * k as f64).collect(),
        labels,
        tmin: 0.0,
        tmax: 1.0,
        fs: 256.0,
        channels: (0..n_ch).map(|i| ChannelInfo::new(format!("E{i}"), ChannelKind::Eeg)).collect(),
    }
}

fn main() -> mockbci::Result<()> {
    let train = toy_epochs(30, 1);
    let cache = TrialCovariances::from_epochs(&train)?;
    let pipe = CspLogistic {
        cache: &cache,
        labels: &train.labels,
        n_filters: 6,
        shrinkage: Shrinkage::Auto,
        l2: 1.0,
    };
    let cv = repeated_crossval(&pipe, &train.labels, 5, 5, 0)?;
    println!("5x5 CV macro-F1 {:.3} (var {:.4})", cv.mean_macro_f1, cv.var_macro_f1);

    let model = pipe.fit_all()?;
    let test = toy_epochs(30, 2);
    let test_cache = TrialCovariances::from_epochs(&test)?;
    let all: Vec<usize> = (0..test.n_trials()).collect();
    let proba = model.predict_proba(&test_cache, &all)?;
    let th = rest_threshold_calibrate(proba.view(), &test.labels, 0.1)?;
    let rest = th.n_calibration;
    let pred = apply_rest_threshold(proba.slice(ndarray::s![rest.., ..]), th.theta);
    let report = evaluate(&test.labels[rest..], &pred, &Class::ALL)?;
    println!("held-out: θ = {:.2}, macro-F1 {:.3}", th.theta, report.macro_f1);
    println!("confusion (rows LEFT, RIGHT, REST): {:?}", report.confusion);
    Ok(())
}
