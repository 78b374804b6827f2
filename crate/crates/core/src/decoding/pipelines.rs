use ndarray::{Array2, Axis};

use super::covariance::{Shrinkage, TrialCovariances, TrialStats};
use super::crossval::Pipeline;
use super::csp::{csp_fit_trials, SpatialFilterBank};
use super::lda::lda_fit;
use super::logistic::logistic_fit;
use super::model::LinearModel;
use crate::error::Result;
use crate::signal::Class;

/// Shrinkage CSP → log band power → multinomial logistic regression.
pub struct CspLogistic<'a> {
    pub cache: &'a TrialCovariances,
    pub labels: &'a [Class],
    pub n_filters: usize,
    pub shrinkage: Shrinkage,
    pub l2: f64,
}

/// A fitted [`CspLogistic`].
#[derive(Clone, Debug)]
pub struct CspLogisticModel {
    pub bank: SpatialFilterBank,
    pub classifier: LinearModel,
}

impl CspLogisticModel {
    pub fn features(&self, cache: &TrialCovariances, trials: &[usize]) -> Array2<f64> {
        let stats: Vec<&TrialStats> = trials.iter().map(|&i| &cache.trials[i]).collect();
        self.bank.features_from_stats(&stats)
    }

    /// Probabilities in `Class::ALL` column order.
    pub fn predict_proba(&self, cache: &TrialCovariances, trials: &[usize]) -> Result<Array2<f64>> {
        if cache.channels != self.bank.channels {
            return Err(crate::Error::Layout("trial statistics use a different channel set".into()));
        }
        self.classifier.predict_proba_all(self.features(cache, trials).view())
    }

    pub fn predict(&self, cache: &TrialCovariances, trials: &[usize]) -> Result<Vec<Class>> {
        self.classifier.predict(self.features(cache, trials).view())
    }
}

impl CspLogistic<'_> {
    pub fn fit(&self, train: &[usize]) -> Result<CspLogisticModel> {
        let bank = csp_fit_trials(self.cache, self.labels, train, self.n_filters, self.shrinkage)?;
        let stats: Vec<&TrialStats> = train.iter().map(|&i| &self.cache.trials[i]).collect();
        let feats = bank.features_from_stats(&stats);
        let y: Vec<Class> = train.iter().map(|&i| self.labels[i]).collect();
        let classifier = logistic_fit(feats.view(), &y, self.l2)?;
        Ok(CspLogisticModel { bank, classifier })
    }

    pub fn fit_all(&self) -> Result<CspLogisticModel> {
        let all: Vec<usize> = (0..self.labels.len()).collect();
        self.fit(&all)
    }
}

impl Pipeline for CspLogistic<'_> {
    fn fit_predict(&self, train: &[usize], test: &[usize]) -> Result<Vec<Class>> {
        self.fit(train)?.predict(self.cache, test)
    }
}

/// LDA on a precomputed feature matrix (trials × features).
pub struct FeatureLda<'a> {
    pub features: &'a Array2<f64>,
    pub labels: &'a [Class],
}

impl Pipeline for FeatureLda<'_> {
    fn fit_predict(&self, train: &[usize], test: &[usize]) -> Result<Vec<Class>> {
        let x = self.features.select(Axis(0), train);
        let y: Vec<Class> = train.iter().map(|&i| self.labels[i]).collect();
        let model = lda_fit(x.view(), &y)?;
        model.predict(self.features.select(Axis(0), test).view())
    }
}
