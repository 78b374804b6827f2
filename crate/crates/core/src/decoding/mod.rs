//! Features, linear classifiers, CSP, cross-validation and evaluation.

pub mod covariance;
pub mod crossval;
pub mod csp;
pub mod features;
pub mod lda;
pub mod logistic;
pub mod metrics;
pub mod mi;
pub mod model;
pub mod pipelines;
pub mod threshold;

pub use covariance::{Shrinkage, TrialCovariances};
pub use crossval::{crossval, repeated_crossval, CrossValResult, Pipeline, RepeatedCrossVal};
pub use csp::{csp_fit_multiclass, csp_log_bandpower, SpatialFilterBank};
pub use features::emg_mean_power_features;
pub use lda::{lda_fit, lda_predict};
pub use logistic::{logistic_fit, logistic_predict_proba};
pub use metrics::{evaluate, EvalReport};
pub use mi::mi_order;
pub use model::{LinearModel, ModelKind};
pub use pipelines::{CspLogistic, CspLogisticModel, FeatureLda};
pub use threshold::{apply_rest_threshold, rest_threshold_calibrate, RestThreshold};
