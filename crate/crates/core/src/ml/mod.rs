//! Imbalanced classification: SMOTE, random forests, repeated stratified
//! cross-validation, threshold sweeps and randomized-logistic feature weights.

mod cv;
mod forest;
mod logistic;
mod metrics;
mod smote;

pub use self::cv::{cross_validate, fit_with_smote, stratified_folds, threshold_sweep, ExperimentConfig, SweepMode, SweepPoint, SweepReport};
pub use self::forest::{train_forest, ForestConfig, ForestModel, Tree, TreeNode, MODEL_FORMAT_VERSION};
pub use self::logistic::{
    fit_l1_logistic, logistic_objective, logistic_smooth_gradient, randomized_logistic_weights, standardize, FeatureWeights, L1Fit, RandomizedLogisticConfig,
};
pub use self::metrics::{classification_metrics, Confusion, Metrics};
pub use self::smote::{smote, smote_with_parents, SyntheticPoint};
