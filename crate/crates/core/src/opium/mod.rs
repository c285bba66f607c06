//! Benchmark classifiers: a linear readout over the raw pixels and a
//! single-hidden-layer extreme learning machine, both trained by online
//! pseudo-inverse (rank-one recursive least-squares) updates.

mod eval;
mod features;
mod model;
mod serialize;
mod trials;

pub use eval::{confusion_matrix, evaluate, mean_stddev, EvalReport, ImageSet, LabeledImages};
pub use features::{logistic, FeatureKind, FeatureMap, INPUT_WITH_BIAS};
pub use model::{argmax, ModelConfig, PseudoInverseModel, TargetEncoding};
pub use serialize::{MODEL_MAGIC, MODEL_VERSION};
pub use trials::{run_trials, train_model, training_order, weight_seed, TrialOptions, TrialResult};

use crate::error::Result;
use crate::scalar::Scalar;

/// Fresh model: random input weights, zero output weights, `Θ = I/λ`.
pub fn init_model<T: Scalar>(hidden: usize, classes: usize, seed: u64) -> Result<PseudoInverseModel<T>> {
    PseudoInverseModel::new(&ModelConfig::new(hidden, classes, seed))
}
