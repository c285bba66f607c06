use std::time::Instant;

use log::info;

use crate::error::Result;
use crate::rng::{mix_seed, PortableRng};
use crate::scalar::Scalar;

use super::eval::{evaluate, EvalReport, LabeledImages};
use super::model::{ModelConfig, PseudoInverseModel, TargetEncoding};

const ORDER_TAG: u64 = 0x006f_7264_6572;
const WEIGHTS_TAG: u64 = 0x7765_6967_6874;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOptions {
    pub ridge: f64,
    pub targets: TargetEncoding,
    pub symmetrize_every: u64,
}

impl Default for TrialOptions {
    fn default() -> Self {
        let base = ModelConfig::new(0, 2, 0);
        TrialOptions {
            ridge: base.ridge,
            targets: base.targets,
            symmetrize_every: base.symmetrize_every,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub hidden: usize,
    pub trial: usize,
    pub seed: u64,
    pub report: EvalReport,
    pub train_seconds: f64,
    pub eval_seconds: f64,
}

/// The single training order shared by every size and trial of a run.
pub fn training_order(len: usize, master_seed: u64) -> Vec<usize> {
    PortableRng::new(mix_seed(master_seed, &[ORDER_TAG])).permutation(len)
}

/// Input-weight seed of a trial. Independent of the dataset, so the same
/// networks are used on every dataset of a run.
pub fn weight_seed(master_seed: u64, hidden: usize, trial: usize) -> u64 {
    mix_seed(master_seed, &[WEIGHTS_TAG, hidden as u64, trial as u64])
}

/// Streams the training set through the model once, in `order`.
pub fn train_model<T: Scalar>(
    model: &mut PseudoInverseModel<T>,
    data: &dyn LabeledImages,
    order: &[usize],
) -> Result<()> {
    let mut h = vec![T::zero(); model.dim()];
    for &i in order {
        model.feature_map().features_into(data.image(i), &mut h);
        model.train_sample(&h, data.label(i))?;
    }
    Ok(())
}

/// Trains and evaluates `trials` networks per hidden size. A hidden size of
/// 0 is the linear classifier, which has no random weights and runs once.
pub fn run_trials<T: Scalar>(
    train: &dyn LabeledImages,
    test: &dyn LabeledImages,
    classes: usize,
    hidden_sizes: &[usize],
    trials: usize,
    master_seed: u64,
    options: &TrialOptions,
) -> Result<Vec<TrialResult>> {
    let order = training_order(train.len(), master_seed);
    let mut results = Vec::new();
    for &hidden in hidden_sizes {
        let runs = if hidden == 0 { 1 } else { trials };
        for trial in 0..runs {
            let seed = if hidden == 0 { 0 } else { weight_seed(master_seed, hidden, trial) };
            let config = ModelConfig {
                hidden,
                classes,
                seed,
                ridge: options.ridge,
                targets: options.targets,
                symmetrize_every: options.symmetrize_every,
            };
            let mut model = PseudoInverseModel::<T>::new(&config)?;
            let started = Instant::now();
            train_model(&mut model, train, &order)?;
            let train_seconds = started.elapsed().as_secs_f64();
            let started = Instant::now();
            let report = evaluate(&model, test)?;
            let eval_seconds = started.elapsed().as_secs_f64();
            info!(
                "hidden={hidden} trial={trial} accuracy={:.4} ({train_seconds:.1}s train)",
                report.accuracy
            );
            results.push(TrialResult {
                hidden,
                trial,
                seed,
                report,
                train_seconds,
                eval_seconds,
            });
        }
    }
    Ok(results)
}
