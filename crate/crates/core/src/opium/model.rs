use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::features::FeatureMap;

/// Rows handled per parallel task in the rank-one update.
const ROW_BLOCK: usize = 64;
/// Below this feature dimension the update runs on one thread.
const PARALLEL_MIN_DIM: usize = 256;

/// Target coding for one-hot class vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetEncoding {
    /// 1 for the true class, 0 elsewhere.
    #[default]
    ZeroOne,
    /// 1 for the true class, -1 elsewhere.
    PlusMinusOne,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    /// Hidden neurons; 0 gives the linear classifier.
    pub hidden: usize,
    pub classes: usize,
    /// Seed for the random input weights.
    pub seed: u64,
    /// Ridge λ; the inverse-correlation matrix starts at `I / λ`.
    pub ridge: f64,
    pub targets: TargetEncoding,
    /// Re-symmetrize Θ after this many samples (0 = never).
    pub symmetrize_every: u64,
}

impl ModelConfig {
    pub fn new(hidden: usize, classes: usize, seed: u64) -> Self {
        ModelConfig {
            hidden,
            classes,
            seed,
            ridge: 1e-3,
            targets: TargetEncoding::ZeroOne,
            symmetrize_every: 10_000,
        }
    }
}

/// Output weights trained by rank-one recursive least-squares updates that
/// track the ridge-regularized pseudo-inverse solution exactly.
///
/// After `n` samples with features `h_i` and targets `y_i`, `weights` equals
/// `Y Hᵀ (H Hᵀ + λI)⁻¹` and `theta` equals `(H Hᵀ + λI)⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoInverseModel<T> {
    pub(crate) feature: FeatureMap<T>,
    pub(crate) classes: usize,
    /// `classes × dim`, row-major.
    pub(crate) weights: Vec<T>,
    /// `dim × dim`, row-major.
    pub(crate) theta: Vec<T>,
    pub(crate) ridge: f64,
    pub(crate) targets: TargetEncoding,
    pub(crate) symmetrize_every: u64,
    pub(crate) samples_seen: u64,
}

impl<T: Scalar> PseudoInverseModel<T> {
    pub fn new(config: &ModelConfig) -> Result<Self> {
        let feature = FeatureMap::random(config.hidden, config.seed);
        Self::with_features(feature, config)
    }

    /// Builds a model over an existing feature map. Trials that share input
    /// weights across datasets go through here.
    pub fn with_features(feature: FeatureMap<T>, config: &ModelConfig) -> Result<Self> {
        if config.classes < 2 {
            return Err(Error::Invalid(format!("need at least 2 classes, got {}", config.classes)));
        }
        if !(config.ridge > 0.0 && config.ridge.is_finite()) {
            return Err(Error::Invalid(format!("ridge must be positive, got {}", config.ridge)));
        }
        let dim = feature.dim();
        let mut theta = vec![T::zero(); dim * dim];
        let diag = T::from_f64_lossy(1.0 / config.ridge);
        for i in 0..dim {
            theta[i * dim + i] = diag;
        }
        Ok(PseudoInverseModel {
            feature,
            classes: config.classes,
            weights: vec![T::zero(); config.classes * dim],
            theta,
            ridge: config.ridge,
            targets: config.targets,
            symmetrize_every: config.symmetrize_every,
            samples_seen: 0,
        })
    }

    pub fn feature_map(&self) -> &FeatureMap<T> {
        &self.feature
    }

    pub fn dim(&self) -> usize {
        self.feature.dim()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn samples_seen(&self) -> u64 {
        self.samples_seen
    }

    pub fn targets(&self) -> TargetEncoding {
        self.targets
    }

    /// Output weights, `classes × dim` row-major.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Inverse-correlation matrix, `dim × dim` row-major.
    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    pub fn features(&self, pixels: &[u8]) -> Vec<T> {
        self.feature.features(pixels)
    }

    /// One-hot target for `label` under the model's encoding.
    pub fn target(&self, label: usize) -> Vec<T> {
        let off = match self.targets {
            TargetEncoding::ZeroOne => T::zero(),
            TargetEncoding::PlusMinusOne => -T::one(),
        };
        let mut y = vec![off; self.classes];
        y[label] = T::one();
        y
    }

    pub fn train_sample(&mut self, h: &[T], label: usize) -> Result<()> {
        if label >= self.classes {
            return Err(Error::Mismatch(format!(
                "label {label} out of range for a {}-class model",
                self.classes
            )));
        }
        let y = self.target(label);
        self.train_target(h, &y)
    }

    pub fn train_image(&mut self, pixels: &[u8], label: usize) -> Result<()> {
        let h = self.features(pixels);
        self.train_sample(&h, label)
    }

    /// Rank-one update with an arbitrary target vector:
    ///
    /// ```text
    /// k = Θh / (1 + hᵀΘh)
    /// W ← W + (y − Wh) kᵀ
    /// Θ ← Θ − k (hᵀΘ)
    /// ```
    pub fn train_target(&mut self, h: &[T], y: &[T]) -> Result<()> {
        let dim = self.dim();
        if h.len() != dim || y.len() != self.classes {
            return Err(Error::Invalid(format!(
                "feature/target lengths {}/{} do not match model {dim}/{}",
                h.len(),
                y.len(),
                self.classes
            )));
        }
        if h.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite feature or target value".into()));
        }
        let active: Vec<(usize, T)> = h
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v != T::zero())
            .map(|(i, &v)| (i, v))
            .collect();
        let parallel = dim >= PARALLEL_MIN_DIM;

        // p = Θh
        let row_dot = |row: &[T]| active.iter().fold(T::zero(), |acc, &(j, v)| acc + row[j] * v);
        let p: Vec<T> = if parallel {
            self.theta.par_chunks_exact(dim).map(row_dot).collect()
        } else {
            self.theta.chunks_exact(dim).map(row_dot).collect()
        };

        // u = hᵀΘ, accumulated over rows in ascending order for every column
        let mut u = vec![T::zero(); dim];
        let theta = &self.theta;
        let accumulate = |(block, chunk): (usize, &mut [T])| {
            let start = block * ROW_BLOCK;
            for &(i, v) in &active {
                let row = &theta[i * dim + start..i * dim + start + chunk.len()];
                for (acc, &t) in chunk.iter_mut().zip(row) {
                    *acc = *acc + v * t;
                }
            }
        };
        if parallel {
            u.par_chunks_mut(ROW_BLOCK).enumerate().for_each(accumulate);
        } else {
            u.chunks_mut(ROW_BLOCK).enumerate().for_each(accumulate);
        }

        let denom = T::one() + active.iter().fold(T::zero(), |acc, &(i, v)| acc + v * p[i]);
        if !denom.is_finite() || denom <= T::zero() {
            return Err(Error::Numeric(format!(
                "update denominator {denom} is not positive; inverse correlation lost definiteness"
            )));
        }
        let k: Vec<T> = p.iter().map(|&v| v / denom).collect();

        for (c, row) in self.weights.chunks_exact_mut(dim).enumerate() {
            let predicted = active.iter().fold(T::zero(), |acc, &(j, v)| acc + row[j] * v);
            let err = y[c] - predicted;
            if err != T::zero() {
                for (w, &kj) in row.iter_mut().zip(&k) {
                    *w = *w + err * kj;
                }
            }
        }

        let downdate = |(i, row): (usize, &mut [T])| {
            let ki = k[i];
            if ki != T::zero() {
                for (t, &uj) in row.iter_mut().zip(&u) {
                    *t = *t - ki * uj;
                }
            }
        };
        if parallel {
            self.theta.par_chunks_exact_mut(dim).enumerate().for_each(downdate);
        } else {
            self.theta.chunks_exact_mut(dim).enumerate().for_each(downdate);
        }

        self.samples_seen += 1;
        if self.symmetrize_every > 0 && self.samples_seen.is_multiple_of(self.symmetrize_every) {
            self.symmetrize();
        }
        Ok(())
    }

    /// Replaces Θ with `(Θ + Θᵀ) / 2`.
    pub fn symmetrize(&mut self) {
        let dim = self.dim();
        let half = T::from_f64_lossy(0.5);
        for i in 0..dim {
            for j in i + 1..dim {
                let avg = (self.theta[i * dim + j] + self.theta[j * dim + i]) * half;
                self.theta[i * dim + j] = avg;
                self.theta[j * dim + i] = avg;
            }
        }
    }

    /// Largest `|Θij − Θji|` relative to the largest `|Θij|`.
    pub fn theta_asymmetry(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let a = self.theta[i * dim + j].as_f64();
                scale = scale.max(a.abs());
                if j > i {
                    worst = worst.max((a - self.theta[j * dim + i].as_f64()).abs());
                }
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Output scores `W h`.
    pub fn scores(&self, h: &[T]) -> Vec<T> {
        self.weights
            .chunks_exact(self.dim())
            .map(|row| row.iter().zip(h).fold(T::zero(), |acc, (&w, &v)| acc + w * v))
            .collect()
    }

    /// Arg-max of the scores; ties go to the lowest class index.
    pub fn predict_features(&self, h: &[T]) -> usize {
        argmax(&self.scores(h))
    }

    pub fn predict(&self, pixels: &[u8]) -> usize {
        self.predict_features(&self.features(pixels))
    }
}

/// Index of the largest value, lowest index on ties.
pub fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
