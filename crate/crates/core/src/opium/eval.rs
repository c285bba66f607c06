use std::fs::File;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::idx::{self, IdxImages};
use crate::scalar::Scalar;

use super::model::PseudoInverseModel;

/// Indexed images with integer labels.
pub trait LabeledImages: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn image(&self, i: usize) -> &[u8];

    fn label(&self, i: usize) -> usize;
}

/// An IDX image file paired with its label file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSet {
    pub images: IdxImages,
    pub labels: Vec<u8>,
}

impl ImageSet {
    pub fn new(images: IdxImages, labels: Vec<u8>) -> Result<Self> {
        if images.count() != labels.len() {
            return Err(Error::Format(format!(
                "{} images but {} labels",
                images.count(),
                labels.len()
            )));
        }
        Ok(ImageSet { images, labels })
    }

    pub fn load(images: &Path, labels: &Path, transpose: bool) -> Result<Self> {
        let img = idx::read_images(File::open(images).map_err(|e| Error::io_at(images, e))?, transpose)?;
        let lab = idx::read_labels(File::open(labels).map_err(|e| Error::io_at(labels, e))?)?;
        Self::new(img, lab)
    }

    pub fn max_label(&self) -> Option<u8> {
        self.labels.iter().copied().max()
    }

    /// The first `n` samples (all of them when `n` is 0 or too large).
    pub fn truncated(&self, n: usize) -> ImageSet {
        if n == 0 || n >= self.labels.len() {
            return self.clone();
        }
        let per = self.images.rows * self.images.cols;
        ImageSet {
            images: IdxImages::new(
                self.images.rows,
                self.images.cols,
                self.images.pixels()[..n * per].to_vec(),
            )
            .expect("prefix of a valid stack is valid"),
            labels: self.labels[..n].to_vec(),
        }
    }
}

impl LabeledImages for ImageSet {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn image(&self, i: usize) -> &[u8] {
        self.images.image(i)
    }

    fn label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }
}

/// Accuracy, per-class accuracy and the confusion matrix of one or more
/// evaluations. `confusion[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    /// Diagonal over row sum; 0 for classes absent from the test set.
    pub per_class_accuracy: Vec<f64>,
    pub confusion: Vec<Vec<u64>>,
    /// Accuracy of each trial folded into this report.
    pub trials: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over trials (0 for a single trial).
    pub stddev: f64,
}

impl EvalReport {
    pub fn from_confusion(confusion: Vec<Vec<u64>>) -> Result<Self> {
        let total: u64 = confusion.iter().flatten().sum();
        if total == 0 {
            return Err(Error::Invalid("cannot report on an empty test partition".into()));
        }
        let correct: u64 = (0..confusion.len()).map(|i| confusion[i][i]).sum();
        let accuracy = correct as f64 / total as f64;
        let per_class_accuracy = confusion
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let n: u64 = row.iter().sum();
                if n == 0 {
                    0.0
                } else {
                    row[i] as f64 / n as f64
                }
            })
            .collect();
        Ok(EvalReport {
            accuracy,
            per_class_accuracy,
            confusion,
            trials: vec![accuracy],
            mean: accuracy,
            stddev: 0.0,
        })
    }

    /// Sums confusion matrices and summarizes the per-trial accuracies.
    pub fn aggregate(reports: &[EvalReport]) -> Result<Self> {
        let first = reports
            .first()
            .ok_or_else(|| Error::Invalid("no reports to aggregate".into()))?;
        let c = first.confusion.len();
        let mut confusion = vec![vec![0u64; c]; c];
        let mut trials = Vec::new();
        for r in reports {
            if r.confusion.len() != c {
                return Err(Error::Mismatch("reports disagree on class count".into()));
            }
            for (acc, row) in confusion.iter_mut().zip(&r.confusion) {
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += v;
                }
            }
            trials.extend_from_slice(&r.trials);
        }
        let mut out = Self::from_confusion(confusion)?;
        let (mean, stddev) = mean_stddev(&trials);
        out.trials = trials;
        out.mean = mean;
        out.stddev = stddev;
        Ok(out)
    }

    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    /// Unordered class pairs ranked by total confusions in both directions,
    /// most confused first (ties by lower indices).
    pub fn top_confusion_pairs(&self, n: usize) -> Vec<(usize, usize, u64)> {
        let c = self.confusion.len();
        let mut pairs = Vec::new();
        for a in 0..c {
            for b in a + 1..c {
                let count = self.confusion[a][b] + self.confusion[b][a];
                if count > 0 {
                    pairs.push((a, b, count));
                }
            }
        }
        pairs.sort_by(|x, y| y.2.cmp(&x.2).then((x.0, x.1).cmp(&(y.0, y.1))));
        pairs.truncate(n);
        pairs
    }
}

pub fn mean_stddev(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Tallies predictions into a confusion matrix.
pub fn confusion_matrix(classes: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Vec<Vec<u64>>> {
    let mut confusion = vec![vec![0u64; classes]; classes];
    for (truth, predicted) in pairs {
        if truth >= classes || predicted >= classes {
            return Err(Error::Mismatch(format!(
                "label {truth} or prediction {predicted} outside {classes} classes"
            )));
        }
        confusion[truth][predicted] += 1;
    }
    Ok(confusion)
}

/// Classifies every test sample (in parallel) and reports accuracy and confusions.
pub fn evaluate<T: Scalar>(model: &PseudoInverseModel<T>, test: &dyn LabeledImages) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::Invalid("cannot evaluate on an empty test partition".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..test.len())
        .into_par_iter()
        .map(|i| (test.label(i), model.predict(test.image(i))))
        .collect();
    EvalReport::from_confusion(confusion_matrix(model.classes(), pairs)?)
}
