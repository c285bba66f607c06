//! Assembly of the six dataset variants from converted glyphs.

mod emit;
mod merge;
mod split;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use emit::{emit_dataset, file_names, DatasetManifest, GlyphSource, PartitionCounts};
pub use merge::{apply_merge, MergeMap, MERGED_LETTERS};
pub use split::{apportion, carve_validation, pool_and_redraw};

/// Training/testing totals of the full-corpus (unbalanced) variants.
pub const FULL_TRAIN: u64 = 697_932;
pub const FULL_TEST: u64 = 116_323;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetName {
    ByClass,
    ByMerge,
    Balanced,
    Letters,
    Digits,
    Mnist,
}

impl DatasetName {
    pub const ALL: [DatasetName; 6] = [
        DatasetName::ByClass,
        DatasetName::ByMerge,
        DatasetName::Balanced,
        DatasetName::Letters,
        DatasetName::Digits,
        DatasetName::Mnist,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetName::ByClass => "byclass",
            DatasetName::ByMerge => "bymerge",
            DatasetName::Balanced => "balanced",
            DatasetName::Letters => "letters",
            DatasetName::Digits => "digits",
            DatasetName::Mnist => "mnist",
        }
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        DatasetName::ALL
            .into_iter()
            .find(|d| d.as_str() == key)
            .ok_or_else(|| Error::Invalid(format!("unknown dataset {s:?}")))
    }
}

/// Which class set the letters variant uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LettersClasses {
    /// Upper and lower case folded into 26 classes.
    #[default]
    Folded26,
    /// The 37 letter classes of the merged hierarchy.
    Merged37,
}

/// How many samples each class contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quota {
    /// Every sample, split per class in the full-corpus train:test ratio.
    Proportional,
    /// Fixed per-class counts.
    PerClass { train: usize, test: usize },
    /// The largest equal per-class count the smallest class allows, split
    /// `train_parts : test_parts`.
    LargestBalanced { train_parts: usize, test_parts: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: DatasetName,
    pub merge: MergeMap,
    pub quota: Quota,
    pub has_validation: bool,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn standard(name: DatasetName, seed: u64) -> Self {
        Self::with_letters(name, seed, LettersClasses::default())
    }

    pub fn with_letters(name: DatasetName, seed: u64, letters: LettersClasses) -> Self {
        let (merge, quota, has_validation) = match name {
            DatasetName::ByClass => (MergeMap::identity(), Quota::Proportional, false),
            DatasetName::ByMerge => (MergeMap::by_merge(), Quota::Proportional, false),
            DatasetName::Balanced => (
                MergeMap::by_merge(),
                Quota::PerClass { train: 2400, test: 400 },
                true,
            ),
            DatasetName::Letters => match letters {
                LettersClasses::Folded26 => (
                    MergeMap::letters(),
                    Quota::LargestBalanced { train_parts: 6, test_parts: 1 },
                    true,
                ),
                LettersClasses::Merged37 => (
                    MergeMap::merged_letters(),
                    Quota::PerClass { train: 2400, test: 400 },
                    true,
                ),
            },
            DatasetName::Digits => (
                MergeMap::digits(),
                Quota::PerClass { train: 24_000, test: 4_000 },
                true,
            ),
            DatasetName::Mnist => (
                MergeMap::digits(),
                Quota::PerClass { train: 6_000, test: 1_000 },
                true,
            ),
        };
        DatasetSpec {
            name,
            merge,
            quota,
            has_validation,
            seed,
        }
    }

    pub fn class_count(&self) -> usize {
        self.merge.class_count()
    }
}

/// One dataset member: an index into the glyph store and its dataset label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sample {
    pub index: usize,
    pub label: u16,
}

/// Train, validation and test partitions of one dataset. The validation
/// partition is the tail of the emitted training file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledSet {
    pub train: Vec<Sample>,
    pub validation: Vec<Sample>,
    pub test: Vec<Sample>,
    pub class_count: usize,
}

impl LabeledSet {
    /// The training file order: training head followed by the validation tail.
    pub fn full_train(&self) -> Vec<Sample> {
        self.train.iter().chain(&self.validation).copied().collect()
    }

    pub fn class_histogram(samples: &[Sample], class_count: usize) -> Vec<usize> {
        let mut counts = vec![0; class_count];
        for s in samples {
            counts[s.label as usize] += 1;
        }
        counts
    }
}
