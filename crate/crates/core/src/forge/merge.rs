use serde::{Deserialize, Serialize};

use crate::class_code::{ClassCode, NUM_CLASSES};

/// Letters whose upper- and lowercase forms share a class in the merged hierarchy.
pub const MERGED_LETTERS: [char; 15] = [
    'C', 'I', 'J', 'K', 'L', 'M', 'O', 'P', 'S', 'U', 'V', 'W', 'X', 'Y', 'Z',
];

/// Maps source classes onto dataset class indices. Classes mapped to `None`
/// are excluded from the dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeMap {
    mapping: Vec<Option<u16>>,
    /// Display name of each target class.
    names: Vec<String>,
}

impl MergeMap {
    fn build(targets: impl Fn(ClassCode) -> Option<String>) -> Self {
        let mut names: Vec<String> = Vec::new();
        let mapping = ClassCode::all()
            .map(|code| {
                let name = targets(code)?;
                let idx = match names.iter().position(|n| *n == name) {
                    Some(i) => i,
                    None => {
                        names.push(name);
                        names.len() - 1
                    }
                };
                Some(idx as u16)
            })
            .collect();
        MergeMap { mapping, names }
    }

    /// All 62 classes, unchanged.
    pub fn identity() -> Self {
        Self::build(|c| Some(c.character().to_string()))
    }

    /// 47 classes: digits, 26 uppercase, then the 11 lowercase letters whose
    /// shapes differ from their capitals (a b d e f g h n q r t).
    pub fn by_merge() -> Self {
        Self::build(|c| {
            let ch = c.character();
            if c.is_lower() && MERGED_LETTERS.contains(&ch.to_ascii_uppercase()) {
                Some(ch.to_ascii_uppercase().to_string())
            } else {
                Some(ch.to_string())
            }
        })
    }

    pub fn digits() -> Self {
        Self::build(|c| c.is_digit().then(|| c.character().to_string()))
    }

    /// 26 classes, one per letter regardless of case. Index 0 is `A`.
    pub fn letters() -> Self {
        Self::build(|c| (!c.is_digit()).then(|| c.character().to_ascii_uppercase().to_string()))
    }

    /// The 37 letter classes of the merged hierarchy, reindexed from 0.
    pub fn merged_letters() -> Self {
        let merged = Self::by_merge();
        Self::build(|c| {
            (!c.is_digit()).then(|| merged.names[merged.apply(c).unwrap()].clone())
        })
    }

    pub fn class_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Target index for a source class, or `None` if the class is excluded.
    pub fn apply(&self, label: ClassCode) -> Option<usize> {
        self.mapping[label.index()].map(usize::from)
    }

    /// The lowest source class mapped to `index`.
    pub fn representative(&self, index: usize) -> Option<ClassCode> {
        ClassCode::all().find(|&c| self.apply(c) == Some(index))
    }

    /// Source classes folded into `index`.
    pub fn sources(&self, index: usize) -> Vec<ClassCode> {
        ClassCode::all().filter(|&c| self.apply(c) == Some(index)).collect()
    }

    pub fn covers_all_sources(&self) -> bool {
        self.mapping.len() == NUM_CLASSES && self.mapping.iter().all(Option::is_some)
    }
}

/// Maps a label through `merge`. Total for the identity and merged maps.
pub fn apply_merge(label: ClassCode, merge: &MergeMap) -> Option<usize> {
    merge.apply(label)
}
