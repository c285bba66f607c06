use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::class_code::ClassCode;
use crate::error::{Error, Result};
use crate::idx;
use crate::pipeline::{Glyph28, GLYPH_PIXELS};

use super::{DatasetSpec, LabeledSet, Quota, Sample};

/// Random-access store of converted glyphs addressed by index.
pub trait GlyphSource: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn label(&self, index: usize) -> ClassCode;

    fn pixels(&self, index: usize) -> [u8; GLYPH_PIXELS];

    fn labels(&self) -> Vec<ClassCode> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }
}

impl GlyphSource for [Glyph28] {
    fn len(&self) -> usize {
        <[Glyph28]>::len(self)
    }

    fn label(&self, index: usize) -> ClassCode {
        self[index].label
    }

    fn pixels(&self, index: usize) -> [u8; GLYPH_PIXELS] {
        *self[index].pixels()
    }
}

impl GlyphSource for Vec<Glyph28> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn label(&self, index: usize) -> ClassCode {
        self[index].label
    }

    fn pixels(&self, index: usize) -> [u8; GLYPH_PIXELS] {
        *self[index].pixels()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionCounts {
    /// Size of the training file, validation tail included.
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

/// JSON record written beside each dataset's IDX files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub class_count: usize,
    pub classes: Vec<String>,
    pub counts: PartitionCounts,
    /// Index in the training file where the validation tail starts.
    pub validation_offset: Option<usize>,
    pub seed: u64,
    pub quota: Quota,
    /// File name → lowercase hex SHA-256.
    pub sha256: BTreeMap<String, String>,
    pub run_config: serde_json::Value,
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

/// The four IDX file names and the manifest name for a dataset.
pub fn file_names(name: &str) -> [String; 5] {
    [
        format!("{name}-train-images"),
        format!("{name}-train-labels"),
        format!("{name}-test-images"),
        format!("{name}-test-labels"),
        format!("{name}-manifest.json"),
    ]
}

struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

fn write_hashed(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<u64>) -> Result<String> {
    let file = File::create(path).map_err(|e| Error::io_at(path, e))?;
    let mut writer = HashingWriter {
        inner: BufWriter::new(file),
        hasher: Sha256::new(),
    };
    body(&mut writer)?;
    writer.flush().map_err(|e| Error::io_at(path, e))?;
    Ok(hex::encode(writer.hasher.finalize()))
}

/// Writes the IDX image/label pairs for training (head then validation
/// tail) and testing, plus a JSON manifest with counts and SHA-256 digests.
pub fn emit_dataset(
    set: &LabeledSet,
    spec: &DatasetSpec,
    source: &dyn GlyphSource,
    out_dir: &Path,
    run_config: &serde_json::Value,
) -> Result<DatasetManifest> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io_at(out_dir, e))?;
    let name = spec.name.as_str();
    let [train_images, train_labels, test_images, test_labels, manifest_name] = file_names(name);
    let train = set.full_train();

    let mut sha256 = BTreeMap::new();
    for (images_name, labels_name, samples) in [
        (&train_images, &train_labels, &train),
        (&test_images, &test_labels, &set.test),
    ] {
        let digest = write_hashed(&out_dir.join(images_name), |w| {
            idx::write_images(w, samples.iter().map(|s: &Sample| source.pixels(s.index)))
        })?;
        sha256.insert(images_name.clone(), digest);
        let labels: Vec<u8> = samples.iter().map(|s| s.label as u8).collect();
        let digest = write_hashed(&out_dir.join(labels_name), |w| idx::write_labels(w, &labels))?;
        sha256.insert(labels_name.clone(), digest);
    }

    let manifest = DatasetManifest {
        name: name.to_owned(),
        class_count: set.class_count,
        classes: spec.merge.names().to_vec(),
        counts: PartitionCounts {
            train: train.len(),
            validation: set.validation.len(),
            test: set.test.len(),
        },
        validation_offset: spec.has_validation.then_some(set.train.len()),
        seed: spec.seed,
        quota: spec.quota,
        sha256,
        run_config: run_config.clone(),
    };
    let path = out_dir.join(manifest_name);
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io_at(&path, e))?;
    Ok(manifest)
}
