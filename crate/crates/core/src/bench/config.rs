use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forge::{DatasetName, LettersClasses};
use crate::opium::TargetEncoding;

/// Everything a command needs. Loaded from a `key = value` file, then
/// overridden by command-line flags; serialized into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub corpus_root: PathBuf,
    pub output_root: PathBuf,
    /// Layout manifest for the corpus.
    pub layout: Option<PathBuf>,
    /// Where `bench` looks for IDX files; defaults to `output_root`.
    pub data_root: Option<PathBuf>,
    /// Directory of the original MNIST files for `verify`.
    pub mnist_dir: Option<PathBuf>,
    pub datasets: Vec<DatasetName>,
    /// 0 is the linear classifier.
    pub hidden_sizes: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    /// 0 uses every core.
    pub workers: usize,
    pub transpose: bool,
    pub dump_stages: Option<PathBuf>,
    /// Glyphs dumped when `dump_stages` is set.
    pub dump_limit: usize,
    pub letters_classes: LettersClasses,
    pub ridge: f64,
    pub targets: TargetEncoding,
    pub train_limit: Option<usize>,
    pub test_limit: Option<usize>,
    pub fetch_urls: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus_root: PathBuf::from("sd19"),
            output_root: PathBuf::from("out"),
            layout: None,
            data_root: None,
            mnist_dir: None,
            datasets: DatasetName::ALL.to_vec(),
            hidden_sizes: vec![0],
            trials: 1,
            master_seed: 2017,
            workers: 0,
            transpose: false,
            dump_stages: None,
            dump_limit: 16,
            letters_classes: LettersClasses::default(),
            ridge: 1e-3,
            targets: TargetEncoding::default(),
            train_limit: None,
            test_limit: None,
            fetch_urls: Vec::new(),
        }
    }
}

fn list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, T::Err> {
    value
        .split([',', ' '])
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn optional_count(value: &str) -> std::result::Result<Option<usize>, std::num::ParseIntError> {
    if value.is_empty() || value == "none" {
        Ok(None)
    } else {
        value.parse().map(Some)
    }
}

fn flag(value: &str) -> Option<bool> {
    match value.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Some(true),
        "0" | "false" | "no" | "off" => Some(false),
        _ => None,
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        let mut config = RunConfig::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    /// Applies every `key = value` line; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |why: String| Error::Config(format!("{key} = {value:?}: {why}"));
        match key {
            "corpus_root" => self.corpus_root = value.into(),
            "output_root" => self.output_root = value.into(),
            "layout" => self.layout = optional_path(value),
            "data_root" => self.data_root = optional_path(value),
            "mnist_dir" => self.mnist_dir = optional_path(value),
            "dump_stages" => self.dump_stages = optional_path(value),
            "datasets" => self.datasets = list(value).map_err(|e: Error| bad(e.to_string()))?,
            "hidden_sizes" | "hidden" => self.hidden_sizes = list(value).map_err(|e| bad(format!("{e}")))?,
            "trials" => self.trials = value.parse().map_err(|e| bad(format!("{e}")))?,
            "master_seed" | "seed" => self.master_seed = value.parse().map_err(|e| bad(format!("{e}")))?,
            "workers" => self.workers = value.parse().map_err(|e| bad(format!("{e}")))?,
            "dump_limit" => self.dump_limit = value.parse().map_err(|e| bad(format!("{e}")))?,
            "ridge" => self.ridge = value.parse().map_err(|e| bad(format!("{e}")))?,
            "train_limit" => self.train_limit = optional_count(value).map_err(|e| bad(format!("{e}")))?,
            "test_limit" => self.test_limit = optional_count(value).map_err(|e| bad(format!("{e}")))?,
            "transpose" => self.transpose = flag(value).ok_or_else(|| bad("expected a boolean".into()))?,
            "letters_classes" => {
                self.letters_classes = match value {
                    "26" | "folded26" => LettersClasses::Folded26,
                    "37" | "merged37" => LettersClasses::Merged37,
                    _ => return Err(bad("expected 26 or 37".into())),
                }
            }
            "targets" => {
                self.targets = match value {
                    "zero_one" | "01" => TargetEncoding::ZeroOne,
                    "plus_minus_one" | "pm1" => TargetEncoding::PlusMinusOne,
                    _ => return Err(bad("expected zero_one or plus_minus_one".into())),
                }
            }
            "fetch_urls" => self.fetch_urls = list(value).map_err(|e: std::convert::Infallible| bad(e.to_string()))?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ridge > 0.0 && self.ridge.is_finite()) {
            return Err(Error::Config("ridge must be positive".into()));
        }
        Ok(())
    }

    pub fn data_root(&self) -> &Path {
        self.data_root.as_deref().unwrap_or(&self.output_root)
    }

    pub fn store_dir(&self) -> PathBuf {
        self.output_root.join("store")
    }

    pub fn results_dir(&self) -> PathBuf {
        self.output_root.join("results")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let mut c = RunConfig::default();
        c.apply_text("# run\ndatasets = mnist, letters\nhidden = 0,100 1000\ntrials=3\ntranspose = yes\n")
            .unwrap();
        assert_eq!(c.datasets, vec![DatasetName::Mnist, DatasetName::Letters]);
        assert_eq!(c.hidden_sizes, vec![0, 100, 1000]);
        assert_eq!(c.trials, 3);
        assert!(c.transpose);
        c.set("seed", "9").unwrap();
        assert_eq!(c.master_seed, 9);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut c = RunConfig::default();
        assert!(c.apply_text("colour = red").is_err());
        assert!(c.apply_text("trials = many").is_err());
        assert!(c.apply_text("no equals sign").is_err());
        assert!(c.set("ridge", "0").is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = RunConfig::default();
        let back: RunConfig = serde_json::from_value(c.to_json()).unwrap();
        assert_eq!(back, c);
    }
}
