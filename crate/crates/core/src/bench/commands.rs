use std::fmt;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forge::{emit_dataset, pool_and_redraw, DatasetManifest, DatasetName, DatasetSpec, GlyphSource};
use crate::ingest::{scan_corpus, Decoded, Layout, LedgerEntry};
use crate::opium::{run_trials, EvalReport, ImageSet, TrialOptions, TrialResult};
use crate::pipeline::{convert_stages, dump_stages, ConversionParams, Glyph28};
use crate::verify::{self, VerifyOptions, VerifyReport};

use super::config::RunConfig;
use super::store::{write_json, GlyphStore, StoreIndex, StoreWriter};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_MISSING_INPUT: i32 = 2;
pub const EXIT_BUILD_FAILURE: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

/// A command failure and the process exit code it maps to.
#[derive(Debug)]
pub struct CommandError {
    pub code: i32,
    pub error: Error,
}

impl CommandError {
    pub fn new(code: i32, error: Error) -> Self {
        CommandError { code, error }
    }
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for CommandError {}

impl From<Error> for CommandError {
    fn from(error: Error) -> Self {
        CommandError::new(EXIT_FAILURE, error)
    }
}

pub type CommandResult<T> = std::result::Result<T, CommandError>;

fn missing(what: impl Into<String>) -> CommandError {
    CommandError::new(EXIT_MISSING_INPUT, Error::Invalid(what.into()))
}

/// Caps rayon's global pool. Only the first call in a process takes effect.
pub fn configure_workers(workers: usize) {
    if workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
            warn!("worker count not applied: {e}");
        }
    }
}

// ---------------------------------------------------------------- convert

fn stem_for(source_id: &str) -> String {
    source_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Decodes and converts the corpus into the glyph store under `output_root`.
pub fn cmd_convert(config: &RunConfig) -> CommandResult<StoreIndex> {
    let root = &config.corpus_root;
    if !root.is_dir() {
        return Err(missing(format!("corpus not found at {}", root.display())));
    }
    let layout = match &config.layout {
        Some(path) if !path.is_file() => return Err(missing(format!("layout not found at {}", path.display()))),
        Some(path) => Layout::load(path)?,
        None => Layout::hex_directories(),
    };
    let index = scan_corpus(root, &layout)?;
    info!("{} files under {}", index.len(), root.display());

    let params = ConversionParams::default();
    let mut writer = StoreWriter::create(&config.store_dir())?;
    let dump_limit = if config.dump_stages.is_some() { config.dump_limit } else { 0 };
    let mut seen = 0usize;
    index.for_each_chunk(4096, |chunk| {
        let base = seen;
        seen += chunk.len();
        let converted: Vec<_> = chunk
            .into_par_iter()
            .enumerate()
            .map(|(i, decoded)| match decoded {
                Decoded::Skipped(entry) => Err(entry),
                Decoded::Glyph(raw) => {
                    let stages = convert_stages::<f64>(raw.pixels(), &params).and_then(|s| {
                        let glyph = Glyph28::from_slice(&s.pixels, raw.label)?;
                        Ok((glyph, s))
                    });
                    match stages {
                        Ok((glyph, s)) => {
                            let dump = (base + i < dump_limit).then(|| (raw.pixels().clone(), s, raw.source_id));
                            Ok((glyph, dump))
                        }
                        Err(e) => Err(LedgerEntry {
                            source_id: raw.source_id,
                            reason: e.to_string(),
                        }),
                    }
                }
            })
            .collect();
        for item in converted {
            match item {
                Ok((glyph, dump)) => {
                    writer.push(&glyph)?;
                    if let (Some((grid, stages, id)), Some(dir)) = (dump, &config.dump_stages) {
                        dump_stages(&grid, &stages, dir, &stem_for(&id))?;
                    }
                }
                Err(entry) => writer.skip(entry),
            }
        }
        Ok(())
    })?;
    let skipped = writer.ledger().len();
    let store = writer.finish(&config.to_json())?;
    info!("stored {} glyphs, {skipped} ledger entries", store.total);
    Ok(store)
}

// ---------------------------------------------------------------- build

/// Builds every configured dataset from the glyph store.
pub fn cmd_build(config: &RunConfig) -> CommandResult<Vec<DatasetManifest>> {
    let dir = config.store_dir();
    if !dir.join(super::store::INDEX_FILE).is_file() {
        return Err(missing(format!("no glyph store at {}; run convert first", dir.display())));
    }
    let store = GlyphStore::open(&dir)?;
    build_from(config, &store)
}

/// Builds the configured datasets from any glyph source.
pub fn build_from(config: &RunConfig, source: &dyn GlyphSource) -> CommandResult<Vec<DatasetManifest>> {
    let labels = source.labels();
    let mut manifests = Vec::new();
    for &name in &config.datasets {
        let spec = DatasetSpec::with_letters(name, config.master_seed, config.letters_classes);
        let set = pool_and_redraw(&labels, &spec).map_err(|e| match e {
            Error::Quota { .. } | Error::Partition(_) => CommandError::new(
                EXIT_BUILD_FAILURE,
                Error::Invalid(format!("dataset {name}: {e}")),
            ),
            other => other.into(),
        })?;
        let manifest = emit_dataset(&set, &spec, source, &config.output_root.join(name.as_str()), &config.to_json())?;
        info!(
            "{name}: {} train ({} validation), {} test",
            manifest.counts.train, manifest.counts.validation, manifest.counts.test
        );
        manifests.push(manifest);
    }
    Ok(manifests)
}

// ---------------------------------------------------------------- bench

/// Candidate file pairs for one dataset partition: the forge's own naming
/// and the published EMNIST naming, each optionally gzipped.
fn partition_files(root: &Path, name: DatasetName, part: &str) -> Vec<(PathBuf, PathBuf)> {
    let own = (
        root.join(name.as_str()).join(format!("{name}-{part}-images")),
        root.join(name.as_str()).join(format!("{name}-{part}-labels")),
    );
    let published = (
        root.join(format!("emnist-{name}-{part}-images-idx3-ubyte")),
        root.join(format!("emnist-{name}-{part}-labels-idx1-ubyte")),
    );
    let gz = |p: &PathBuf| PathBuf::from(format!("{}.gz", p.display()));
    vec![
        own.clone(),
        (gz(&own.0), gz(&own.1)),
        published.clone(),
        (gz(&published.0), gz(&published.1)),
    ]
}

fn find_partition(root: &Path, name: DatasetName, part: &str) -> Option<(PathBuf, PathBuf)> {
    partition_files(root, name, part)
        .into_iter()
        .find(|(i, l)| i.is_file() && l.is_file())
}

/// One dataset ready for benchmarking.
#[derive(Debug, Clone)]
pub struct BenchData {
    pub name: DatasetName,
    pub classes: Vec<String>,
    pub train: ImageSet,
    pub test: ImageSet,
}

/// Loads a dataset and checks it against the expected class count.
pub fn load_bench_data(config: &RunConfig, name: DatasetName) -> CommandResult<BenchData> {
    let root = config.data_root();
    let (Some(train_files), Some(test_files)) =
        (find_partition(root, name, "train"), find_partition(root, name, "test"))
    else {
        return Err(missing(format!("dataset {name} not found under {}", root.display())));
    };
    let spec = DatasetSpec::with_letters(name, config.master_seed, config.letters_classes);
    let classes = spec.merge.names().to_vec();
    let manifest_path = root.join(name.as_str()).join(format!("{name}-manifest.json"));
    if manifest_path.is_file() {
        let manifest = DatasetManifest::load(&manifest_path)?;
        if manifest.class_count != classes.len() {
            return Err(CommandError::new(
                EXIT_MISMATCH,
                Error::Mismatch(format!(
                    "dataset {name} was built with {} classes, the benchmark expects {}",
                    manifest.class_count,
                    classes.len()
                )),
            ));
        }
    }
    let mut train = ImageSet::load(&train_files.0, &train_files.1, config.transpose)?;
    let mut test = ImageSet::load(&test_files.0, &test_files.1, config.transpose)?;
    // the published letters files label a..z as 1..26
    let one_based = |s: &ImageSet| s.labels.iter().min() == Some(&1) && s.max_label() == Some(classes.len() as u8);
    if name == DatasetName::Letters && one_based(&train) && one_based(&test) {
        train.labels.iter_mut().for_each(|l| *l -= 1);
        test.labels.iter_mut().for_each(|l| *l -= 1);
    }
    for (part, set) in [("train", &train), ("test", &test)] {
        if (set.images.rows, set.images.cols) != (28, 28) {
            return Err(CommandError::new(
                EXIT_MISMATCH,
                Error::Mismatch(format!("{name} {part}: images are {}x{}", set.images.rows, set.images.cols)),
            ));
        }
        if let Some(max) = set.max_label().filter(|&m| m as usize >= classes.len()) {
            return Err(CommandError::new(
                EXIT_MISMATCH,
                Error::Mismatch(format!("{name} {part}: label {max} but only {} classes", classes.len())),
            ));
        }
    }
    Ok(BenchData {
        name,
        classes,
        train: train.truncated(config.train_limit.unwrap_or(0)),
        test: test.truncated(config.test_limit.unwrap_or(0)),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRow {
    pub dataset: DatasetName,
    pub classifier: &'static str,
    pub hidden: usize,
    pub trial: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub train_seconds: f64,
    pub eval_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfusionPair {
    pub a: String,
    pub b: String,
    pub count: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub dataset: DatasetName,
    pub classifier: &'static str,
    pub hidden: usize,
    pub trials: usize,
    pub mean: f64,
    pub stddev: f64,
    pub accuracies: Vec<f64>,
    pub train_seconds: f64,
    pub top_confusions: Vec<ConfusionPair>,
    #[serde(skip)]
    pub report: EvalReport,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BenchResults {
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<AggregateRow>,
}

fn classifier(hidden: usize) -> &'static str {
    if hidden == 0 {
        "linear"
    } else {
        "elm"
    }
}

/// Runs the configured trials on one loaded dataset.
pub fn bench_dataset(config: &RunConfig, data: &BenchData) -> CommandResult<BenchResults> {
    let options = TrialOptions {
        ridge: config.ridge,
        targets: config.targets,
        ..TrialOptions::default()
    };
    let trials: Vec<TrialResult> = run_trials::<f64>(
        &data.train,
        &data.test,
        data.classes.len(),
        &config.hidden_sizes,
        config.trials.max(1),
        config.master_seed,
        &options,
    )?;
    let mut out = BenchResults::default();
    for t in &trials {
        out.rows.push(TrialRow {
            dataset: data.name,
            classifier: classifier(t.hidden),
            hidden: t.hidden,
            trial: t.trial,
            seed: t.seed,
            accuracy: t.report.accuracy,
            train_seconds: t.train_seconds,
            eval_seconds: t.eval_seconds,
        });
    }
    let mut hidden_sizes = config.hidden_sizes.clone();
    hidden_sizes.dedup();
    for hidden in hidden_sizes {
        let group: Vec<&TrialResult> = trials.iter().filter(|t| t.hidden == hidden).collect();
        let reports: Vec<EvalReport> = group.iter().map(|t| t.report.clone()).collect();
        let report = EvalReport::aggregate(&reports)?;
        let top_confusions = report
            .top_confusion_pairs(5)
            .into_iter()
            .map(|(a, b, count)| ConfusionPair {
                a: data.classes[a].clone(),
                b: data.classes[b].clone(),
                count,
            })
            .collect();
        out.aggregates.push(AggregateRow {
            dataset: data.name,
            classifier: classifier(hidden),
            hidden,
            trials: group.len(),
            mean: report.mean,
            stddev: report.stddev,
            accuracies: report.trials.clone(),
            train_seconds: group.iter().map(|t| t.train_seconds).sum::<f64>() / group.len() as f64,
            top_confusions,
            report,
        });
    }
    Ok(out)
}

fn config_comment(config: &RunConfig) -> String {
    format!("# run_config {}\n", config.to_json())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io_at(path, e))
}

/// Writes results CSV/JSON, confusion matrices, top confusion pairs and
/// accuracy-vs-hidden-size plot data into `dir`.
pub fn write_results(config: &RunConfig, results: &BenchResults, classes: &[(DatasetName, Vec<String>)], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io_at(dir, e))?;
    let mut csv = config_comment(config);
    csv.push_str("kind,dataset,classifier,hidden,trial,seed,accuracy,stddev,train_seconds,eval_seconds\n");
    for r in &results.rows {
        csv.push_str(&format!(
            "trial,{},{},{},{},{},{:.6},,{:.3},{:.3}\n",
            r.dataset, r.classifier, r.hidden, r.trial, r.seed, r.accuracy, r.train_seconds, r.eval_seconds
        ));
    }
    for a in &results.aggregates {
        csv.push_str(&format!(
            "aggregate,{},{},{},{},,{:.6},{:.6},{:.3},\n",
            a.dataset, a.classifier, a.hidden, a.trials, a.mean, a.stddev, a.train_seconds
        ));
    }
    write_text(&dir.join("results.csv"), &csv)?;

    #[derive(Serialize)]
    struct Json<'a> {
        run_config: serde_json::Value,
        rows: &'a [TrialRow],
        aggregates: &'a [AggregateRow],
    }
    write_json(
        &dir.join("results.json"),
        &Json {
            run_config: config.to_json(),
            rows: &results.rows,
            aggregates: &results.aggregates,
        },
    )?;

    for a in &results.aggregates {
        let names = &classes
            .iter()
            .find(|(n, _)| *n == a.dataset)
            .expect("classes for every benchmarked dataset")
            .1;
        let stem = format!("{}-{}-h{}", a.dataset, a.classifier, a.hidden);
        let mut text = config_comment(config);
        text.push_str("true\\predicted");
        names.iter().for_each(|n| text.push_str(&format!(",{n}")));
        text.push('\n');
        for (name, row) in names.iter().zip(&a.report.confusion) {
            text.push_str(name);
            row.iter().for_each(|v| text.push_str(&format!(",{v}")));
            text.push('\n');
        }
        write_text(&dir.join(format!("confusion-{stem}.csv")), &text)?;

        let mut text = config_comment(config);
        text.push_str("a,b,count\n");
        for p in &a.top_confusions {
            text.push_str(&format!("{},{},{}\n", p.a, p.b, p.count));
        }
        write_text(&dir.join(format!("pairs-{stem}.csv")), &text)?;
    }

    for (name, _) in classes {
        let mut text = config_comment(config);
        text.push_str("x,y,err\n");
        for a in results.aggregates.iter().filter(|a| a.dataset == *name) {
            text.push_str(&format!("{},{:.4},{:.4}\n", a.hidden, 100.0 * a.mean, 100.0 * a.stddev));
        }
        write_text(&dir.join(format!("plot-{name}.dat")), &text)?;
    }
    Ok(())
}

/// Benchmarks every configured dataset and writes the reports.
pub fn cmd_bench(config: &RunConfig) -> CommandResult<BenchResults> {
    let mut all = BenchResults::default();
    let mut classes = Vec::new();
    for &name in &config.datasets {
        let data = load_bench_data(config, name)?;
        info!("{name}: {} train, {} test, {} classes", data.train.labels.len(), data.test.labels.len(), data.classes.len());
        let results = bench_dataset(config, &data)?;
        all.rows.extend(results.rows);
        all.aggregates.extend(results.aggregates);
        classes.push((name, data.classes));
    }
    write_results(config, &all, &classes, &config.results_dir())?;
    Ok(all)
}

// ---------------------------------------------------------------- verify, fetch

/// Runs the invariant suite and writes `verify-report.json`.
pub fn cmd_verify(config: &RunConfig) -> CommandResult<VerifyReport> {
    let scratch = tempfile::tempdir().map_err(Error::from)?;
    let mut options = VerifyOptions::new(scratch.path());
    options.seed = config.master_seed;
    options.mnist_dir = config.mnist_dir.clone();
    let report = verify::run_all(&options);
    fs::create_dir_all(&config.output_root).map_err(|e| Error::io_at(&config.output_root, e))?;
    #[derive(Serialize)]
    struct Json<'a> {
        run_config: serde_json::Value,
        passed: bool,
        checks: &'a [verify::Check],
    }
    write_json(
        &config.output_root.join("verify-report.json"),
        &Json {
            run_config: config.to_json(),
            passed: report.passed(),
            checks: &report.checks,
        },
    )?;
    Ok(report)
}

/// Downloads each configured URL into the data root, keeping its file name.
pub fn cmd_fetch(config: &RunConfig) -> CommandResult<Vec<PathBuf>> {
    if config.fetch_urls.is_empty() {
        return Err(missing("no fetch_urls configured"));
    }
    let root = config.data_root();
    fs::create_dir_all(root).map_err(|e| Error::io_at(root, e))?;
    let mut written = Vec::new();
    for url in &config.fetch_urls {
        let name = url
            .rsplit('/')
            .find(|s| !s.is_empty())
            .ok_or_else(|| Error::Config(format!("no file name in {url}")))?;
        let path = root.join(name);
        info!("fetching {url}");
        let mut response = ureq::get(url)
            .call()
            .map_err(|e| Error::Network(format!("{url}: {e}")))?;
        let mut out = File::create(&path).map_err(|e| Error::io_at(&path, e))?;
        io::copy(&mut response.body_mut().as_reader(), &mut out)
            .map_err(|e| Error::Network(format!("{url}: {e}")))?;
        out.flush().map_err(|e| Error::io_at(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
