//! Invariant suite run by the `verify` command: IDX fidelity, pseudo-inverse
//! oracle equivalence, conversion pipeline properties and dataset structure.
//! Needs neither network access nor a real corpus.

pub mod oracle;
pub mod synth;

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use flate2::write::GzEncoder;
use flate2::Compression;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forge::{emit_dataset, pool_and_redraw, DatasetName, DatasetSpec, LabeledSet, Quota};
use crate::idx::{self, IdxImages};
use crate::ingest::BitGrid;
use crate::opium::{ModelConfig, PseudoInverseModel};
use crate::pipeline::{
    bounding_box, convert_stages, downsample_bicubic, gaussian_blur, ConversionParams, FloatImage,
    GLYPH_SIDE,
};
use crate::rng::PortableRng;
use crate::Model;

use synth::{labels_with_counts, random_shift, stroke_glyph, translate, SyntheticStore};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub invariant: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Directory for temporary files.
    pub scratch: PathBuf,
    pub seed: u64,
    pub pipeline_glyphs: usize,
    pub rls_instances: usize,
    /// Directory holding published MNIST IDX files, when available.
    pub mnist_dir: Option<PathBuf>,
}

impl VerifyOptions {
    pub fn new(scratch: impl Into<PathBuf>) -> Self {
        VerifyOptions {
            scratch: scratch.into(),
            seed: 2017,
            pipeline_glyphs: 1000,
            rls_instances: 20,
            mnist_dir: None,
        }
    }
}

fn timed(module: &'static str, invariant: &'static str, f: impl FnOnce() -> Result<String>) -> Check {
    let started = Instant::now();
    let (passed, detail) = match f() {
        Ok(detail) => (true, detail),
        Err(e) => (false, e.to_string()),
    };
    Check {
        module,
        invariant,
        passed,
        detail,
        seconds: started.elapsed().as_secs_f64(),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Invalid(msg()))
    }
}

pub fn run_all(options: &VerifyOptions) -> VerifyReport {
    let mut checks = Vec::new();
    checks.extend(check_idx(options));
    checks.extend(check_rls(options));
    checks.extend(check_pipeline(options));
    checks.extend(check_forge(options));
    VerifyReport { checks }
}

// ---------------------------------------------------------------- idx

fn synthetic_images(count: usize, seed: u64) -> IdxImages {
    let mut rng = PortableRng::new(seed);
    let mut pixels = vec![0u8; count * 784];
    for chunk in pixels.chunks_mut(8) {
        chunk.copy_from_slice(&rng.next_u64().to_le_bytes()[..chunk.len()]);
    }
    IdxImages::new(28, 28, pixels).expect("whole images")
}

/// Known published file names of the original MNIST distribution.
pub const MNIST_FILES: [&str; 4] = [
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
];

fn find_gz_or_plain(dir: &Path, stem: &str) -> Option<PathBuf> {
    [stem.to_owned(), format!("{stem}.gz")]
        .into_iter()
        .map(|n| dir.join(n))
        .find(|p| p.exists())
}

fn round_trip_file(path: &Path) -> Result<(IdxImages, bool)> {
    let original = fs::read(path).map_err(|e| Error::io_at(path, e))?;
    let images = idx::read_images(original.as_slice(), false)?;
    let mut rewritten = Vec::new();
    images.write_to(&mut rewritten)?;
    let plain = if original.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        std::io::Read::read_to_end(&mut flate2::read::GzDecoder::new(original.as_slice()), &mut out)?;
        out
    } else {
        original
    };
    Ok((images, plain == rewritten))
}

pub fn check_idx(options: &VerifyOptions) -> Vec<Check> {
    let dir = options.scratch.join("idx");
    let mut checks = vec![timed("idx-codec", "synthetic 60,000/10,000 round trip is byte-identical", || {
        fs::create_dir_all(&dir).map_err(|e| Error::io_at(&dir, e))?;
        let mut details = Vec::new();
        for (name, count) in [("train", 60_000usize), ("test", 10_000)] {
            let images = synthetic_images(count, options.seed ^ count as u64);
            let labels: Vec<u8> = images.iter().map(|img| img[0] % 10).collect();
            let path = dir.join(format!("{name}-images"));
            images.write_to(File::create(&path).map_err(|e| Error::io_at(&path, e))?)?;
            let gz_path = dir.join(format!("{name}-images.gz"));
            let mut gz = GzEncoder::new(File::create(&gz_path).map_err(|e| Error::io_at(&gz_path, e))?, Compression::fast());
            images.write_to(&mut gz)?;
            gz.finish()?;
            let mut label_bytes = Vec::new();
            idx::write_labels(&mut label_bytes, &labels)?;
            for p in [&path, &gz_path] {
                let (back, identical) = round_trip_file(p)?;
                ensure(back.count() == count && back.rows == 28 && back.cols == 28, || {
                    format!("{}: read {} images of {}x{}", p.display(), back.count(), back.rows, back.cols)
                })?;
                ensure(identical && back == images, || format!("{} did not round-trip", p.display()))?;
            }
            ensure(idx::read_labels(label_bytes.as_slice())? == labels, || "labels did not round-trip".into())?;
            details.push(format!("{name}: {count}"));
        }
        Ok(details.join(", "))
    })];
    checks.push(timed("idx-codec", "corrupted fixtures raise FormatError", || {
        let mut good = Vec::new();
        idx::write_images(&mut good, vec![[0u8; 784]; 3])?;
        let mut bad_magic = good.clone();
        bad_magic[3] = 0x02;
        let truncated = &good[..good.len() - 10];
        for (what, bytes) in [("bad magic", bad_magic.as_slice()), ("truncated", truncated)] {
            match idx::read_images(bytes, false) {
                Err(Error::Format(_)) => {}
                other => return Err(Error::Invalid(format!("{what}: expected FormatError, got {other:?}"))),
            }
        }
        let mut labels = Vec::new();
        idx::write_labels(&mut labels, &[1, 2, 3])?;
        labels.truncate(9);
        ensure(matches!(idx::read_labels(labels.as_slice()), Err(Error::Format(_))), || {
            "truncated labels accepted".into()
        })?;
        Ok("bad magic, truncated images, truncated labels".into())
    }));
    if let Some(mnist) = &options.mnist_dir {
        checks.push(timed("idx-codec", "published MNIST files: 60,000/10,000 at 28x28", || {
            let mut details = Vec::new();
            for (stem, expected) in [(MNIST_FILES[0], 60_000), (MNIST_FILES[2], 10_000)] {
                let path = find_gz_or_plain(mnist, stem)
                    .ok_or_else(|| Error::Invalid(format!("{stem} not found in {}", mnist.display())))?;
                let (images, identical) = round_trip_file(&path)?;
                ensure(images.count() == expected && images.rows == 28 && images.cols == 28, || {
                    format!("{stem}: {} images of {}x{}", images.count(), images.rows, images.cols)
                })?;
                ensure(identical, || format!("{stem} did not round-trip"))?;
                details.push(format!("{stem}: {}", images.count()));
            }
            for (stem, expected) in [(MNIST_FILES[1], 60_000), (MNIST_FILES[3], 10_000)] {
                let path = find_gz_or_plain(mnist, stem)
                    .ok_or_else(|| Error::Invalid(format!("{stem} not found")))?;
                let labels = idx::read_labels(File::open(&path).map_err(|e| Error::io_at(&path, e))?)?;
                ensure(labels.len() == expected, || format!("{stem}: {} labels", labels.len()))?;
            }
            Ok(details.join(", "))
        }));
    }
    checks
}

// ---------------------------------------------------------------- rls

pub type Updater = fn(&mut Model, &[f64], &[f64]) -> Result<()>;

/// The production update.
pub fn exact_update(model: &mut Model, h: &[f64], y: &[f64]) -> Result<()> {
    model.train_target(h, y)
}

/// A deliberately wrong update whose gain is 1% too large. Used to show the
/// oracle comparison detects defects.
pub fn mutated_update(model: &mut Model, h: &[f64], y: &[f64]) -> Result<()> {
    let dim = model.dim();
    let theta = model.theta.clone();
    let p: Vec<f64> = theta.chunks_exact(dim).map(|r| r.iter().zip(h).map(|(a, b)| a * b).sum()).collect();
    let denom = 1.0 + h.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>();
    let k: Vec<f64> = p.iter().map(|v| 1.01 * v / denom).collect();
    let u: Vec<f64> = (0..dim).map(|j| (0..dim).map(|i| h[i] * theta[i * dim + j]).sum()).collect();
    for (c, row) in model.weights.chunks_exact_mut(dim).enumerate() {
        let err = y[c] - row.iter().zip(h).map(|(a, b)| a * b).sum::<f64>();
        row.iter_mut().zip(&k).for_each(|(w, kj)| *w += err * kj);
    }
    for (i, row) in model.theta.chunks_exact_mut(dim).enumerate() {
        row.iter_mut().zip(&u).for_each(|(t, uj)| *t -= k[i] * uj);
    }
    model.samples_seen += 1;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RlsInstance {
    pub dim: usize,
    pub samples: usize,
    pub classes: usize,
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl RlsInstance {
    pub fn random(dim: usize, samples: usize, classes: usize, seed: u64) -> Self {
        let mut rng = PortableRng::new(seed);
        let features = (0..samples)
            .map(|_| (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect())
            .collect();
        let targets = (0..samples)
            .map(|_| {
                let mut y = vec![0.0; classes];
                y[rng.below(classes as u64) as usize] = 1.0;
                y
            })
            .collect();
        RlsInstance {
            dim,
            samples,
            classes,
            features,
            targets,
        }
    }

    /// The `(D, N, C)` grid from {10, 50, 100} × {50, 500, 1000} × {2, 10},
    /// cycled until `count` instances exist.
    pub fn suite(count: usize, seed: u64) -> Vec<Self> {
        let mut grid = Vec::new();
        for &d in &[10, 50, 100] {
            for &n in &[50, 500, 1000] {
                for &c in &[2, 10] {
                    grid.push((d, n, c));
                }
            }
        }
        (0..count)
            .map(|i| {
                let (d, n, c) = grid[i % grid.len()];
                RlsInstance::random(d, n, c, seed.wrapping_add(i as u64))
            })
            .collect()
    }

    /// Streams the samples in `order` through a fresh model (λ = `ridge`) with `update`.
    pub fn train(&self, order: &[usize], ridge: f64, update: Updater) -> Result<Model> {
        let mut config = ModelConfig::new(self.dim, self.classes.max(2), 0);
        config.ridge = ridge;
        // features are supplied directly; only the dimension of the map matters
        let mut model = PseudoInverseModel::new(&config)?;
        for &i in order {
            update(&mut model, &self.features[i], &self.targets[i])?;
        }
        Ok(model)
    }
}

/// Relative Frobenius errors of `W` and `Θ` against the batch oracle, for
/// the natural order and a shuffled one: `(w_forward, w_shuffled, theta)`.
pub fn rls_oracle_errors(instance: &RlsInstance, ridge: f64, update: Updater, seed: u64) -> Result<(f64, f64, f64)> {
    let w_ref = oracle::ridge_weights(&instance.features, &instance.targets, ridge);
    let theta_ref = oracle::inverse_correlation(&instance.features, ridge);
    let forward: Vec<usize> = (0..instance.samples).collect();
    let shuffled = PortableRng::new(seed).permutation(instance.samples);
    let a = instance.train(&forward, ridge, update)?;
    let b = instance.train(&shuffled, ridge, update)?;
    Ok((
        oracle::relative_frobenius(a.weights(), &w_ref),
        oracle::relative_frobenius(b.weights(), &w_ref),
        oracle::relative_frobenius(a.theta(), &theta_ref),
    ))
}

pub const RLS_TOLERANCE: f64 = 1e-6;

pub fn check_rls(options: &VerifyOptions) -> Vec<Check> {
    let ridge = ModelConfig::new(0, 2, 0).ridge;
    let instances = RlsInstance::suite(options.rls_instances, options.seed);
    let mut checks = vec![timed("opium-learn", "online updates match the batch ridge solution (two orders)", || {
        let mut worst = 0.0f64;
        for (i, inst) in instances.iter().enumerate() {
            let (a, b, t) = rls_oracle_errors(inst, ridge, exact_update, options.seed ^ i as u64)?;
            ensure(a <= RLS_TOLERANCE && b <= RLS_TOLERANCE && t <= RLS_TOLERANCE, || {
                format!(
                    "instance {i} (D={}, N={}, C={}): W errors {a:.2e}/{b:.2e}, Θ error {t:.2e}",
                    inst.dim, inst.samples, inst.classes
                )
            })?;
            worst = worst.max(a).max(b).max(t);
        }
        Ok(format!("{} instances, worst relative error {worst:.2e}", instances.len()))
    })];
    checks.push(timed("opium-learn", "inverse correlation stays symmetric positive definite", || {
        let inst = &instances[instances.len().min(6) - 1];
        let model = inst.train(&(0..inst.samples).collect::<Vec<_>>(), ridge, exact_update)?;
        let asym = model.theta_asymmetry();
        ensure(asym <= 1e-6, || format!("asymmetry {asym:.2e}"))?;
        ensure(oracle::is_positive_definite(model.theta(), model.dim()), || "Θ not positive definite".into())?;
        Ok(format!("asymmetry {asym:.2e}"))
    }));
    checks.push(timed("opium-learn", "mutated update (gain ×1.01) is rejected by the oracle", || {
        let inst = RlsInstance::random(20, 200, 3, options.seed);
        let (a, _, _) = rls_oracle_errors(&inst, ridge, mutated_update, options.seed)?;
        ensure(a > RLS_TOLERANCE, || format!("mutation went unnoticed (error {a:.2e})"))?;
        Ok(format!("mutant error {a:.2e}"))
    }));
    checks
}

// ---------------------------------------------------------------- pipeline

pub const BLUR_TOLERANCE: f64 = 1e-9;
pub const IDENTITY_TOLERANCE: f64 = 1e-9;
pub const BICUBIC_TOLERANCE: f64 = 1e-6;
pub const BOUNDARY_MAX: u8 = 32;

fn boundary_max(pixels: &[u8]) -> u8 {
    let mut worst = 0;
    for i in 0..GLYPH_SIDE {
        for (x, y) in [(i, 0), (i, GLYPH_SIDE - 1), (0, i), (GLYPH_SIDE - 1, i)] {
            worst = worst.max(pixels[y * GLYPH_SIDE + x]);
        }
    }
    worst
}

pub fn check_pipeline(options: &VerifyOptions) -> Vec<Check> {
    let params = ConversionParams::default();
    let mut rng = PortableRng::new(options.seed);
    let glyphs: Vec<BitGrid> = (0..options.pipeline_glyphs).map(|_| stroke_glyph(&mut rng)).collect();
    let shifts: Vec<(isize, isize)> = glyphs.iter().map(|g| random_shift(g, &mut rng)).collect();

    let mut checks = vec![timed("glyph-pipeline", "outputs span [0, 255] with boundary pixels <= 32", || {
        let mut worst = 0u8;
        for (i, g) in glyphs.iter().enumerate() {
            let stages = convert_stages::<f64>(g, &params)?;
            let px = &stages.pixels;
            ensure(px.len() == 784, || format!("glyph {i}: {} pixels", px.len()))?;
            ensure(px.iter().min() == Some(&0) && px.iter().max() == Some(&255), || {
                format!("glyph {i}: range not [0, 255]")
            })?;
            let b = boundary_max(px);
            ensure(b <= BOUNDARY_MAX, || format!("glyph {i}: boundary pixel {b}"))?;
            worst = worst.max(b);
            // the padded frame keeps an empty border and the cropped region's shape
            let frame = &stages.framed;
            let inner = bounding_box(frame, 0.0)?;
            let side = frame.width();
            ensure(
                inner.x >= params.pad && inner.y >= params.pad
                    && inner.x + inner.w <= side - params.pad
                    && inner.y + inner.h <= side - params.pad,
                || format!("glyph {i}: frame border not empty"),
            )?;
            ensure((inner.w, inner.h) == (stages.roi.width(), stages.roi.height()), || {
                format!("glyph {i}: aspect ratio changed")
            })?;
        }
        Ok(format!("{} glyphs, max boundary pixel {worst}", glyphs.len()))
    })];
    checks.push(timed("glyph-pipeline", "translation equivariance is bit-exact", || {
        for (i, (g, &(dx, dy))) in glyphs.iter().zip(&shifts).enumerate() {
            let a = convert_stages::<f64>(g, &params)?.pixels;
            let b = convert_stages::<f64>(&translate(g, dx, dy), &params)?.pixels;
            ensure(a == b, || format!("glyph {i} shifted by ({dx},{dy}) changed"))?;
        }
        Ok(format!("{} glyphs", glyphs.len()))
    }));
    checks.push(timed("glyph-pipeline", "blur matches dense 2-D convolution within 1e-9", || {
        let mut worst = 0.0f64;
        let mut local = PortableRng::new(options.seed ^ 0xb1);
        let mut grids: Vec<BitGrid> = (0..200)
            .map(|_| {
                let mut g = BitGrid::new(16, 16);
                for y in 0..16 {
                    for x in 0..16 {
                        g.set(x, y, local.below(2) == 1);
                    }
                }
                g
            })
            .collect();
        grids.extend(glyphs.iter().take(20).cloned());
        for (i, g) in grids.iter().enumerate() {
            let fast = gaussian_blur(g, 1.0f64);
            let slow = oracle::dense_blur(g, 1.0);
            let err = fast.values().iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            ensure(err <= BLUR_TOLERANCE, || format!("grid {i}: error {err:.2e}"))?;
            worst = worst.max(err);
        }
        Ok(format!("{} grids, worst error {worst:.2e}", grids.len()))
    }));
    checks.push(timed("glyph-pipeline", "bicubic identity scale and direct-formula agreement", || {
        let mut local = PortableRng::new(options.seed ^ 0xb1c);
        let mut worst_identity = 0.0f64;
        for _ in 0..100 {
            let img = FloatImage::from_fn(28, 28, |_, _| local.unit_f64() * 3.0);
            let out = downsample_bicubic(&img, 28);
            let err = img.values().iter().zip(out.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst_identity = worst_identity.max(err);
        }
        ensure(worst_identity <= IDENTITY_TOLERANCE, || format!("identity error {worst_identity:.2e}"))?;
        let ramp = FloatImage::from_fn(56, 56, |x, y| 0.25 * x as f64 + 0.5 * y as f64 + 0.1 * (x * y) as f64 / 56.0);
        let mut worst_direct = 0.0f64;
        for side in [56usize, 100, 13] {
            let img = if side == 56 {
                ramp.clone()
            } else {
                FloatImage::from_fn(side, side, |_, _| local.unit_f64())
            };
            let fast = downsample_bicubic(&img, 28);
            let slow = oracle::direct_bicubic(&img, 28);
            let err = fast.values().iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst_direct = worst_direct.max(err);
        }
        ensure(worst_direct <= BICUBIC_TOLERANCE, || format!("direct-formula error {worst_direct:.2e}"))?;
        Ok(format!("identity {worst_identity:.1e}, direct {worst_direct:.1e}"))
    }));
    checks
}


// ---------------------------------------------------------------- forge

/// Per-class sizes of the synthetic corpus: 28,000 per digit and 2,900 per
/// letter, enough for every fixed-quota variant.
pub fn synthetic_class_size(c: crate::ClassCode) -> usize {
    if c.is_digit() {
        28_000
    } else {
        2_900
    }
}

fn balanced(samples: &[crate::forge::Sample], classes: usize, each: usize) -> bool {
    LabeledSet::class_histogram(samples, classes).iter().all(|&n| n == each)
}

pub fn check_forge(options: &VerifyOptions) -> Vec<Check> {
    let labels = labels_with_counts(synthetic_class_size, options.seed);
    let store = SyntheticStore { labels: labels.clone(), seed: options.seed };
    let mut checks = Vec::new();
    for (name, classes, train, test) in [
        (DatasetName::Balanced, 47usize, 2400usize, 400usize),
        (DatasetName::Digits, 10, 24_000, 4_000),
        (DatasetName::Mnist, 10, 6_000, 1_000),
    ] {
        checks.push(timed("dataset-forge", structure_label(name), || {
            let spec = DatasetSpec::standard(name, options.seed);
            let set = pool_and_redraw(&labels, &spec)?;
            let full = set.full_train();
            ensure(set.class_count == classes, || format!("{} classes", set.class_count))?;
            ensure(balanced(&full, classes, train), || "training counts not balanced".into())?;
            ensure(balanced(&set.test, classes, test), || "test counts not balanced".into())?;
            ensure(set.validation.len() == set.test.len(), || "validation size differs from test".into())?;
            ensure(balanced(&set.validation, classes, test), || "validation tail not balanced".into())?;
            ensure(full[set.train.len()..] == set.validation[..], || "validation is not the training tail".into())?;
            let mut seen = HashSet::new();
            ensure(full.iter().chain(&set.test).all(|s| seen.insert(s.index)), || "duplicate glyph".into())?;
            Ok(format!("{classes} x {train}/{test}, validation {}", set.validation.len()))
        }));
    }
    checks.push(timed("dataset-forge", "letters: 26 equal classes at 6:1; by_class keeps every glyph", || {
        let spec = DatasetSpec::standard(DatasetName::Letters, options.seed);
        let set = pool_and_redraw(&labels, &spec)?;
        let full = set.full_train();
        let per_test = set.test.len() / 26;
        ensure(set.class_count == 26 && balanced(&set.test, 26, per_test), || "letters test not balanced".into())?;
        ensure(balanced(&full, 26, 6 * per_test), || "letters train not 6x test".into())?;
        let spec = DatasetSpec::standard(DatasetName::ByClass, options.seed);
        let set = pool_and_redraw(&labels, &spec)?;
        let mut all: Vec<usize> = set.train.iter().chain(&set.test).map(|s| s.index).collect();
        all.sort_unstable();
        ensure(all == (0..labels.len()).collect::<Vec<_>>(), || "by_class is not a partition of the corpus".into())?;
        Ok(format!("letters 26 x {}/{per_test}; by_class {} glyphs", 6 * per_test, labels.len()))
    }));
    checks.push(timed("dataset-forge", "same seed gives identical digests", || {
        let mut digests = Vec::new();
        for (run, seed) in [(0, options.seed), (1, options.seed), (2, options.seed + 1)] {
            let dir = options.scratch.join(format!("forge-{run}"));
            let mut spec = DatasetSpec::standard(DatasetName::Mnist, seed);
            spec.quota = Quota::PerClass { train: 600, test: 100 };
            let set = pool_and_redraw(&labels, &spec)?;
            let manifest = emit_dataset(&set, &spec, &store, &dir, &serde_json::Value::Null)?;
            let images = idx::read_images(File::open(dir.join("mnist-train-images"))?, false)?;
            ensure(images.count() == manifest.counts.train, || "emitted count differs from manifest".into())?;
            digests.push(manifest.sha256);
            fs::remove_dir_all(&dir).map_err(|e| Error::io_at(&dir, e))?;
        }
        ensure(digests[0] == digests[1], || "same seed produced different files".into())?;
        ensure(digests[0]["mnist-train-images"] != digests[2]["mnist-train-images"], || {
            "different seeds produced the same training order".into()
        })?;
        Ok("3 emissions".into())
    }));
    checks
}

fn structure_label(name: DatasetName) -> &'static str {
    match name {
        DatasetName::Balanced => "balanced: 47 x 2400/400 with balanced validation tail",
        DatasetName::Digits => "digits: 10 x 24,000/4,000 with balanced validation tail",
        DatasetName::Mnist => "mnist: 10 x 6,000/1,000 with balanced validation tail",
        _ => "structure",
    }
}

/// Writes the report as one line per check.
pub fn write_report(report: &VerifyReport, mut out: impl Write) -> std::io::Result<()> {
    for c in &report.checks {
        writeln!(
            out,
            "{} [{}] {}: {} ({:.2}s)",
            if c.passed { "PASS" } else { "FAIL" },
            c.module,
            c.invariant,
            c.detail,
            c.seconds
        )?;
    }
    Ok(())
}
