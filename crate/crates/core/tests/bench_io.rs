use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use flate2::write::GzEncoder;
use flate2::Compression;

use emnist_core::bench::{build_from, load_bench_data, RunConfig, EXIT_MISMATCH};
use emnist_core::forge::{DatasetManifest, DatasetName};
use emnist_core::idx::{write_images, write_labels};
use emnist_core::verify::synth::{labels_with_counts, SyntheticStore};

fn gz(path: &Path, bytes: &[u8]) {
    let mut enc = GzEncoder::new(File::create(path).unwrap(), Compression::fast());
    enc.write_all(bytes).unwrap();
    enc.finish().unwrap();
}

/// Image `k` carries its label at pixel (row 0, col 1), stored transposed.
fn write_published(dir: &Path, name: &str, part: &str, labels: &[u8]) {
    let images: Vec<[u8; 784]> = labels
        .iter()
        .map(|&l| {
            let mut px = [0u8; 784];
            px[28] = l; // (row 1, col 0) on disk is (row 0, col 1) after transposing
            px
        })
        .collect();
    let mut img = Vec::new();
    write_images(&mut img, images).unwrap();
    gz(&dir.join(format!("emnist-{name}-{part}-images-idx3-ubyte.gz")), &img);
    let mut lab = Vec::new();
    write_labels(&mut lab, labels).unwrap();
    gz(&dir.join(format!("emnist-{name}-{part}-labels-idx1-ubyte.gz")), &lab);
}

#[test]
fn published_letters_are_transposed_and_zero_based() {
    let dir = tempfile::tempdir().unwrap();
    let labels: Vec<u8> = (0..52).map(|i| i % 26 + 1).collect();
    write_published(dir.path(), "letters", "train", &labels);
    write_published(dir.path(), "letters", "test", &labels[..26]);
    let config = RunConfig {
        data_root: Some(dir.path().to_owned()),
        transpose: true,
        ..RunConfig::default()
    };
    let data = load_bench_data(&config, DatasetName::Letters).unwrap();
    assert_eq!(data.classes.len(), 26);
    assert_eq!(data.train.labels.len(), 52);
    assert_eq!(data.train.labels[0], 0);
    assert_eq!(*data.train.labels.iter().max().unwrap(), 25);
    // pixel value still carries the one-based published label
    assert_eq!(data.train.images.image(3)[1], 4);
}

#[test]
fn manifest_class_count_mismatch_is_exit_4() {
    let data = tempfile::tempdir().unwrap();
    let labels = labels_with_counts(|c| if c.is_digit() { 7000 } else { 0 }, 1);
    let store = SyntheticStore { labels, seed: 1 };
    let config = RunConfig {
        datasets: vec![DatasetName::Mnist],
        output_root: data.path().to_owned(),
        ..RunConfig::default()
    };
    let manifests = build_from(&config, &store).unwrap();
    assert_eq!(manifests[0].counts.train, 60_000);
    assert!(load_bench_data(&config, DatasetName::Mnist).is_ok());

    let path = data.path().join("mnist/mnist-manifest.json");
    let mut manifest = DatasetManifest::load(&path).unwrap();
    assert_eq!(manifest.run_config["master_seed"], config.master_seed);
    manifest.class_count = 47;
    fs::write(&path, serde_json::to_string(&manifest).unwrap()).unwrap();
    let err = load_bench_data(&config, DatasetName::Mnist).unwrap_err();
    assert_eq!(err.code, EXIT_MISMATCH);
}

#[test]
fn rebuilding_with_the_same_seed_gives_identical_digests() {
    let labels = labels_with_counts(|c| if c.is_digit() { 28_000 } else { 3000 }, 4);
    let store = SyntheticStore { labels, seed: 4 };
    let mut digests = Vec::new();
    for _ in 0..2 {
        let out = tempfile::tempdir().unwrap();
        let config = RunConfig {
            datasets: vec![DatasetName::Balanced, DatasetName::Digits],
            output_root: out.path().to_owned(),
            ..RunConfig::default()
        };
        let manifests = build_from(&config, &store).unwrap();
        assert_eq!(manifests.len(), 2);
        assert!(out.path().join("balanced/balanced-train-images").is_file());
        assert!(out.path().join("digits/digits-test-labels").is_file());
        assert_eq!((manifests[0].counts.train, manifests[0].counts.test), (112_800, 18_800));
        digests.push(manifests.into_iter().map(|m| m.sha256).collect::<Vec<_>>());
    }
    assert_eq!(digests[0], digests[1]);
}
