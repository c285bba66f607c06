//! Discovery and decoding of source glyph scans laid out on disk by class.

mod decode;
mod layout;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::class_code::{ClassCode, NUM_CLASSES};
use crate::error::{Error, Result};

pub use decode::{
    decode_image, decode_raw, encode_png, encode_raw, BitGrid, DecodeError, RAW_PLANE_BYTES,
    SOURCE_SIDE,
};
pub use layout::{InkPolarity, Layout, LayoutRule, RuleAction};

/// File extensions treated as glyph images; everything else is ignored.
pub const GLYPH_EXTENSIONS: [&str; 3] = ["png", "raw", "bin"];

/// The source's suggested split for a glyph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionHint {
    CensusTrain,
    StudentTest,
    #[default]
    Unknown,
}

impl PartitionHint {
    pub fn as_byte(self) -> u8 {
        match self {
            PartitionHint::CensusTrain => 0,
            PartitionHint::StudentTest => 1,
            PartitionHint::Unknown => 2,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(PartitionHint::CensusTrain),
            1 => Some(PartitionHint::StudentTest),
            2 => Some(PartitionHint::Unknown),
            _ => None,
        }
    }
}

impl FromStr for PartitionHint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "census_train" => Ok(PartitionHint::CensusTrain),
            "student_test" => Ok(PartitionHint::StudentTest),
            "unknown" => Ok(PartitionHint::Unknown),
            other => Err(Error::Layout(format!("unknown partition {other:?}"))),
        }
    }
}

impl fmt::Display for PartitionHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartitionHint::CensusTrain => "census_train",
            PartitionHint::StudentTest => "student_test",
            PartitionHint::Unknown => "unknown",
        })
    }
}

/// A labeled 128×128 binary source scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawGlyph {
    pixels: BitGrid,
    pub label: ClassCode,
    pub partition_hint: PartitionHint,
    pub source_id: String,
}

impl RawGlyph {
    pub fn new(
        pixels: BitGrid,
        label: ClassCode,
        partition_hint: PartitionHint,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        if pixels.width() != SOURCE_SIDE || pixels.height() != SOURCE_SIDE {
            return Err(Error::Invalid(format!(
                "raw glyph must be {SOURCE_SIDE}x{SOURCE_SIDE}, got {}x{}",
                pixels.width(),
                pixels.height()
            )));
        }
        Ok(RawGlyph {
            pixels,
            label,
            partition_hint,
            source_id: source_id.into(),
        })
    }

    pub fn pixels(&self) -> &BitGrid {
        &self.pixels
    }
}

/// A glyph that was found but not emitted, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub source_id: String,
    pub reason: String,
}

/// A discovered glyph file, not yet decoded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub source_id: String,
    pub label: ClassCode,
    pub partition_hint: PartitionHint,
}

/// Outcome of loading one entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Glyph(RawGlyph),
    Skipped(LedgerEntry),
}

/// Ordered listing of every glyph file under a corpus root.
#[derive(Debug, Clone)]
pub struct CorpusIndex {
    root: PathBuf,
    polarity: InkPolarity,
    entries: Vec<CorpusEntry>,
}

/// Per-class counts and the skip ledger accumulated while streaming a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanStats {
    pub counts: [usize; NUM_CLASSES],
    pub ledger: Vec<LedgerEntry>,
}

impl Default for ScanStats {
    fn default() -> Self {
        ScanStats {
            counts: [0; NUM_CLASSES],
            ledger: Vec::new(),
        }
    }
}

impl ScanStats {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    fn record(&mut self, decoded: &Decoded) {
        match decoded {
            Decoded::Glyph(g) => self.counts[g.label.index()] += 1,
            Decoded::Skipped(e) => self.ledger.push(e.clone()),
        }
    }
}

/// Lists the corpus in lexicographic path order, labelling each glyph file
/// through `layout`. A directory holding glyph files that no rule covers is
/// a hard error.
pub fn scan_corpus(root: &Path, layout: &Layout) -> Result<CorpusIndex> {
    if !root.is_dir() {
        return Err(Error::io_at(
            root,
            std::io::Error::new(std::io::ErrorKind::NotFound, "corpus root is not a directory"),
        ));
    }
    let mut entries = Vec::new();
    for item in WalkDir::new(root).sort_by_file_name() {
        let item = item.map_err(|e| Error::Io(e.into()))?;
        if !item.file_type().is_file() || !is_glyph_file(item.path()) {
            continue;
        }
        let rel = item
            .path()
            .strip_prefix(root)
            .expect("walked paths live under the root");
        let rel_dir = rel
            .parent()
            .map(|p| p.to_string_lossy().replace('\\', "/"))
            .unwrap_or_default();
        let rule = layout.resolve(&rel_dir).ok_or_else(|| {
            Error::Layout(format!(
                "directory {:?} (holding {}) is not covered by the layout",
                rel_dir,
                rel.display()
            ))
        })?;
        if let RuleAction::Label { class, partition } = rule.action {
            entries.push(CorpusEntry {
                path: item.path().to_path_buf(),
                source_id: rel.to_string_lossy().replace('\\', "/"),
                label: class,
                partition_hint: partition,
            });
        }
    }
    Ok(CorpusIndex {
        root: root.to_path_buf(),
        polarity: layout.polarity,
        entries,
    })
}

fn is_glyph_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| GLYPH_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

impl CorpusIndex {
    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads and decodes one entry. Unreadable or undecodable files become
    /// ledger entries; a decodable image of the wrong size is a hard error.
    pub fn load(&self, entry: &CorpusEntry) -> Result<Decoded> {
        let skip = |reason: String| {
            Ok(Decoded::Skipped(LedgerEntry {
                source_id: entry.source_id.clone(),
                reason,
            }))
        };
        let bytes = match fs::read(&entry.path) {
            Ok(b) => b,
            Err(e) => return skip(format!("unreadable: {e}")),
        };
        match decode_image(&bytes, self.polarity) {
            Ok(grid) => Ok(Decoded::Glyph(RawGlyph::new(
                grid,
                entry.label,
                entry.partition_hint,
                entry.source_id.clone(),
            )?)),
            Err(DecodeError::WrongDimensions { width, height }) => Err(Error::Dimensions {
                path: entry.path.clone(),
                width,
                height,
                expected: SOURCE_SIDE as u32,
            }),
            Err(DecodeError::Undecodable(why)) => skip(format!("undecodable: {why}")),
        }
    }

    /// Streams every entry in order, sequentially.
    pub fn iter(&self) -> impl Iterator<Item = Result<Decoded>> + '_ {
        self.entries.iter().map(|e| self.load(e))
    }

    /// Decodes in parallel chunks of `chunk_size` entries, handing each chunk
    /// to `sink` in corpus order. Returns the accumulated counts and ledger.
    pub fn for_each_chunk(
        &self,
        chunk_size: usize,
        mut sink: impl FnMut(Vec<Decoded>) -> Result<()>,
    ) -> Result<ScanStats> {
        let mut stats = ScanStats::default();
        for chunk in self.entries.chunks(chunk_size.max(1)) {
            let decoded = chunk
                .par_iter()
                .map(|e| self.load(e))
                .collect::<Result<Vec<_>>>()?;
            decoded.iter().for_each(|d| stats.record(d));
            sink(decoded)?;
        }
        Ok(stats)
    }

    /// Decodes everything into memory. Fine for test corpora; use
    /// [`CorpusIndex::for_each_chunk`] for full-size ones.
    pub fn decode_all(&self) -> Result<(Vec<RawGlyph>, ScanStats)> {
        let mut glyphs = Vec::new();
        let stats = self.for_each_chunk(4096, |chunk| {
            glyphs.extend(chunk.into_iter().filter_map(|d| match d {
                Decoded::Glyph(g) => Some(g),
                Decoded::Skipped(_) => None,
            }));
            Ok(())
        })?;
        Ok((glyphs, stats))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn write_glyph(dir: &Path, name: &str, grid: &BitGrid) {
        fs::create_dir_all(dir).unwrap();
        fs::write(dir.join(name), encode_png(grid, InkPolarity::DarkInk)).unwrap();
    }

    fn blob(x: usize) -> BitGrid {
        let mut g = BitGrid::new(128, 128);
        for y in 40..60 {
            g.set(x, y, true);
        }
        g
    }

    #[test]
    fn hex_directory_yields_labelled_glyphs() {
        let tmp = tempdir().unwrap();
        for i in 0..3 {
            write_glyph(&tmp.path().join("4a"), &format!("g{i}.png"), &blob(10 + i));
        }
        let index = scan_corpus(tmp.path(), &Layout::hex_directories()).unwrap();
        let (glyphs, stats) = index.decode_all().unwrap();
        assert_eq!(glyphs.len(), 3);
        assert!(glyphs.iter().all(|g| g.label.character() == 'J'));
        assert_eq!(stats.counts[ClassCode::from_char('J').unwrap().index()], 3);
        assert_eq!(stats.total(), 3);
        assert!(stats.ledger.is_empty());
    }

    #[test]
    fn empty_root_is_empty() {
        let tmp = tempdir().unwrap();
        let index = scan_corpus(tmp.path(), &Layout::hex_directories()).unwrap();
        assert!(index.is_empty());
        let (glyphs, stats) = index.decode_all().unwrap();
        assert!(glyphs.is_empty());
        assert_eq!(stats.total(), 0);
    }

    #[test]
    fn deterministic_lexicographic_order() {
        let tmp = tempdir().unwrap();
        write_glyph(&tmp.path().join("31"), "b.png", &blob(1));
        write_glyph(&tmp.path().join("30"), "z.png", &blob(2));
        write_glyph(&tmp.path().join("30"), "a.png", &blob(3));
        let layout = Layout::hex_directories();
        let ids = |idx: &CorpusIndex| {
            idx.entries()
                .iter()
                .map(|e| e.source_id.clone())
                .collect::<Vec<_>>()
        };
        let a = scan_corpus(tmp.path(), &layout).unwrap();
        let b = scan_corpus(tmp.path(), &layout).unwrap();
        assert_eq!(ids(&a), vec!["30/a.png", "30/z.png", "31/b.png"]);
        assert_eq!(ids(&a), ids(&b));
        assert_eq!(a.decode_all().unwrap().0, b.decode_all().unwrap().0);
    }

    #[test]
    fn corrupt_file_is_ledgered() {
        let tmp = tempdir().unwrap();
        write_glyph(&tmp.path().join("30"), "a.png", &blob(3));
        fs::write(tmp.path().join("30/b.png"), b"\x89PNG\r\n\x1a\nbroken").unwrap();
        let index = scan_corpus(tmp.path(), &Layout::hex_directories()).unwrap();
        let (glyphs, stats) = index.decode_all().unwrap();
        assert_eq!(glyphs.len(), 1);
        assert_eq!(stats.ledger.len(), 1);
        assert_eq!(stats.ledger[0].source_id, "30/b.png");
    }

    #[test]
    fn wrong_size_is_a_hard_error_naming_the_file() {
        let tmp = tempdir().unwrap();
        let dir = tmp.path().join("30");
        fs::create_dir_all(&dir).unwrap();
        let img = image::GrayImage::from_raw(10, 10, vec![255; 100]).unwrap();
        img.save(dir.join("small.png")).unwrap();
        let index = scan_corpus(tmp.path(), &Layout::hex_directories()).unwrap();
        let err = index.decode_all().unwrap_err();
        assert!(err.to_string().contains("small.png"), "{err}");
    }

    #[test]
    fn unmapped_directory_is_a_hard_error() {
        let tmp = tempdir().unwrap();
        write_glyph(&tmp.path().join("zz"), "a.png", &blob(3));
        assert!(matches!(
            scan_corpus(tmp.path(), &Layout::hex_directories()),
            Err(Error::Layout(_))
        ));
    }

    #[test]
    fn skip_rules_and_partitions() {
        let tmp = tempdir().unwrap();
        write_glyph(&tmp.path().join("30/hsf_0"), "a.png", &blob(3));
        write_glyph(&tmp.path().join("30/hsf_4"), "a.png", &blob(4));
        write_glyph(&tmp.path().join("30/train_30"), "a.png", &blob(5));
        fs::write(tmp.path().join("30/hsf_0/notes.mis"), b"ignored").unwrap();
        let layout: Layout =
            "30/hsf_* = 30, census_train\n30/hsf_4 = 30, student_test\n30/train_30 = skip\n"
                .parse()
                .unwrap();
        let index = scan_corpus(tmp.path(), &layout).unwrap();
        let hints: Vec<_> = index.entries().iter().map(|e| e.partition_hint).collect();
        assert_eq!(hints, vec![PartitionHint::CensusTrain, PartitionHint::StudentTest]);
    }

    #[test]
    fn raw_planes_are_accepted() {
        let tmp = tempdir().unwrap();
        fs::create_dir_all(tmp.path().join("41")).unwrap();
        fs::write(tmp.path().join("41/a.raw"), encode_raw(&blob(9))).unwrap();
        let index = scan_corpus(tmp.path(), &Layout::hex_directories()).unwrap();
        let (glyphs, _) = index.decode_all().unwrap();
        assert_eq!(glyphs[0].pixels(), &blob(9));
        assert_eq!(glyphs[0].label.character(), 'A');
    }
}
