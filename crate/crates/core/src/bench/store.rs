//! On-disk store of converted glyphs: one pack of raw 784-byte records per
//! class, named by the SHA-256 of its contents, plus `index.json` and the
//! conversion ledger.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::class_code::{ClassCode, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::forge::GlyphSource;
use crate::ingest::LedgerEntry;
use crate::pipeline::{Glyph28, GLYPH_PIXELS};

pub const INDEX_FILE: &str = "index.json";
pub const LEDGER_FILE: &str = "ledger.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackEntry {
    pub class: char,
    pub count: usize,
    pub sha256: String,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreIndex {
    pub total: usize,
    /// In class-code order; empty classes are omitted.
    pub packs: Vec<PackEntry>,
    pub run_config: serde_json::Value,
}

struct PackWriter {
    tmp: PathBuf,
    out: BufWriter<File>,
    hasher: Sha256,
    count: usize,
}

/// Appends glyphs class by class and seals them into content-addressed packs.
pub struct StoreWriter {
    dir: PathBuf,
    packs: Vec<Option<PackWriter>>,
    ledger: Vec<LedgerEntry>,
}

impl StoreWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io_at(dir, e))?;
        Ok(StoreWriter {
            dir: dir.to_owned(),
            packs: (0..NUM_CLASSES).map(|_| None).collect(),
            ledger: Vec::new(),
        })
    }

    pub fn push(&mut self, glyph: &Glyph28) -> Result<()> {
        let slot = &mut self.packs[glyph.label.index()];
        if slot.is_none() {
            let tmp = self.dir.join(format!(".{:02x}.partial", glyph.label.character() as u32));
            let file = File::create(&tmp).map_err(|e| Error::io_at(&tmp, e))?;
            *slot = Some(PackWriter {
                tmp,
                out: BufWriter::new(file),
                hasher: Sha256::new(),
                count: 0,
            });
        }
        let pack = slot.as_mut().expect("just created");
        pack.out.write_all(glyph.pixels()).map_err(|e| Error::io_at(&pack.tmp, e))?;
        pack.hasher.update(glyph.pixels());
        pack.count += 1;
        Ok(())
    }

    pub fn skip(&mut self, entry: LedgerEntry) {
        self.ledger.push(entry);
    }

    pub fn ledger(&self) -> &[LedgerEntry] {
        &self.ledger
    }

    pub fn finish(self, run_config: &serde_json::Value) -> Result<StoreIndex> {
        // remove stale packs from an earlier conversion
        for entry in fs::read_dir(&self.dir).map_err(|e| Error::io_at(&self.dir, e))? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "glyphs") {
                fs::remove_file(&path).map_err(|e| Error::io_at(&path, e))?;
            }
        }
        let mut packs = Vec::new();
        let mut total = 0;
        for (i, slot) in self.packs.into_iter().enumerate() {
            let Some(mut pack) = slot else { continue };
            pack.out.flush().map_err(|e| Error::io_at(&pack.tmp, e))?;
            drop(pack.out);
            let class = ClassCode::new(i as u8)?.character();
            let sha256 = hex::encode(pack.hasher.finalize());
            let file = format!("{:02x}-{}.glyphs", class as u32, &sha256[..16]);
            let target = self.dir.join(&file);
            fs::rename(&pack.tmp, &target).map_err(|e| Error::io_at(&target, e))?;
            total += pack.count;
            packs.push(PackEntry {
                class,
                count: pack.count,
                sha256,
                file,
            });
        }
        let index = StoreIndex {
            total,
            packs,
            run_config: run_config.clone(),
        };
        write_json(&self.dir.join(INDEX_FILE), &index)?;
        #[derive(Serialize)]
        struct Ledger<'a> {
            skipped: &'a [LedgerEntry],
            run_config: &'a serde_json::Value,
        }
        write_json(
            &self.dir.join(LEDGER_FILE),
            &Ledger {
                skipped: &self.ledger,
                run_config,
            },
        )?;
        Ok(index)
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io_at(path, e))
}

/// A loaded store, indexed in class order then conversion order.
#[derive(Debug, Clone)]
pub struct GlyphStore {
    pub index: StoreIndex,
    labels: Vec<ClassCode>,
    pixels: Vec<u8>,
}

impl GlyphStore {
    pub fn open(dir: &Path) -> Result<Self> {
        let index_path = dir.join(INDEX_FILE);
        let text = fs::read_to_string(&index_path).map_err(|e| Error::io_at(&index_path, e))?;
        let index: StoreIndex = serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("{}: {e}", index_path.display())))?;
        let mut labels = Vec::with_capacity(index.total);
        let mut pixels = Vec::with_capacity(index.total * GLYPH_PIXELS);
        for pack in &index.packs {
            let path = dir.join(&pack.file);
            let start = pixels.len();
            File::open(&path)
                .and_then(|mut f| f.read_to_end(&mut pixels))
                .map_err(|e| Error::io_at(&path, e))?;
            let bytes = &pixels[start..];
            if bytes.len() != pack.count * GLYPH_PIXELS || hex::encode(Sha256::digest(bytes)) != pack.sha256 {
                return Err(Error::Format(format!("{} does not match the store index", path.display())));
            }
            let class = ClassCode::from_char(pack.class)
                .ok_or_else(|| Error::Format(format!("unknown class {:?} in store index", pack.class)))?;
            labels.extend(std::iter::repeat_n(class, pack.count));
        }
        Ok(GlyphStore { index, labels, pixels })
    }

    pub fn class_counts(&self) -> BTreeMap<char, usize> {
        self.index.packs.iter().map(|p| (p.class, p.count)).collect()
    }
}

impl GlyphSource for GlyphStore {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn label(&self, index: usize) -> ClassCode {
        self.labels[index]
    }

    fn pixels(&self, index: usize) -> [u8; GLYPH_PIXELS] {
        let start = index * GLYPH_PIXELS;
        self.pixels[start..start + GLYPH_PIXELS].try_into().expect("whole record")
    }

    fn labels(&self) -> Vec<ClassCode> {
        self.labels.clone()
    }
}
