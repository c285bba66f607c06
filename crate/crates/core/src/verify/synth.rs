//! Synthetic inputs for checks and demos: stroke glyphs, labelled corpora
//! and glyph stores that need no real scans.

use std::fs;
use std::path::Path;

use crate::class_code::ClassCode;
use crate::error::{Error, Result};
use crate::forge::GlyphSource;
use crate::ingest::{encode_png, BitGrid, InkPolarity, SOURCE_SIDE};
use crate::pipeline::GLYPH_PIXELS;
use crate::rng::{mix_seed, PortableRng};

/// Ink stays at least this far from the scan edge, so the blur support
/// never reaches it.
pub const MARGIN: usize = 8;

/// A random glyph of one to four thick strokes inside a random box.
pub fn stroke_glyph(rng: &mut PortableRng) -> BitGrid {
    let mut grid = BitGrid::new(SOURCE_SIDE, SOURCE_SIDE);
    let usable = (SOURCE_SIDE - 2 * MARGIN) as u64;
    let bw = 8 + rng.below(usable - 8) as usize;
    let bh = 8 + rng.below(usable - 8) as usize;
    let bx = MARGIN + rng.below((SOURCE_SIDE - 2 * MARGIN - bw) as u64 + 1) as usize;
    let by = MARGIN + rng.below((SOURCE_SIDE - 2 * MARGIN - bh) as u64 + 1) as usize;
    let strokes = 1 + rng.below(4);
    for _ in 0..strokes {
        let (x0, y0) = (bx + rng.below(bw as u64) as usize, by + rng.below(bh as u64) as usize);
        let (x1, y1) = (bx + rng.below(bw as u64) as usize, by + rng.below(bh as u64) as usize);
        let thickness = 1 + rng.below(4) as isize;
        draw_line(&mut grid, (x0, y0), (x1, y1), thickness, (bx, by, bw, bh));
    }
    grid
}

fn draw_line(
    grid: &mut BitGrid,
    from: (usize, usize),
    to: (usize, usize),
    thickness: isize,
    bounds: (usize, usize, usize, usize),
) {
    let (bx, by, bw, bh) = bounds;
    let steps = from.0.abs_diff(to.0).max(from.1.abs_diff(to.1)).max(1);
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let x = (from.0 as f64 + t * (to.0 as f64 - from.0 as f64)).round() as isize;
        let y = (from.1 as f64 + t * (to.1 as f64 - from.1 as f64)).round() as isize;
        for dy in 0..thickness {
            for dx in 0..thickness {
                let (px, py) = (x + dx, y + dy);
                if px >= bx as isize && py >= by as isize && px < (bx + bw) as isize && py < (by + bh) as isize {
                    grid.set(px as usize, py as usize, true);
                }
            }
        }
    }
}

/// Ink extent `(x0, y0, x1, y1)` inclusive, or `None` for a blank grid.
pub fn ink_extent(grid: &BitGrid) -> Option<(usize, usize, usize, usize)> {
    let mut ext: Option<(usize, usize, usize, usize)> = None;
    for y in 0..grid.height() {
        for x in 0..grid.width() {
            if grid.get(x, y) == 1 {
                ext = Some(match ext {
                    None => (x, y, x, y),
                    Some((a, b, c, d)) => (a.min(x), b.min(y), c.max(x), d.max(y)),
                });
            }
        }
    }
    ext
}

/// Moves the ink by `(dx, dy)`; ink leaving the grid is dropped.
pub fn translate(grid: &BitGrid, dx: isize, dy: isize) -> BitGrid {
    let mut out = BitGrid::new(grid.width(), grid.height());
    for y in 0..grid.height() {
        for x in 0..grid.width() {
            if grid.get(x, y) == 1 {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < grid.width() && (ny as usize) < grid.height() {
                    out.set(nx as usize, ny as usize, true);
                }
            }
        }
    }
    out
}

/// A shift that keeps the ink at least [`MARGIN`] pixels from every edge.
pub fn random_shift(grid: &BitGrid, rng: &mut PortableRng) -> (isize, isize) {
    let (x0, y0, x1, y1) = ink_extent(grid).expect("grid has ink");
    let pick = |lo: usize, hi: usize, rng: &mut PortableRng| {
        let min = MARGIN as isize - lo as isize;
        let max = (SOURCE_SIDE - 1 - MARGIN) as isize - hi as isize;
        min + rng.below((max - min + 1) as u64) as isize
    };
    (pick(x0, x1, rng), pick(y0, y1, rng))
}

/// Source labels with `per_class(c)` entries of each class, shuffled.
pub fn labels_with_counts(per_class: impl Fn(ClassCode) -> usize, seed: u64) -> Vec<ClassCode> {
    let mut labels = Vec::new();
    for c in ClassCode::all() {
        labels.extend(std::iter::repeat_n(c, per_class(c)));
    }
    PortableRng::new(seed).shuffle(&mut labels);
    labels
}

/// A glyph store whose pixels are a pseudo-random function of the index.
pub struct SyntheticStore {
    pub labels: Vec<ClassCode>,
    pub seed: u64,
}

impl GlyphSource for SyntheticStore {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn label(&self, index: usize) -> ClassCode {
        self.labels[index]
    }

    fn pixels(&self, index: usize) -> [u8; GLYPH_PIXELS] {
        let mut px = [0u8; GLYPH_PIXELS];
        let mut word = mix_seed(self.seed, &[index as u64]);
        for chunk in px.chunks_mut(8) {
            chunk.copy_from_slice(&word.to_le_bytes()[..chunk.len()]);
            word = mix_seed(word, &[]);
        }
        px[0] = self.labels[index].value();
        px
    }
}

/// Writes a corpus of stroke glyphs as PNGs under hex-named class
/// directories, `per_class` per listed class, plus `blanks` empty scans in
/// the first class directory.
pub fn write_corpus(root: &Path, classes: &[ClassCode], per_class: usize, blanks: usize, seed: u64) -> Result<usize> {
    let mut rng = PortableRng::new(seed);
    let mut written = 0;
    for (ci, &class) in classes.iter().enumerate() {
        let dir = root.join(format!("{:02x}", class.character() as u32));
        fs::create_dir_all(&dir).map_err(|e| Error::io_at(&dir, e))?;
        for k in 0..per_class {
            let path = dir.join(format!("{k:05}.png"));
            fs::write(&path, encode_png(&stroke_glyph(&mut rng), InkPolarity::DarkInk))
                .map_err(|e| Error::io_at(&path, e))?;
            written += 1;
        }
        if ci == 0 {
            for k in 0..blanks {
                let path = dir.join(format!("blank{k:03}.png"));
                fs::write(&path, encode_png(&BitGrid::new(SOURCE_SIDE, SOURCE_SIDE), InkPolarity::DarkInk))
                    .map_err(|e| Error::io_at(&path, e))?;
                written += 1;
            }
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strokes_respect_the_margin() {
        let mut rng = PortableRng::new(1);
        for _ in 0..200 {
            let g = stroke_glyph(&mut rng);
            let (x0, y0, x1, y1) = ink_extent(&g).unwrap();
            assert!(x0 >= MARGIN && y0 >= MARGIN);
            assert!(x1 < SOURCE_SIDE - MARGIN && y1 < SOURCE_SIDE - MARGIN);
            let (dx, dy) = random_shift(&g, &mut rng);
            let moved = translate(&g, dx, dy);
            assert_eq!(moved.ink_count(), g.ink_count());
            let (a, b, c, d) = ink_extent(&moved).unwrap();
            assert!(a >= MARGIN && b >= MARGIN && c < SOURCE_SIDE - MARGIN && d < SOURCE_SIDE - MARGIN);
        }
    }

    #[test]
    fn label_counts() {
        let labels = labels_with_counts(|c| c.index() % 3, 0);
        assert_eq!(labels.len(), (0..62).map(|i| i % 3).sum::<usize>());
    }
}
