//! Conversion of 128×128 binary scans into 28×28 8-bit glyphs:
//! blur, crop to the ink's bounding box, centre in a padded square frame,
//! bicubic resample and stretch intensities to the full byte range.

mod blur;
mod resample;

use std::fs;
use std::path::Path;

use crate::class_code::ClassCode;
use crate::error::{Error, Result};
use crate::ingest::{BitGrid, RawGlyph};
use crate::scalar::Scalar;

pub use blur::{gaussian_blur, gaussian_kernel};
pub use resample::{cubic_weight, downsample_bicubic, CATMULL_ROM_A};

pub const GLYPH_SIDE: usize = 28;
pub const GLYPH_PIXELS: usize = GLYPH_SIDE * GLYPH_SIDE;

/// Row-major real-valued image.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatImage<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
}

impl<T: Scalar> FloatImage<T> {
    pub fn new(width: usize, height: usize) -> Self {
        FloatImage {
            width,
            height,
            values: vec![T::zero(); width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::Invalid(format!(
                "{} values for a {width}x{height} image",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::Invalid("image values must be finite and non-negative".into()));
        }
        Ok(FloatImage {
            width,
            height,
            values,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        FloatImage {
            width,
            height,
            values,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.values[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.values[y * self.width + x] = v;
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn crop(&self, rect: Rect) -> FloatImage<T> {
        assert!(rect.x + rect.w <= self.width && rect.y + rect.h <= self.height);
        FloatImage::from_fn(rect.w, rect.h, |x, y| self.get(rect.x + x, rect.y + y))
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Rect { x, y, w, h }
    }
}

/// A 28×28 8-bit grayscale glyph with its source class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Glyph28 {
    pixels: [u8; GLYPH_PIXELS],
    pub label: ClassCode,
}

impl Glyph28 {
    pub fn new(pixels: [u8; GLYPH_PIXELS], label: ClassCode) -> Self {
        Glyph28 { pixels, label }
    }

    pub fn from_slice(pixels: &[u8], label: ClassCode) -> Result<Self> {
        let pixels: [u8; GLYPH_PIXELS] = pixels
            .try_into()
            .map_err(|_| Error::Invalid(format!("glyph needs {GLYPH_PIXELS} pixels, got {}", pixels.len())))?;
        Ok(Glyph28 { pixels, label })
    }

    pub fn pixels(&self) -> &[u8; GLYPH_PIXELS] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * GLYPH_SIDE + x]
    }
}

/// Fixed parameters of the conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionParams {
    pub sigma: f64,
    pub threshold: f64,
    pub pad: usize,
    pub target: usize,
}

impl Default for ConversionParams {
    fn default() -> Self {
        ConversionParams {
            sigma: 1.0,
            threshold: 0.0,
            pad: 2,
            target: GLYPH_SIDE,
        }
    }
}

/// Tightest rectangle containing every value above `threshold`.
pub fn bounding_box<T: Scalar>(img: &FloatImage<T>, threshold: T) -> Result<Rect> {
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.get(x, y) > threshold {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    if x0 == usize::MAX {
        return Err(Error::BlankGlyph("no pixel above threshold".into()));
    }
    Ok(Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
}

/// Places `roi` in a zero square of side `max(w, h) + 2·pad`, centred with
/// fractional offsets floored.
pub fn center_square<T: Scalar>(roi: &FloatImage<T>, pad: usize) -> FloatImage<T> {
    let (w, h) = (roi.width(), roi.height());
    let side = w.max(h) + 2 * pad;
    let (ox, oy) = square_offsets(w, h, pad);
    let mut out = FloatImage::new(side, side);
    for y in 0..h {
        for x in 0..w {
            out.set(ox + x, oy + y, roi.get(x, y));
        }
    }
    out
}

/// Top-left placement of a `w`×`h` region inside its padded square frame.
pub fn square_offsets(w: usize, h: usize, pad: usize) -> (usize, usize) {
    let side = w.max(h) + 2 * pad;
    ((side - w) / 2, (side - h) / 2)
}

/// Affine stretch of `[min, max]` onto `[0, 255]`, rounding half up.
pub fn scale_intensity<T: Scalar>(img: &FloatImage<T>) -> Result<Vec<u8>> {
    let (lo, hi) = (img.min_value(), img.max_value());
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::BlankGlyph("constant image cannot be scaled".into()));
    }
    let range = hi - lo;
    let full = T::from_f64_lossy(255.0);
    let half = T::from_f64_lossy(0.5);
    Ok(img
        .values()
        .iter()
        .map(|&v| {
            let scaled = (full * (v - lo) / range + half).floor();
            scaled.max(T::zero()).min(full).to_u8().unwrap()
        })
        .collect())
}

/// Every intermediate of one conversion.
#[derive(Debug, Clone)]
pub struct ConversionStages<T> {
    pub blurred: FloatImage<T>,
    pub bounds: Rect,
    pub roi: FloatImage<T>,
    pub framed: FloatImage<T>,
    pub resampled: FloatImage<T>,
    pub pixels: Vec<u8>,
}

/// Runs the conversion on a binary grid, keeping the intermediates.
pub fn convert_stages<T: Scalar>(
    grid: &BitGrid,
    params: &ConversionParams,
) -> Result<ConversionStages<T>> {
    let blurred = gaussian_blur(grid, T::from_f64_lossy(params.sigma));
    let bounds = bounding_box(&blurred, T::from_f64_lossy(params.threshold))?;
    let roi = blurred.crop(bounds);
    let framed = center_square(&roi, params.pad);
    let resampled = downsample_bicubic(&framed, params.target);
    let pixels = scale_intensity(&resampled)?;
    Ok(ConversionStages {
        blurred,
        bounds,
        roi,
        framed,
        resampled,
        pixels,
    })
}

/// Converts a source scan to a 28×28 glyph with the standard parameters.
pub fn convert_glyph<T: Scalar>(raw: &RawGlyph) -> Result<Glyph28> {
    let stages = convert_stages::<T>(raw.pixels(), &ConversionParams::default())
        .map_err(|e| match e {
            Error::BlankGlyph(why) => Error::BlankGlyph(format!("{}: {why}", raw.source_id)),
            other => other,
        })?;
    Glyph28::from_slice(&stages.pixels, raw.label)
}

/// Writes the five stages as grayscale PNGs named `<stem>-a-source.png` …
/// `<stem>-e-final.png`. Real-valued stages are stretched to full range.
pub fn dump_stages<T: Scalar>(
    grid: &BitGrid,
    stages: &ConversionStages<T>,
    dir: &Path,
    stem: &str,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io_at(dir, e))?;
    let source: Vec<u8> = grid.bits().iter().map(|&b| if b == 1 { 255 } else { 0 }).collect();
    let stretch = |img: &FloatImage<T>| scale_intensity(img).unwrap_or_else(|_| vec![0; img.values().len()]);
    let items = [
        ("a-source", grid.width(), grid.height(), source),
        ("b-blurred", stages.blurred.width(), stages.blurred.height(), stretch(&stages.blurred)),
        ("c-extracted", stages.roi.width(), stages.roi.height(), stretch(&stages.roi)),
        ("d-framed", stages.framed.width(), stages.framed.height(), stretch(&stages.framed)),
        ("e-final", GLYPH_SIDE, GLYPH_SIDE, stages.pixels.clone()),
    ];
    for (name, w, h, pixels) in items {
        let path = dir.join(format!("{stem}-{name}.png"));
        image::GrayImage::from_raw(w as u32, h as u32, pixels)
            .expect("stage buffer matches its dimensions")
            .save(&path)
            .map_err(|e| Error::io_at(&path, std::io::Error::other(e)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::PartitionHint;

    fn raw(grid: BitGrid) -> RawGlyph {
        RawGlyph::new(grid, ClassCode::from_char('7').unwrap(), PartitionHint::Unknown, "t").unwrap()
    }

    #[test]
    fn bounding_box_cases() {
        let mut img = FloatImage::<f64>::new(20, 20);
        img.set(5, 7, 0.1);
        assert_eq!(bounding_box(&img, 0.0).unwrap(), Rect::new(5, 7, 1, 1));
        let full = FloatImage::from_fn(9, 4, |_, _| 1.0f64);
        assert_eq!(bounding_box(&full, 0.0).unwrap(), Rect::new(0, 0, 9, 4));
        let blank = FloatImage::<f64>::new(9, 4);
        assert!(matches!(bounding_box(&blank, 0.0), Err(Error::BlankGlyph(_))));
    }

    #[test]
    fn square_offsets_floor() {
        assert_eq!(square_offsets(10, 20, 2), (7, 2));
        assert_eq!(square_offsets(20, 20, 2), (2, 2));
        assert_eq!(square_offsets(11, 20, 2), (6, 2));
        let roi = FloatImage::from_fn(10, 20, |_, _| 1.0f64);
        let framed = center_square(&roi, 2);
        assert_eq!(framed.width(), 24);
        assert_eq!(bounding_box(&framed, 0.0).unwrap(), Rect::new(7, 2, 10, 20));
    }

    #[test]
    fn scale_examples() {
        let img = FloatImage::from_values(3, 1, vec![0.0f64, 0.5, 1.0]).unwrap();
        assert_eq!(scale_intensity(&img).unwrap(), vec![0, 128, 255]);
        let flat = FloatImage::from_values(3, 1, vec![2.0f64, 2.0, 2.0]).unwrap();
        assert!(matches!(scale_intensity(&flat), Err(Error::BlankGlyph(_))));
        let offset = FloatImage::from_values(3, 1, vec![1.0f64, 2.0, 3.0]).unwrap();
        assert_eq!(scale_intensity(&offset).unwrap(), vec![0, 128, 255]);
    }

    #[test]
    fn rejects_bad_float_images() {
        assert!(FloatImage::from_values(2, 1, vec![1.0f64, -1.0]).is_err());
        assert!(FloatImage::from_values(2, 1, vec![1.0f64, f64::NAN]).is_err());
        assert!(FloatImage::from_values(2, 2, vec![1.0f64]).is_err());
    }

    #[test]
    fn blank_glyph_is_rejected() {
        let err = convert_glyph::<f64>(&raw(BitGrid::new(128, 128))).unwrap_err();
        assert!(matches!(err, Error::BlankGlyph(_)));
    }

    #[test]
    fn single_pixel_lands_in_the_centre() {
        let mut grid = BitGrid::new(128, 128);
        grid.set(40, 90, true);
        let g = convert_glyph::<f64>(&raw(grid)).unwrap();
        let (argmax, _) = g
            .pixels()
            .iter()
            .enumerate()
            .max_by_key(|&(i, &v)| (v, std::cmp::Reverse(i)))
            .unwrap();
        let (x, y) = ((argmax % 28) as f64, (argmax / 28) as f64);
        assert!((x - 13.5).abs() <= 1.0 && (y - 13.5).abs() <= 1.0, "peak at ({x},{y})");
        assert_eq!(g.label.character(), '7');
    }

    #[test]
    fn stroke_fills_frame_with_blank_edges() {
        let mut grid = BitGrid::new(128, 128);
        for y in 20..100 {
            for x in 60..66 {
                grid.set(x, y, true);
            }
        }
        let g = convert_glyph::<f64>(&raw(grid)).unwrap();
        assert_eq!(*g.pixels().iter().max().unwrap(), 255);
        assert_eq!(*g.pixels().iter().min().unwrap(), 0);
        for i in 0..28 {
            for v in [g.get(i, 0), g.get(i, 27), g.get(0, i), g.get(27, i)] {
                assert!(v <= 32);
            }
        }
        // tall stroke spans most of the height
        let rows_with_ink = (0..28).filter(|&y| (0..28).any(|x| g.get(x, y) > 128)).count();
        assert!(rows_with_ink >= 20, "{rows_with_ink}");
    }

    #[test]
    fn f32_and_f64_agree_closely() {
        let mut grid = BitGrid::new(128, 128);
        for i in 30..90 {
            grid.set(i, i, true);
            grid.set(i, 120 - i, true);
        }
        let a = convert_glyph::<f64>(&raw(grid.clone())).unwrap();
        let b = convert_glyph::<f32>(&raw(grid)).unwrap();
        for (x, y) in a.pixels().iter().zip(b.pixels()) {
            assert!((*x as i32 - *y as i32).abs() <= 1);
        }
    }

    #[test]
    fn dumps_five_stage_images() {
        let tmp = tempfile::tempdir().unwrap();
        let mut grid = BitGrid::new(128, 128);
        grid.set(64, 64, true);
        let stages = convert_stages::<f64>(&grid, &ConversionParams::default()).unwrap();
        dump_stages(&grid, &stages, tmp.path(), "g0").unwrap();
        assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 5);
        assert!(tmp.path().join("g0-e-final.png").exists());
    }
}
