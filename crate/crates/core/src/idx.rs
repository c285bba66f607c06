//! Reader and writer for the MNIST IDX container (unsigned-byte images and
//! labels). Readers transparently accept gzip-wrapped streams; writers
//! always emit plain IDX.

use std::io::{self, Read, Write};

use byteorder::{BigEndian, ByteOrder, WriteBytesExt};
use flate2::read::GzDecoder;

use crate::error::{Error, Result};
use crate::pipeline::GLYPH_SIDE;

pub const IMAGES_MAGIC: [u8; 4] = [0x00, 0x00, 0x08, 0x03];
pub const LABELS_MAGIC: [u8; 4] = [0x00, 0x00, 0x08, 0x01];
pub const IMAGES_HEADER_LEN: usize = 16;
pub const LABELS_HEADER_LEN: usize = 8;

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// A stack of same-sized 8-bit images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    pixels: Vec<u8>,
}

impl IdxImages {
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>) -> Result<Self> {
        let per = rows * cols;
        if per == 0 || !pixels.len().is_multiple_of(per) {
            return Err(Error::Invalid(format!(
                "{} bytes is not a whole number of {rows}x{cols} images",
                pixels.len()
            )));
        }
        Ok(IdxImages { rows, cols, pixels })
    }

    pub fn count(&self) -> usize {
        self.pixels.len() / (self.rows * self.cols)
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let per = self.rows * self.cols;
        &self.pixels[i * per..(i + 1) * per]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u8]> {
        self.pixels.chunks_exact(self.rows * self.cols)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<u64> {
        write_images_sized(out, self.rows, self.cols, self.iter())
    }
}

/// Writes 28×28 images. Returns the number of bytes written, `16 + 784·count`.
pub fn write_images<W, I>(out: W, images: I) -> Result<u64>
where
    W: Write,
    I: IntoIterator,
    I::IntoIter: ExactSizeIterator,
    I::Item: AsRef<[u8]>,
{
    write_images_sized(out, GLYPH_SIDE, GLYPH_SIDE, images)
}

fn write_images_sized<W, I>(mut out: W, rows: usize, cols: usize, images: I) -> Result<u64>
where
    W: Write,
    I: IntoIterator,
    I::IntoIter: ExactSizeIterator,
    I::Item: AsRef<[u8]>,
{
    let images = images.into_iter();
    let count = images.len();
    out.write_all(&IMAGES_MAGIC)?;
    for v in [count, rows, cols] {
        out.write_u32::<BigEndian>(header_u32(v)?)?;
    }
    let per = rows * cols;
    for img in images {
        let img = img.as_ref();
        if img.len() != per {
            return Err(Error::Invalid(format!("image has {} bytes, expected {per}", img.len())));
        }
        out.write_all(img)?;
    }
    out.flush()?;
    Ok((IMAGES_HEADER_LEN + per * count) as u64)
}

/// Writes a label file. Returns the number of bytes written, `8 + count`.
pub fn write_labels<W: Write>(mut out: W, labels: &[u8]) -> Result<u64> {
    out.write_all(&LABELS_MAGIC)?;
    out.write_u32::<BigEndian>(header_u32(labels.len())?)?;
    out.write_all(labels)?;
    out.flush()?;
    Ok((LABELS_HEADER_LEN + labels.len()) as u64)
}

fn header_u32(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Invalid(format!("{v} does not fit an IDX header field")))
}

fn slurp<R: Read>(mut input: R) -> io::Result<Vec<u8>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.starts_with(&GZIP_MAGIC) {
        let mut plain = Vec::new();
        GzDecoder::new(bytes.as_slice()).read_to_end(&mut plain)?;
        Ok(plain)
    } else {
        Ok(bytes)
    }
}

fn check_magic(bytes: &[u8], magic: [u8; 4], header_len: usize) -> Result<()> {
    if bytes.len() < header_len {
        return Err(Error::Format(format!(
            "truncated header: expected {header_len} bytes, got {}",
            bytes.len()
        )));
    }
    if bytes[..4] != magic {
        return Err(Error::Format(format!(
            "bad magic {:02x?}, expected {:02x?}",
            &bytes[..4],
            magic
        )));
    }
    Ok(())
}

fn check_payload(bytes: &[u8], header_len: usize, expected: usize) -> Result<()> {
    let actual = bytes.len() - header_len;
    if actual != expected {
        return Err(Error::Format(format!(
            "payload length mismatch: expected {expected} bytes, got {actual}"
        )));
    }
    Ok(())
}

/// Reads an image file. With `transpose`, each image is transposed on load
/// (published EMNIST files store images column-major relative to MNIST).
pub fn read_images<R: Read>(input: R, transpose: bool) -> Result<IdxImages> {
    let bytes = slurp(input)?;
    check_magic(&bytes, IMAGES_MAGIC, IMAGES_HEADER_LEN)?;
    let count = BigEndian::read_u32(&bytes[4..8]) as usize;
    let rows = BigEndian::read_u32(&bytes[8..12]) as usize;
    let cols = BigEndian::read_u32(&bytes[12..16]) as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::Format(format!("degenerate image shape {rows}x{cols}")));
    }
    let expected = count
        .checked_mul(rows * cols)
        .ok_or_else(|| Error::Format("declared payload size overflows".into()))?;
    check_payload(&bytes, IMAGES_HEADER_LEN, expected)?;
    let payload = &bytes[IMAGES_HEADER_LEN..];
    let (rows, cols, pixels) = if transpose {
        let mut out = Vec::with_capacity(payload.len());
        for img in payload.chunks_exact(rows * cols) {
            for c in 0..cols {
                for r in 0..rows {
                    out.push(img[r * cols + c]);
                }
            }
        }
        (cols, rows, out)
    } else {
        (rows, cols, payload.to_vec())
    };
    Ok(IdxImages { rows, cols, pixels })
}

pub fn read_labels<R: Read>(input: R) -> Result<Vec<u8>> {
    let bytes = slurp(input)?;
    check_magic(&bytes, LABELS_MAGIC, LABELS_HEADER_LEN)?;
    let count = BigEndian::read_u32(&bytes[4..8]) as usize;
    check_payload(&bytes, LABELS_HEADER_LEN, count)?;
    Ok(bytes[LABELS_HEADER_LEN..].to_vec())
}

/// Checks every label against a class count.
pub fn check_labels(labels: &[u8], class_count: usize) -> Result<()> {
    match labels.iter().position(|&l| l as usize >= class_count) {
        Some(i) => Err(Error::Format(format!(
            "label {} at position {i} is not below the class count {class_count}",
            labels[i]
        ))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use flate2::write::GzEncoder;
    use flate2::Compression;
    use proptest::prelude::*;

    #[test]
    fn empty_image_file_is_header_only() {
        let mut out = Vec::new();
        let n = write_images(&mut out, Vec::<[u8; 784]>::new()).unwrap();
        assert_eq!(n, 16);
        assert_eq!(
            out,
            [0, 0, 8, 3, 0, 0, 0, 0, 0, 0, 0, 0x1c, 0, 0, 0, 0x1c]
        );
    }

    #[test]
    fn one_blank_image() {
        let mut out = Vec::new();
        let n = write_images(&mut out, vec![[0u8; 784]]).unwrap();
        assert_eq!(n, 800);
        assert_eq!(out.len(), 800);
        assert!(out[16..].iter().all(|&b| b == 0));
        assert_eq!(&out[4..8], &[0, 0, 0, 1]);
    }

    #[test]
    fn label_bytes() {
        let mut out = Vec::new();
        assert_eq!(write_labels(&mut out, &[0, 1, 2]).unwrap(), 11);
        assert_eq!(out, [0, 0, 8, 1, 0, 0, 0, 3, 0, 1, 2]);
        assert_eq!(read_labels(out.as_slice()).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn bad_magic() {
        let bytes = [0, 0, 8, 2, 0, 0, 0, 0, 0, 0, 0, 28, 0, 0, 0, 28];
        assert!(matches!(read_images(&bytes[..], false), Err(Error::Format(_))));
        let mut labels = Vec::new();
        write_labels(&mut labels, &[1]).unwrap();
        assert!(matches!(read_images(labels.as_slice(), false), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_streams() {
        let mut out = Vec::new();
        write_images(&mut out, vec![[7u8; 784]; 2]).unwrap();
        out.truncate(out.len() - 1);
        let err = read_images(out.as_slice(), false).unwrap_err().to_string();
        assert!(err.contains("expected 1568") && err.contains("got 1567"), "{err}");

        let mut labels = Vec::new();
        write_labels(&mut labels, &[1, 2, 3]).unwrap();
        labels.pop();
        assert!(matches!(read_labels(labels.as_slice()), Err(Error::Format(_))));
        assert!(matches!(read_labels(&[0u8, 0, 8][..]), Err(Error::Format(_))));
    }

    #[test]
    fn transpose_on_read() {
        let mut img = [0u8; 784];
        img[3] = 9; // row 0, col 3
        let mut out = Vec::new();
        write_images(&mut out, vec![img]).unwrap();
        let t = read_images(out.as_slice(), true).unwrap();
        assert_eq!(t.image(0)[3 * 28], 9);
        let tt = read_images(out.as_slice(), false).unwrap();
        assert_eq!(tt.image(0)[3], 9);
    }

    #[test]
    fn gzip_is_transparent() {
        let mut plain = Vec::new();
        write_images(&mut plain, vec![[5u8; 784]; 3]).unwrap();
        let mut gz = GzEncoder::new(Vec::new(), Compression::default());
        gz.write_all(&plain).unwrap();
        let zipped = gz.finish().unwrap();
        assert_eq!(read_images(zipped.as_slice(), false).unwrap().count(), 3);
    }

    #[test]
    fn label_range_check() {
        assert!(check_labels(&[0, 9], 10).is_ok());
        assert!(check_labels(&[0, 10], 10).is_err());
    }

    #[test]
    fn label_round_trip_ten_thousand() {
        let labels: Vec<u8> = (0..10_000u32).map(|i| (i.wrapping_mul(2_654_435_761) >> 24) as u8 % 62).collect();
        let mut out = Vec::new();
        write_labels(&mut out, &labels).unwrap();
        assert_eq!(read_labels(out.as_slice()).unwrap(), labels);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn images_round_trip(pixels in proptest::collection::vec(any::<u8>(), 0..100 * 784)) {
            let n = pixels.len() / 784;
            let pixels = pixels[..n * 784].to_vec();
            let images = IdxImages::new(28, 28, pixels).unwrap();
            let mut out = Vec::new();
            prop_assert_eq!(images.write_to(&mut out).unwrap(), 16 + 784 * n as u64);
            let back = read_images(out.as_slice(), false).unwrap();
            prop_assert_eq!(&back, &images);
            let mut again = Vec::new();
            back.write_to(&mut again).unwrap();
            prop_assert_eq!(again, out);
        }
    }
}
