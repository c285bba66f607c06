use image::ImageFormat;

use super::layout::InkPolarity;

/// Side length of a source glyph scan.
pub const SOURCE_SIDE: usize = 128;
/// Size of a raw packed-bit source plane.
pub const RAW_PLANE_BYTES: usize = SOURCE_SIDE * SOURCE_SIDE / 8;

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// Row-major binary image, `1` = ink.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitGrid {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BitGrid {
    pub fn new(width: usize, height: usize) -> Self {
        BitGrid {
            width,
            height,
            bits: vec![0; width * height],
        }
    }

    /// Builds a grid from 0/1 values; any nonzero value counts as ink.
    pub fn from_bits(width: usize, height: usize, bits: Vec<u8>) -> Self {
        assert_eq!(bits.len(), width * height, "bit count does not match dimensions");
        let bits = bits.into_iter().map(|b| (b != 0) as u8).collect();
        BitGrid {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, ink: bool) {
        self.bits[y * self.width + x] = ink as u8;
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn ink_count(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeError {
    WrongDimensions { width: u32, height: u32 },
    Undecodable(String),
}

/// Decodes a PNG (any bit depth/colour type) or a raw 2048-byte packed plane.
/// The format is chosen by the PNG signature; anything else must be exactly
/// one raw plane.
pub fn decode_image(bytes: &[u8], polarity: InkPolarity) -> Result<BitGrid, DecodeError> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(bytes, polarity)
    } else if bytes.len() == RAW_PLANE_BYTES {
        Ok(decode_raw(bytes))
    } else {
        Err(DecodeError::Undecodable(format!(
            "neither a PNG stream nor a {RAW_PLANE_BYTES}-byte raw plane ({} bytes)",
            bytes.len()
        )))
    }
}

fn decode_png(bytes: &[u8], polarity: InkPolarity) -> Result<BitGrid, DecodeError> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| DecodeError::Undecodable(e.to_string()))?;
    let (w, h) = (img.width(), img.height());
    if w as usize != SOURCE_SIDE || h as usize != SOURCE_SIDE {
        return Err(DecodeError::WrongDimensions {
            width: w,
            height: h,
        });
    }
    let luma = img.to_luma8();
    let bits = luma
        .as_raw()
        .iter()
        .map(|&v| match polarity {
            InkPolarity::DarkInk => (v < 128) as u8,
            InkPolarity::LightInk => (v >= 128) as u8,
        })
        .collect();
    Ok(BitGrid {
        width: SOURCE_SIDE,
        height: SOURCE_SIDE,
        bits,
    })
}

/// Raw planes store ink bits directly, row-major, most significant bit first.
pub fn decode_raw(bytes: &[u8]) -> BitGrid {
    assert_eq!(bytes.len(), RAW_PLANE_BYTES);
    let bits = bytes
        .iter()
        .flat_map(|&byte| (0..8).rev().map(move |k| (byte >> k) & 1))
        .collect();
    BitGrid {
        width: SOURCE_SIDE,
        height: SOURCE_SIDE,
        bits,
    }
}

/// Packs a 128×128 grid into the raw plane format.
pub fn encode_raw(grid: &BitGrid) -> Vec<u8> {
    assert_eq!((grid.width, grid.height), (SOURCE_SIDE, SOURCE_SIDE));
    grid.bits
        .chunks(8)
        .map(|chunk| chunk.iter().fold(0u8, |acc, &b| (acc << 1) | b))
        .collect()
}

/// Encodes a grid as an 8-bit grayscale PNG with the given polarity
/// (ink drawn at 0 for dark ink, 255 for light ink).
pub fn encode_png(grid: &BitGrid, polarity: InkPolarity) -> Vec<u8> {
    let (ink, page) = match polarity {
        InkPolarity::DarkInk => (0u8, 255u8),
        InkPolarity::LightInk => (255u8, 0u8),
    };
    let pixels: Vec<u8> = grid
        .bits
        .iter()
        .map(|&b| if b == 1 { ink } else { page })
        .collect();
    let buffer = image::GrayImage::from_raw(grid.width as u32, grid.height as u32, pixels)
        .expect("buffer matches dimensions");
    let mut out = std::io::Cursor::new(Vec::new());
    buffer
        .write_to(&mut out, ImageFormat::Png)
        .expect("in-memory PNG encoding does not fail");
    out.into_inner()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn png_with(width: u32, height: u32, f: impl Fn(u32, u32) -> u8) -> Vec<u8> {
        let img = image::GrayImage::from_fn(width, height, |x, y| image::Luma([f(x, y)]));
        let mut out = std::io::Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png).unwrap();
        out.into_inner()
    }

    #[test]
    fn all_white_png_is_blank() {
        let grid = decode_image(&png_with(128, 128, |_, _| 255), InkPolarity::DarkInk).unwrap();
        assert_eq!(grid.ink_count(), 0);
    }

    #[test]
    fn single_black_pixel() {
        let bytes = png_with(128, 128, |x, y| if (x, y) == (3, 5) { 0 } else { 255 });
        let grid = decode_image(&bytes, InkPolarity::DarkInk).unwrap();
        assert_eq!(grid.ink_count(), 1);
        assert_eq!(grid.get(3, 5), 1);
    }

    #[test]
    fn light_ink_polarity_inverts() {
        let bytes = png_with(128, 128, |x, _| if x < 10 { 200 } else { 10 });
        let grid = decode_image(&bytes, InkPolarity::LightInk).unwrap();
        assert_eq!(grid.ink_count(), 10 * 128);
        assert_eq!(grid.get(9, 0), 1);
        assert_eq!(grid.get(10, 0), 0);
    }

    #[test]
    fn threshold_at_128() {
        let bytes = png_with(128, 128, |x, _| if x == 0 { 127 } else { 128 });
        let grid = decode_image(&bytes, InkPolarity::DarkInk).unwrap();
        assert_eq!(grid.ink_count(), 128);
    }

    #[test]
    fn rgb_png_decodes() {
        let img = image::RgbImage::from_fn(128, 128, |x, _| {
            if x == 7 { image::Rgb([0, 0, 0]) } else { image::Rgb([255, 255, 255]) }
        });
        let mut out = std::io::Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png).unwrap();
        let grid = decode_image(&out.into_inner(), InkPolarity::DarkInk).unwrap();
        assert_eq!(grid.ink_count(), 128);
    }

    #[test]
    fn wrong_dimensions() {
        let err = decode_image(&png_with(64, 128, |_, _| 255), InkPolarity::DarkInk).unwrap_err();
        assert_eq!(err, DecodeError::WrongDimensions { width: 64, height: 128 });
    }

    #[test]
    fn garbage_is_undecodable() {
        assert!(matches!(
            decode_image(b"not an image", InkPolarity::DarkInk),
            Err(DecodeError::Undecodable(_))
        ));
        let mut truncated = png_with(128, 128, |_, _| 255);
        truncated.truncate(40);
        assert!(matches!(
            decode_image(&truncated, InkPolarity::DarkInk),
            Err(DecodeError::Undecodable(_))
        ));
    }

    #[test]
    fn raw_is_msb_first() {
        let mut bytes = vec![0u8; RAW_PLANE_BYTES];
        bytes[0] = 0b1000_0001;
        bytes[RAW_PLANE_BYTES - 1] = 0b0000_0001;
        let grid = decode_image(&bytes, InkPolarity::DarkInk).unwrap();
        assert_eq!(grid.get(0, 0), 1);
        assert_eq!(grid.get(7, 0), 1);
        assert_eq!(grid.get(127, 127), 1);
        assert_eq!(grid.ink_count(), 3);
    }

    #[test]
    fn png_round_trip() {
        let mut grid = BitGrid::new(128, 128);
        for i in 0..128 {
            grid.set(i, (i * 7) % 128, true);
        }
        for polarity in [InkPolarity::DarkInk, InkPolarity::LightInk] {
            assert_eq!(decode_image(&encode_png(&grid, polarity), polarity).unwrap(), grid);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn raw_round_trip(bits in proptest::collection::vec(0u8..2, SOURCE_SIDE * SOURCE_SIDE)) {
                let grid = BitGrid::from_bits(SOURCE_SIDE, SOURCE_SIDE, bits);
                let encoded = encode_raw(&grid);
                prop_assert_eq!(encoded.len(), RAW_PLANE_BYTES);
                prop_assert_eq!(decode_image(&encoded, InkPolarity::DarkInk).unwrap(), grid);
            }
        }
    }
}
