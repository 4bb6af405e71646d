//! Binary PGM/PPM codecs plus 8-bit grayscale PNG input.
//!
//! Only `P5` with maxval 255 is accepted for grayscale input. Output is
//! always `P5` (images, masks) or `P6` (layer maps) with maxval 255.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{ImageBuffer, LossMask, PixelState};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Mask file value for an available pixel.
pub const MASK_AVAILABLE: u8 = 255;
/// Mask file value for a lost pixel.
pub const MASK_LOST: u8 = 0;

/// Loads a `P5` PGM or 8-bit grayscale PNG.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    decode_image(&fs::read(path)?)
}

pub fn decode_image(bytes: &[u8]) -> Result<ImageBuffer> {
    if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(bytes)
    } else {
        let (width, height, data) = decode_pgm(bytes)?;
        ImageBuffer::from_bytes(width, height, data)
    }
}

/// Writes `img` as `P5` PGM, clamping and rounding every sample.
pub fn save_image(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pgm(img.width(), img.height(), &img.to_bytes()))?;
    Ok(())
}

pub fn encode_pgm(width: usize, height: usize, data: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(data);
    out
}

/// Writes interleaved 8-bit RGB as `P6`.
pub fn save_ppm(width: usize, height: usize, rgb: &[u8], path: impl AsRef<Path>) -> Result<()> {
    debug_assert_eq!(rgb.len(), width * height * 3);
    let mut f = fs::File::create(path)?;
    write!(f, "P6\n{width} {height}\n255\n")?;
    f.write_all(rgb)?;
    Ok(())
}

/// Loads a mask file: 255 = available, 0 = lost.
pub fn load_mask(path: impl AsRef<Path>) -> Result<LossMask> {
    decode_mask(&fs::read(path)?)
}

pub fn decode_mask(bytes: &[u8]) -> Result<LossMask> {
    let (width, height, data) = decode_pgm(bytes)?;
    let states = data
        .iter()
        .map(|&v| match v {
            MASK_AVAILABLE => Ok(PixelState::Available),
            MASK_LOST => Ok(PixelState::Lost),
            other => Err(Error::InvalidMask(format!("unexpected mask value {other}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    LossMask::from_states(width, height, states)
}

/// Writes a mask file. RECONSTRUCTED pixels are written as lost, since the
/// file records the loss pattern rather than concealment progress.
pub fn save_mask(mask: &LossMask, path: impl AsRef<Path>) -> Result<()> {
    let data: Vec<u8> = mask
        .states()
        .iter()
        .map(|s| match s {
            PixelState::Available => MASK_AVAILABLE,
            PixelState::Lost | PixelState::Reconstructed => MASK_LOST,
        })
        .collect();
    fs::write(path, encode_pgm(mask.width(), mask.height(), &data))?;
    Ok(())
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_whitespace_and_comments(&mut self) -> Result<()> {
        loop {
            match self.bytes.get(self.pos) {
                None => return Err(Error::UnexpectedEof),
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while let Some(&b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                }
                Some(_) => return Ok(()),
            }
        }
    }

    fn number(&mut self, what: &'static str) -> Result<u32> {
        self.skip_whitespace_and_comments()?;
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader(what));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(Error::MalformedHeader(what))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, &[u8])> {
    if bytes.len() < 2 {
        return Err(Error::UnexpectedEof);
    }
    match &bytes[..2] {
        b"P5" => {}
        b"P2" => return Err(Error::UnsupportedFormat("ASCII PGM (P2)".into())),
        b"P6" | b"P3" => return Err(Error::UnsupportedFormat("color PPM".into())),
        _ => return Err(Error::UnsupportedFormat("not a PGM or PNG file".into())),
    }
    let mut r = HeaderReader { bytes, pos: 2 };
    let width = r.number("width")? as usize;
    let height = r.number("height")? as usize;
    let maxval = r.number("maxval")?;
    if maxval > 255 {
        return Err(Error::UnsupportedBitDepth(maxval));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!("maxval {maxval} (expected 255)")));
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions { width, height });
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(r.pos) {
        Some(b) if b.is_ascii_whitespace() => r.pos += 1,
        Some(_) => return Err(Error::MalformedHeader("maxval")),
        None => return Err(Error::UnexpectedEof),
    }
    let len = width * height;
    let data = bytes.get(r.pos..r.pos + len).ok_or(Error::UnexpectedEof)?;
    Ok((width, height, data))
}

fn decode_png(bytes: &[u8]) -> Result<ImageBuffer> {
    use image::{ColorType, ImageDecoder, ImageError};

    let map_err = |e: ImageError| match e {
        ImageError::IoError(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Error::UnexpectedEof,
        ImageError::IoError(e) => Error::Io(e),
        other => Error::UnsupportedFormat(other.to_string()),
    };
    let decoder = image::codecs::png::PngDecoder::new(std::io::Cursor::new(bytes)).map_err(map_err)?;
    let (width, height) = decoder.dimensions();
    match decoder.color_type() {
        ColorType::L8 => {}
        ColorType::L16 => return Err(Error::UnsupportedBitDepth(65535)),
        other => return Err(Error::UnsupportedFormat(format!("PNG color type {other:?}"))),
    }
    let mut buf = vec![0u8; decoder.total_bytes() as usize];
    decoder.read_image(&mut buf).map_err(map_err)?;
    ImageBuffer::from_bytes(width as usize, height as usize, &buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_p5_exactly() {
        let bytes = encode_pgm(2, 2, &[0, 255, 17, 42]);
        let img = decode_image(&bytes).unwrap();
        assert_eq!(img.samples(), &[0.0, 255.0, 17.0, 42.0]);
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P5\n# made by hand\n2 1\n# depth\n255\n".to_vec();
        bytes.extend_from_slice(&[9, 8]);
        assert_eq!(decode_image(&bytes).unwrap().samples(), &[9.0, 8.0]);
    }

    #[test]
    fn truncated_payload() {
        let bytes = b"P5\n2 2\n255\n\x00\xff\x11".to_vec();
        let err = decode_image(&bytes).unwrap_err();
        assert_eq!(err.to_string(), "unexpected end of file");
    }

    #[test]
    fn truncated_header() {
        assert!(matches!(decode_image(b"P5\n2 2"), Err(Error::UnexpectedEof)));
    }

    #[test]
    fn sixteen_bit_rejected() {
        let mut bytes = b"P5\n1 1\n65535\n".to_vec();
        bytes.extend_from_slice(&[0, 1]);
        let err = decode_image(&bytes).unwrap_err();
        assert!(err.to_string().starts_with("unsupported bit depth"), "{err}");
    }

    #[test]
    fn ascii_pgm_rejected() {
        assert!(matches!(decode_image(b"P2\n1 1\n255\n0\n"), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn save_clamps_and_rounds() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pgm");
        let img = ImageBuffer::new(6, 1, vec![0.0, 255.0, 17.0, 42.0, 255.7, -3.2]).unwrap();
        save_image(&img, &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[..13], b"P5\n6 1\n255\n\x00\xff");
        assert_eq!(&bytes[11..], &[0, 255, 17, 42, 255, 0]);
    }

    #[test]
    fn png_gray8_is_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        let img = image::GrayImage::from_raw(2, 2, vec![0, 255, 17, 42]).unwrap();
        img.save(&path).unwrap();
        assert_eq!(load_image(&path).unwrap().samples(), &[0.0, 255.0, 17.0, 42.0]);
    }

    #[test]
    fn png_color_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.png");
        image::RgbImage::new(2, 2).save(&path).unwrap();
        assert!(matches!(load_image(&path), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn mask_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pgm");
        let states = vec![
            PixelState::Available,
            PixelState::Lost,
            PixelState::Reconstructed,
            PixelState::Available,
        ];
        let mask = LossMask::from_states(2, 2, states).unwrap();
        save_mask(&mask, &path).unwrap();
        let back = load_mask(&path).unwrap();
        assert_eq!(back.state(1, 0), PixelState::Lost);
        assert_eq!(back.state(0, 1), PixelState::Lost);
        assert_eq!(back.count(PixelState::Available), 2);
        assert!(decode_mask(&encode_pgm(1, 1, &[7])).is_err());
    }
}
