//! Binary netpbm codec: P5 (graymap) and P6 (pixmap), maxval 255 only.
//!
//! Header tokens may be separated by any whitespace and `#` comments run to the
//! end of the line. Exactly one whitespace byte separates the maxval from the
//! raster. Bytes after the raster (e.g. a second image) are ignored.

use std::io::Write;

use super::{GrayImage, RgbImage, VisionError};

/// A decoded netpbm image of either flavor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pnm {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl Pnm {
    /// Grayscale view; color images are converted with Rec. 601 luma.
    pub fn into_gray(self) -> Result<GrayImage, VisionError> {
        match self {
            Pnm::Gray(g) => Ok(g),
            Pnm::Rgb(c) => super::to_grayscale(&c),
        }
    }
}

struct Header {
    magic: u8,
    width: usize,
    height: usize,
    raster_offset: usize,
}

fn malformed(msg: impl Into<String>) -> VisionError {
    VisionError::Netpbm(msg.into())
}

fn skip_whitespace_and_comments(bytes: &[u8], mut pos: usize) -> usize {
    loop {
        match bytes.get(pos) {
            Some(b) if b.is_ascii_whitespace() => pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(pos) {
                    pos += 1;
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                }
            }
            _ => return pos,
        }
    }
}

fn read_uint(bytes: &[u8], pos: usize, what: &str) -> Result<(usize, usize), VisionError> {
    let pos = skip_whitespace_and_comments(bytes, pos);
    let digits = bytes[pos.min(bytes.len())..]
        .iter()
        .take_while(|b| b.is_ascii_digit())
        .count();
    if digits == 0 {
        return Err(malformed(format!("expected {what}")));
    }
    let mut value: usize = 0;
    for &b in &bytes[pos..pos + digits] {
        value = value
            .checked_mul(10)
            .and_then(|v| v.checked_add(usize::from(b - b'0')))
            .ok_or_else(|| malformed(format!("{what} overflows")))?;
    }
    Ok((value, pos + digits))
}

fn parse_header(bytes: &[u8]) -> Result<Header, VisionError> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(malformed("missing 'P' magic"));
    }
    let magic = bytes[1];
    if magic != b'5' && magic != b'6' {
        return Err(malformed(format!(
            "unsupported magic P{}",
            char::from(magic).escape_default()
        )));
    }
    let (width, pos) = read_uint(bytes, 2, "width")?;
    let (height, pos) = read_uint(bytes, pos, "height")?;
    let (maxval, pos) = read_uint(bytes, pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(malformed("zero image dimension"));
    }
    if maxval != 255 {
        return Err(malformed(format!("maxval {maxval} unsupported (only 255)")));
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => {}
        _ => return Err(malformed("missing whitespace after maxval")),
    }
    Ok(Header {
        magic,
        width,
        height,
        raster_offset: pos + 1,
    })
}

/// Decodes a P5 or P6 image.
pub fn decode(bytes: &[u8]) -> Result<Pnm, VisionError> {
    let h = parse_header(bytes)?;
    let channels = if h.magic == b'5' { 1 } else { 3 };
    let len = h
        .width
        .checked_mul(h.height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| malformed("image dimensions overflow"))?;
    let raster = bytes
        .get(h.raster_offset..)
        .and_then(|r| r.get(..len))
        .ok_or_else(|| malformed(format!("truncated raster: need {len} bytes")))?
        .to_vec();
    if channels == 1 {
        GrayImage::new(h.width, h.height, raster).map(Pnm::Gray)
    } else {
        RgbImage::new(h.width, h.height, raster).map(Pnm::Rgb)
    }
}

/// Decodes a P5 image; P6 input is an error.
pub fn decode_gray(bytes: &[u8]) -> Result<GrayImage, VisionError> {
    match decode(bytes)? {
        Pnm::Gray(g) => Ok(g),
        Pnm::Rgb(_) => Err(malformed("expected P5, found P6")),
    }
}

pub fn encode_gray(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn encode_rgb(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn write_gray<W: Write>(mut w: W, img: &GrayImage) -> std::io::Result<()> {
    w.write_all(&encode_gray(img))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn encodes_exact_header() {
        let img = GrayImage::new(3, 2, vec![0, 1, 2, 3, 4, 255]).unwrap();
        let bytes = encode_gray(&img);
        assert_eq!(&bytes[..11], b"P5\n3 2\n255\n");
        assert_eq!(&bytes[11..], &[0, 1, 2, 3, 4, 255]);
    }

    #[test]
    fn accepts_comments_and_odd_whitespace() {
        let mut bytes = b"P6 # a comment\n 1\t1 # another\r\n255\n".to_vec();
        bytes.extend_from_slice(&[255, 0, 0]);
        match decode(&bytes).unwrap() {
            Pnm::Rgb(c) => assert_eq!(c.pixel(0, 0), [255, 0, 0]),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(decode(&bytes).unwrap().into_gray().unwrap().data(), &[76]);
    }

    #[test]
    fn raster_byte_may_look_like_whitespace() {
        // A raster beginning with '\n' must not be eaten by header parsing.
        let bytes = b"P5\n2 1\n255\n\n\x07".to_vec();
        assert_eq!(decode_gray(&bytes).unwrap().data(), &[b'\n', 7]);
    }

    #[test]
    fn rejects_malformed_inputs() {
        assert!(decode(b"").is_err());
        assert!(decode(b"P2\n1 1\n255\n0").is_err());
        assert!(decode(b"P5\n1 1\n65535\n\0\0").is_err());
        assert!(decode(b"P5\n2 2\n255\n\0\0\0").is_err());
        assert!(decode(b"P5\n0 2\n255\n").is_err());
        assert!(decode(b"P5\n99999999999999999999999 2\n255\n").is_err());
        assert!(decode(b"P5\n1 1\n255").is_err());
        assert!(decode(b"P5\n4294967296 4294967296\n255\n").is_err());
    }

    #[test]
    fn trailing_bytes_are_ignored() {
        let bytes = b"P5\n1 1\n255\n\x09P5 trailing".to_vec();
        assert_eq!(decode_gray(&bytes).unwrap().data(), &[9]);
    }

    proptest! {
        #[test]
        fn gray_round_trip(w in 1usize..16, h in 1usize..16, seed in any::<u64>()) {
            let data: Vec<u8> = (0..w * h)
                .map(|i| (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) >> 56) as u8)
                .collect();
            let img = GrayImage::new(w, h, data).unwrap();
            prop_assert_eq!(decode_gray(&encode_gray(&img)).unwrap(), img);
        }

        #[test]
        fn decode_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            let _ = decode(&bytes);
        }
    }
}
