//! Binary netpbm: P6 frames in and out, P5 masks out.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use pointmenu_core::{BinaryMask, Frame};

#[derive(Debug, thiserror::Error)]
pub enum PpmError {
    #[error("not a binary PPM (expected magic P6, found {0:?})")]
    Magic(String),
    #[error("malformed header: {0}")]
    Header(String),
    #[error("unsupported maxval {0} (only 255 is accepted)")]
    Maxval(u32),
    #[error("pixel data truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Result<&'a str, PpmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && !self.data[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PpmError::Header("unexpected end of header".into()));
        }
        std::str::from_utf8(&self.data[start..self.pos]).map_err(|_| PpmError::Header("non-ASCII header token".into()))
    }

    fn number(&mut self, what: &str) -> Result<u32, PpmError> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| PpmError::Header(format!("{what} is not a number: {tok:?}")))
    }
}

/// Decodes a P6 image with maxval 255.
pub fn decode_ppm(data: &[u8], timestamp_ms: u64) -> Result<Frame, PpmError> {
    let mut header = Header { data, pos: 0 };
    let magic = header.token().map_err(|_| PpmError::Magic(String::new()))?;
    if magic != "P6" {
        return Err(PpmError::Magic(magic.chars().take(8).collect()));
    }
    let width = header.number("width")?;
    let height = header.number("height")?;
    let maxval = header.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PpmError::Header(format!("empty image {width}x{height}")));
    }
    if maxval != 255 {
        return Err(PpmError::Maxval(maxval));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if header.pos >= data.len() || !data[header.pos].is_ascii_whitespace() {
        return Err(PpmError::Header("missing separator after maxval".into()));
    }
    let raster = &data[header.pos + 1..];
    let expected = width as usize * height as usize * 3;
    if raster.len() < expected {
        return Err(PpmError::Truncated {
            expected,
            found: raster.len(),
        });
    }
    Frame::from_rgb(
        width as usize,
        height as usize,
        raster[..expected].to_vec(),
        timestamp_ms,
    )
    .map_err(|e| PpmError::Header(e.to_string()))
}

pub fn read_ppm(path: &Path, timestamp_ms: u64) -> Result<Frame, PpmError> {
    decode_ppm(&fs::read(path)?, timestamp_ms)
}

pub fn encode_ppm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.as_bytes());
    out
}

pub fn write_ppm(path: &Path, frame: &Frame) -> io::Result<()> {
    let mut file = io::BufWriter::new(fs::File::create(path)?);
    file.write_all(&encode_ppm(frame))?;
    file.flush()
}

/// P5 with foreground 255 and background 0.
pub fn encode_pgm(mask: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

pub fn write_pgm(path: &Path, mask: &BinaryMask) -> io::Result<()> {
    fs::write(path, encode_pgm(mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let mut data = b"P6 # a comment\n2 # width done\n1\n255\n".to_vec();
        data.extend_from_slice(&[1, 2, 3, 4, 5, 6]);
        let f = decode_ppm(&data, 9).unwrap();
        assert_eq!((f.width(), f.height(), f.timestamp_ms), (2, 1, 9));
        assert_eq!(f.pixel(1, 0), [4, 5, 6]);
    }

    #[test]
    fn rejects_other_maxval() {
        let data = b"P6\n1 1\n65535\n\0\0\0\0\0\0".to_vec();
        assert!(matches!(decode_ppm(&data, 0), Err(PpmError::Maxval(65535))));
    }

    #[test]
    fn rejects_wrong_magic_and_truncation() {
        assert!(matches!(decode_ppm(b"P3\n1 1\n255\n0 0 0", 0), Err(PpmError::Magic(m)) if m == "P3"));
        assert!(matches!(decode_ppm(b"", 0), Err(PpmError::Magic(_))));
        assert!(matches!(
            decode_ppm(b"P6\n2 2\n255\n\0\0\0", 0),
            Err(PpmError::Truncated { expected: 12, found: 3 })
        ));
        assert!(matches!(decode_ppm(b"P6\nx 2\n255\n", 0), Err(PpmError::Header(_))));
    }

    #[test]
    fn pgm_uses_0_and_255() {
        let m = BinaryMask::new(3, 1, vec![true, false, true]).unwrap();
        assert_eq!(encode_pgm(&m), b"P5\n3 1\n255\n\xff\x00\xff");
    }

    proptest! {
        #[test]
        fn encode_then_decode_is_identity(w in 1usize..16, h in 1usize..16, seed in any::<u8>()) {
            let px: Vec<u8> = (0..w * h * 3).map(|i| (i as u8).wrapping_mul(31).wrapping_add(seed)).collect();
            let f = Frame::from_rgb(w, h, px, 0).unwrap();
            prop_assert_eq!(decode_ppm(&encode_ppm(&f), 0).unwrap(), f);
        }
    }
}
