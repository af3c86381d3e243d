//! Netpbm I/O: PGM (P2/P5) input, PGM P5 and PPM P6 output.
//!
//! Only maxval 255 is accepted for intensity images. Label maps use a
//! separate writer/reader pair that allows 16-bit samples.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{BinaryMask, GrayImage, RgbImage};

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: u32,
    /// Offset of the first payload byte.
    offset: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        let tok = self
            .token()
            .ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| {
                Error::MalformedHeader(format!(
                    "{what} is not a number: {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::MalformedHeader("missing magic number".into()));
    }
    let magic = [bytes[0], bytes[1]];
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::MalformedHeader(format!(
            "maxval {maxval} out of range"
        )));
    }
    // exactly one whitespace byte separates the header from a binary raster
    if cur.pos < bytes.len() {
        if !bytes[cur.pos].is_ascii_whitespace() {
            return Err(Error::MalformedHeader("no whitespace after maxval".into()));
        }
        cur.pos += 1;
    }
    let width =
        usize::try_from(width).map_err(|_| Error::MalformedHeader("width too large".into()))?;
    let height =
        usize::try_from(height).map_err(|_| Error::MalformedHeader("height too large".into()))?;
    width
        .checked_mul(height)
        .ok_or_else(|| Error::MalformedHeader("image too large".into()))?;
    Ok(Header {
        magic,
        width,
        height,
        maxval: maxval as u32,
        offset: cur.pos,
    })
}

fn ascii_samples(bytes: &[u8], offset: usize, expected: usize, maxval: u32) -> Result<Vec<u16>> {
    let mut cur = Cursor { bytes, pos: offset };
    let mut out = Vec::with_capacity(expected);
    while out.len() < expected {
        let Some(tok) = cur.token() else { break };
        let v = std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| {
                Error::MalformedHeader(format!(
                    "bad ascii sample {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })?;
        if v > maxval {
            return Err(Error::MalformedHeader(format!(
                "sample {v} exceeds maxval {maxval}"
            )));
        }
        out.push(v as u16);
    }
    if out.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: out.len(),
        });
    }
    Ok(out)
}

fn binary_samples(bytes: &[u8], offset: usize, expected: usize, maxval: u32) -> Result<Vec<u16>> {
    let payload = &bytes[offset.min(bytes.len())..];
    let wide = maxval > 255;
    let per = if wide { 2 } else { 1 };
    if payload.len() < expected * per {
        return Err(Error::Truncated {
            expected,
            found: payload.len() / per,
        });
    }
    let samples: Vec<u16> = if wide {
        payload[..expected * 2]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    } else {
        payload[..expected].iter().map(|&b| b as u16).collect()
    };
    if let Some(v) = samples.iter().find(|&&v| v as u32 > maxval) {
        return Err(Error::MalformedHeader(format!(
            "sample {v} exceeds maxval {maxval}"
        )));
    }
    Ok(samples)
}

fn decode_pgm(bytes: &[u8]) -> Result<(Header, Vec<u16>)> {
    let header = parse_header(bytes)?;
    let n = header.width * header.height;
    let samples = match &header.magic {
        b"P5" => binary_samples(bytes, header.offset, n, header.maxval)?,
        b"P2" => ascii_samples(bytes, header.offset, n, header.maxval)?,
        m => {
            return Err(Error::MalformedHeader(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(m)
            )))
        }
    };
    Ok((header, samples))
}

/// Parses an in-memory P2 or P5 graymap with maxval 255.
pub fn decode_gray(bytes: &[u8]) -> Result<GrayImage> {
    let header = parse_header(bytes)?;
    if header.maxval != 255 {
        return Err(Error::UnsupportedMaxval(header.maxval));
    }
    let (header, samples) = decode_pgm(bytes)?;
    GrayImage::new(
        header.width,
        header.height,
        samples.into_iter().map(|v| v as u8).collect(),
    )
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_gray(&bytes)
}

/// Binary P5 encoding, maxval 255.
pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.data());
    out
}

pub fn write_pgm(image: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(image)).map_err(|e| Error::io(path, e))
}

/// Masks are stored as 0/255 graymaps.
pub fn write_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    write_pgm(&mask.to_gray(), path)
}

/// Any nonzero sample is foreground.
pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    read_pgm(path).map(|g| BinaryMask::from_gray(&g))
}

pub fn encode_ppm(image: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.data().iter().flatten());
    out
}

pub fn write_ppm(image: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_ppm(image)).map_err(|e| Error::io(path, e))
}

/// Writes `image` as a P6 pixmap with `boundary` pixels painted pure red.
pub fn write_overlay(
    image: &GrayImage,
    boundary: &BinaryMask,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_ppm(&RgbImage::overlay(image, boundary)?, path)
}

/// Encodes a label raster as P5 with `maxval = max(label, 1)`.
/// Labels above 65535 saturate; samples are big-endian 16-bit once maxval
/// exceeds 255.
pub fn encode_labels(width: usize, height: usize, labels: &[u32]) -> Vec<u8> {
    let maxval = labels.iter().copied().max().unwrap_or(0).clamp(1, 65535);
    let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    for &l in labels {
        let v = l.min(65535) as u16;
        if maxval > 255 {
            out.extend_from_slice(&v.to_be_bytes());
        } else {
            out.push(v as u8);
        }
    }
    out
}

pub fn write_labels(
    width: usize,
    height: usize,
    labels: &[u32],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_labels(width, height, labels)).map_err(|e| Error::io(path, e))
}

/// Reads a label raster written by [`write_labels`] (any maxval up to 65535).
pub fn read_labels(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<u32>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (header, samples) = decode_pgm(&bytes)?;
    Ok((
        header.width,
        header.height,
        samples.into_iter().map(u32::from).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p5_direct_bytes() {
        let mut bytes = b"P5 2 2 255 ".to_vec();
        bytes.extend_from_slice(&[0, 128, 255, 7]);
        let img = decode_gray(&bytes).unwrap();
        assert_eq!(img.dims(), (2, 2));
        assert_eq!(img.data(), &[0, 128, 255, 7]);
    }

    #[test]
    fn p2_single_value() {
        let img = decode_gray(b"P2 1 1 255 42").unwrap();
        assert_eq!(img.data(), &[42]);
    }

    #[test]
    fn p2_and_p5_agree() {
        let p2 = b"P2\n# a comment\n3 2\n255\n0 1 2\n250 # trailing\n 254 255\n";
        let mut p5 = b"P5\n3 2\n255\n".to_vec();
        p5.extend_from_slice(&[0, 1, 2, 250, 254, 255]);
        assert_eq!(decode_gray(p2).unwrap(), decode_gray(&p5).unwrap());
    }

    #[test]
    fn distinct_errors() {
        assert!(matches!(
            decode_gray(b"P5 1 1 65535 \x00\x01"),
            Err(Error::UnsupportedMaxval(65535))
        ));
        assert!(matches!(
            decode_gray(b"P5 2 2 255 \x01\x02"),
            Err(Error::Truncated {
                expected: 4,
                found: 2
            })
        ));
        assert!(matches!(
            decode_gray(b"P2 2 1 255 7"),
            Err(Error::Truncated { .. })
        ));
        assert!(matches!(
            decode_gray(b"P5 x 1 255 "),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            decode_gray(b"P6 1 1 255 abc"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            decode_gray(b"hello"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            decode_gray(b"P5 0 1 255 "),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            decode_gray(b"P2 1 1 255 300"),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn minimal_file_is_small() {
        let img = GrayImage::filled(1, 1, 0).unwrap();
        let bytes = encode_pgm(&img);
        assert!(bytes.len() <= 13, "{} bytes", bytes.len());
        assert_eq!(decode_gray(&bytes).unwrap(), img);
    }

    #[test]
    fn ppm_layout() {
        let img = RgbImage::new(2, 1, vec![[1, 2, 3], [4, 5, 6]]).unwrap();
        assert_eq!(
            encode_ppm(&img),
            b"P6\n2 1\n255\n\x01\x02\x03\x04\x05\x06".to_vec()
        );
    }

    #[test]
    fn labels_round_trip_8_and_16_bit() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.pgm");
        for labels in [vec![0u32, 1, 2, 3], vec![0, 300, 70000, 1]] {
            write_labels(2, 2, &labels, &p).unwrap();
            let (w, h, back) = read_labels(&p).unwrap();
            assert_eq!((w, h), (2, 2));
            let expect: Vec<u32> = labels.iter().map(|&l| l.min(65535)).collect();
            assert_eq!(back, expect);
        }
    }
}
