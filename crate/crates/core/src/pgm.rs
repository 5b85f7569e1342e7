//! PGM (portable graymap) reading and writing.
//!
//! Reads binary `P5` and ASCII `P2` files with maxval 255 or 65535.
//! Intensities are scaled to `[0, 1]` and clamped below at
//! [`FLOOR_INTENSITY`](crate::grid::FLOOR_INTENSITY). Writing always emits
//! binary `P5` at maxval 255 with values clamped to `[0, 1]` and rounded
//! half-up.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{ImageGrid, FLOOR_INTENSITY};

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::PgmParse {
            path: self.path.to_path_buf(),
            offset: self.pos,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    /// Skips whitespace and `#` comments (which run to end of line).
    fn skip_separators(&mut self) {
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(b) = self.peek() {
                    self.pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read_uint(&mut self, what: &str) -> Result<usize> {
        self.skip_separators();
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err(format!("expected {what}, found no digits"));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("digits are ascii");
        match text.parse::<usize>() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.err(format!("{what} out of range: {text}"))
            }
        }
    }
}

/// Loads a `P5` or `P2` PGM file into a positive `[0, 1]` grid with `h = 1`.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<ImageGrid> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cur = Cursor {
        bytes: &bytes,
        pos: 0,
        path,
    };

    let binary = match bytes.get(0..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return cur.err("expected magic P5 or P2"),
    };
    cur.pos = 2;

    let width = cur.read_uint("width")?;
    let height = cur.read_uint("height")?;
    if width == 0 || height == 0 {
        return cur.err(format!("degenerate image dimensions {width}x{height}"));
    }
    let maxval = cur.read_uint("maxval")?;
    if maxval != 255 && maxval != 65535 {
        return cur.err(format!("unsupported maxval {maxval} (expected 255 or 65535)"));
    }

    let count = width * height;
    let mut raw = Vec::with_capacity(count);
    if binary {
        // Exactly one whitespace byte separates the maxval from the payload.
        match cur.peek() {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return cur.err("expected single whitespace before binary payload"),
        }
        let sample_bytes = if maxval == 255 { 1 } else { 2 };
        let needed = count * sample_bytes;
        let available = bytes.len() - cur.pos;
        if available < needed {
            cur.pos = bytes.len();
            return cur.err(format!(
                "truncated payload: expected {needed} bytes, found {available}"
            ));
        }
        for k in 0..count {
            let at = cur.pos + k * sample_bytes;
            let v = if sample_bytes == 1 {
                bytes[at] as usize
            } else {
                // big-endian per the PGM format
                ((bytes[at] as usize) << 8) | bytes[at + 1] as usize
            };
            raw.push(v);
        }
    } else {
        for _ in 0..count {
            cur.skip_separators();
            if cur.peek().is_none() {
                return cur.err(format!(
                    "truncated payload: expected {count} samples, found {}",
                    raw.len()
                ));
            }
            let v = cur.read_uint("sample")?;
            if v > maxval {
                return cur.err(format!("sample {v} exceeds maxval {maxval}"));
            }
            raw.push(v);
        }
    }

    let maxval = maxval as f64;
    let data = raw
        .into_iter()
        .map(|v| (v as f64 / maxval).max(FLOOR_INTENSITY))
        .collect();
    ImageGrid::new(width, height, data)
}

/// Writes `grid` as binary `P5` with maxval 255.
pub fn save_pgm(grid: &ImageGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(grid.len() + 32);
    out.extend_from_slice(format!("P5\n{} {}\n255\n", grid.width(), grid.height()).as_bytes());
    for &v in grid.data() {
        let scaled = (v.clamp(0.0, 1.0) * 255.0).round();
        out.push(scaled as u8);
    }
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
