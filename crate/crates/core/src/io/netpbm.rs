//! Uncompressed Netpbm bitmaps.
//!
//! Masks are written as plain PBM (`P1`, `1` = set) or raw `P4`, and read
//! from either. Soft maps are written as plain PGM (`P2`, maxval 255) and read from
//! `P2` or raw `P5` with any maxval up to 65535; grey level `v` maps to
//! `v / maxval`.

use crate::error::{Error, Result};
use crate::eval::SoftMap;
use crate::mask::MaskGrid;

fn bad(message: impl Into<String>) -> Error {
    Error::Parse { path: "netpbm".into(), message: message.into() }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Result<u32> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(format!("expected a number at byte {start}")))
    }

    fn magic(&mut self) -> Result<&'a [u8]> {
        let m = self.bytes.get(..2).ok_or_else(|| bad("truncated header"))?;
        self.pos = 2;
        Ok(m)
    }

    /// Exactly one whitespace byte separates the header from raster data.
    fn raw_body(&mut self) -> Result<&'a [u8]> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => Ok(&self.bytes[self.pos + 1..]),
            _ => Err(bad("missing whitespace before raster data")),
        }
    }
}

fn dims(h: &mut Header<'_>) -> Result<(u32, u32)> {
    let (w, ht) = (h.number()?, h.number()?);
    if w == 0 || ht == 0 {
        return Err(Error::EmptyImage { width: w, height: ht });
    }
    Ok((w, ht))
}

pub fn read_pbm(bytes: &[u8]) -> Result<MaskGrid> {
    let mut h = Header { bytes, pos: 0 };
    let magic = h.magic()?;
    let (w, ht) = match magic {
        b"P1" | b"P4" => dims(&mut h)?,
        _ => return Err(bad("not a PBM file")),
    };
    let mut m = MaskGrid::new(w, ht);
    if magic == b"P1" {
        for r in 0..ht {
            for c in 0..w {
                h.skip_space();
                match h.bytes.get(h.pos) {
                    Some(b'0') => {}
                    Some(b'1') => m.set(r, c, true),
                    _ => return Err(bad(format!("bad pixel at row {r}, column {c}"))),
                }
                h.pos += 1;
            }
        }
    } else {
        let body = h.raw_body()?;
        let stride = w.div_ceil(8) as usize;
        if body.len() < stride * ht as usize {
            return Err(bad("truncated raster data"));
        }
        for r in 0..ht {
            let row = &body[r as usize * stride..];
            for c in 0..w {
                if row[c as usize / 8] & (0x80 >> (c % 8)) != 0 {
                    m.set(r, c, true);
                }
            }
        }
    }
    Ok(m)
}

pub fn write_pbm(mask: &MaskGrid) -> Vec<u8> {
    let mut out = format!("P1\n{} {}\n", mask.width(), mask.height()).into_bytes();
    for r in 0..mask.height() {
        for c in 0..mask.width() {
            if c > 0 {
                out.push(b' ');
            }
            out.push(if mask.get(r, c) { b'1' } else { b'0' });
        }
        out.push(b'\n');
    }
    out
}

/// Raw `P4` encoding, for bulk output.
pub fn write_pbm_raw(mask: &MaskGrid) -> Vec<u8> {
    let mut out = format!("P4\n{} {}\n", mask.width(), mask.height()).into_bytes();
    let stride = mask.width().div_ceil(8) as usize;
    for r in 0..mask.height() {
        let start = out.len();
        out.resize(start + stride, 0);
        for c in 0..mask.width() {
            if mask.get(r, c) {
                out[start + c as usize / 8] |= 0x80 >> (c % 8);
            }
        }
    }
    out
}

pub fn read_pgm(bytes: &[u8]) -> Result<SoftMap> {
    let mut h = Header { bytes, pos: 0 };
    let magic = h.magic()?;
    if magic != b"P2" && magic != b"P5" {
        return Err(bad("not a PGM file"));
    }
    let (w, ht) = dims(&mut h)?;
    let maxval = h.number()?;
    if maxval == 0 || maxval > 65535 {
        return Err(bad(format!("maxval {maxval} out of range")));
    }
    let n = w as usize * ht as usize;
    let mut levels = Vec::with_capacity(n);
    if magic == b"P2" {
        for _ in 0..n {
            levels.push(h.number()?);
        }
    } else {
        let body = h.raw_body()?;
        let width = if maxval < 256 { 1 } else { 2 };
        if body.len() < n * width {
            return Err(bad("truncated raster data"));
        }
        levels.extend(body.chunks_exact(width).take(n).map(|b| match b {
            [v] => u32::from(*v),
            [hi, lo] => u32::from(*hi) << 8 | u32::from(*lo),
            _ => unreachable!(),
        }));
    }
    if let Some(v) = levels.iter().find(|&&v| v > maxval) {
        return Err(bad(format!("grey level {v} exceeds maxval {maxval}")));
    }
    SoftMap::new(w, ht, levels.into_iter().map(|v| f64::from(v) / f64::from(maxval)).collect())
}

/// Values are quantized to the nearest of 256 levels.
pub fn write_pgm(map: &SoftMap) -> Vec<u8> {
    let mut out = format!("P2\n{} {}\n255\n", map.width(), map.height()).into_bytes();
    for row in map.values().chunks(map.width() as usize) {
        let line: Vec<String> = row.iter().map(|v| ((v * 255.0).round() as u8).to_string()).collect();
        out.extend(line.join(" ").as_bytes());
        out.push(b'\n');
    }
    out
}
