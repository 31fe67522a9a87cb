//! Packed binary rasters with exact set algebra.

use crate::error::{Error, Result};

/// Row-major bit grid. Bit `(row, col)` lives at flat index `row * width + col`;
/// bits past `width * height` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MaskGrid {
    width: u32,
    height: u32,
    words: Vec<u64>,
}

impl std::fmt::Debug for MaskGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "MaskGrid {}x{} ({} set)", self.width, self.height, self.count())?;
        if self.width <= 64 && self.height <= 64 {
            for r in 0..self.height {
                let line: String = (0..self.width).map(|c| if self.get(r, c) { '#' } else { '.' }).collect();
                writeln!(f, "{line}")?;
            }
        }
        Ok(())
    }
}

impl MaskGrid {
    pub fn new(width: u32, height: u32) -> Self {
        let n = width as usize * height as usize;
        MaskGrid { width, height, words: vec![0; n.div_ceil(64)] }
    }

    pub fn full(width: u32, height: u32) -> Self {
        let mut m = Self::new(width, height);
        m.words.iter_mut().for_each(|w| *w = !0);
        m.clear_tail();
        m
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut m = Self::new(width, height);
        for r in 0..height {
            for c in 0..width {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn area(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn same_shape(&self, other: &MaskGrid) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn check_shape(&self, other: &MaskGrid) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(self.width, self.height, other.width, other.height))
        }
    }

    #[inline]
    fn index(&self, row: u32, col: u32) -> usize {
        debug_assert!(row < self.height && col < self.width);
        row as usize * self.width as usize + col as usize
    }

    #[inline]
    pub fn get(&self, row: u32, col: u32) -> bool {
        let i = self.index(row, col);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Like `get`, but out-of-range coordinates read as unset.
    #[inline]
    pub fn get_signed(&self, row: i64, col: i64) -> bool {
        row >= 0 && col >= 0 && row < self.height as i64 && col < self.width as i64 && self.get(row as u32, col as u32)
    }

    #[inline]
    pub fn set(&mut self, row: u32, col: u32, value: bool) {
        let i = self.index(row, col);
        if value {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    /// Sets columns `c0..c1` of `row`.
    pub fn fill_span(&mut self, row: u32, c0: u32, c1: u32) {
        if c0 >= c1 {
            return;
        }
        let mut i = self.index(row, c0);
        let end = i + (c1 - c0) as usize;
        while i < end {
            let bit = i % 64;
            let take = (64 - bit).min(end - i);
            let chunk = if take == 64 { !0 } else { ((1u64 << take) - 1) << bit };
            self.words[i / 64] |= chunk;
            i += take;
        }
    }

    fn clear_tail(&mut self) {
        let n = self.area();
        if !n.is_multiple_of(64) {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << (n % 64)) - 1;
            }
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &MaskGrid) {
        assert!(self.same_shape(other));
        self.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a |= b);
    }

    pub fn intersect_with(&mut self, other: &MaskGrid) {
        assert!(self.same_shape(other));
        self.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a &= b);
    }

    pub fn subtract(&mut self, other: &MaskGrid) {
        assert!(self.same_shape(other));
        self.words.iter_mut().zip(&other.words).for_each(|(a, b)| *a &= !b);
    }

    pub fn union(&self, other: &MaskGrid) -> MaskGrid {
        let mut m = self.clone();
        m.union_with(other);
        m
    }

    pub fn intersection(&self, other: &MaskGrid) -> MaskGrid {
        let mut m = self.clone();
        m.intersect_with(other);
        m
    }

    pub fn difference(&self, other: &MaskGrid) -> MaskGrid {
        let mut m = self.clone();
        m.subtract(other);
        m
    }

    pub fn complement(&self) -> MaskGrid {
        let mut m = self.clone();
        m.words.iter_mut().for_each(|w| *w = !*w);
        m.clear_tail();
        m
    }

    pub fn intersection_count(&self, other: &MaskGrid) -> usize {
        assert!(self.same_shape(other));
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn union_count(&self, other: &MaskGrid) -> usize {
        assert!(self.same_shape(other));
        self.words.iter().zip(&other.words).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn intersects(&self, other: &MaskGrid) -> bool {
        assert!(self.same_shape(other));
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// Iterates set pixels as `(row, col)` in row-major order.
    pub fn iter_set(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width as usize;
        self.words.iter().enumerate().flat_map(move |(wi, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let i = wi * 64 + b;
                Some(((i / w) as u32, (i % w) as u32))
            })
        })
    }

    /// Topmost row containing a set pixel.
    pub fn top_row(&self) -> Option<u32> {
        let w = self.width as usize;
        self.words
            .iter()
            .enumerate()
            .find(|(_, &word)| word != 0)
            .map(|(wi, &word)| ((wi * 64 + word.trailing_zeros() as usize) / w) as u32)
    }

    /// Mean row index of set pixels.
    pub fn centroid_row(&self) -> Option<f64> {
        let n = self.count();
        (n > 0).then(|| self.iter_set().map(|(r, _)| r as f64).sum::<f64>() / n as f64)
    }

    /// Pixels of the mask with at least one 4-neighbour outside it; the image
    /// border counts as outside.
    pub fn boundary(&self) -> MaskGrid {
        let mut out = MaskGrid::new(self.width, self.height);
        for (r, c) in self.iter_set() {
            let (r, c) = (r as i64, c as i64);
            if !self.get_signed(r - 1, c)
                || !self.get_signed(r + 1, c)
                || !self.get_signed(r, c - 1)
                || !self.get_signed(r, c + 1)
            {
                out.set(r as u32, c as u32, true);
            }
        }
        out
    }

    /// Shifts the mask by `(dr, dc)`; pixels leaving the image are dropped.
    pub fn shifted(&self, dr: i64, dc: i64) -> MaskGrid {
        let mut out = MaskGrid::new(self.width, self.height);
        for (r, c) in self.iter_set() {
            let (nr, nc) = (r as i64 + dr, c as i64 + dc);
            if nr >= 0 && nc >= 0 && nr < self.height as i64 && nc < self.width as i64 {
                out.set(nr as u32, nc as u32, true);
            }
        }
        out
    }
}

/// Intersection over union; 0 when both masks are empty.
pub fn mask_iou(a: &MaskGrid, b: &MaskGrid) -> Result<f64> {
    a.check_shape(b)?;
    let union = a.union_count(b);
    if union == 0 {
        return Ok(0.0);
    }
    Ok(a.intersection_count(b) as f64 / union as f64)
}
