use serde::{Deserialize, Serialize};

use super::bbox::BBox;
use crate::error::{Error, Result};

/// Binary mask stored as COCO-style run lengths.
///
/// Pixels are scanned in column-major order (down each column, then to the next
/// column). Runs alternate background/foreground and always start with a
/// background run, which may be zero. The stored form is canonical: no run other
/// than the first is zero, so equal masks have equal run vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    runs: Vec<u32>,
}

impl BinaryMask {
    /// Builds a mask from run lengths, merging zero-length interior runs.
    pub fn from_runs(width: u32, height: u32, runs: &[u32]) -> Result<Self> {
        let total: u64 = runs.iter().map(|&r| r as u64).sum();
        let expected = width as u64 * height as u64;
        if total != expected {
            return Err(Error::input(format!(
                "run lengths sum to {total}, expected {width}x{height} = {expected}"
            )));
        }
        Ok(BinaryMask { width, height, runs: canonical_runs(runs) })
    }

    pub fn empty(width: u32, height: u32) -> Self {
        let n = width * height;
        BinaryMask { width, height, runs: if n == 0 { vec![] } else { vec![n] } }
    }

    /// Builds from a column-major pixel slice of length `width * height`.
    pub fn from_column_major(width: u32, height: u32, pixels: &[bool]) -> Result<Self> {
        if pixels.len() != (width * height) as usize {
            return Err(Error::input("pixel buffer does not match mask dimensions"));
        }
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0u32;
        for &p in pixels {
            if p != current {
                runs.push(len);
                len = 0;
                current = p;
            }
            len += 1;
        }
        if len > 0 || !runs.is_empty() {
            runs.push(len);
        }
        Ok(BinaryMask { width, height, runs: canonical_runs(&runs) })
    }

    /// Builds from a row-major pixel slice, the usual image layout.
    pub fn from_row_major(width: u32, height: u32, pixels: &[bool]) -> Result<Self> {
        if pixels.len() != (width * height) as usize {
            return Err(Error::input("pixel buffer does not match mask dimensions"));
        }
        let (w, h) = (width as usize, height as usize);
        let mut col_major = vec![false; w * h];
        for r in 0..h {
            for c in 0..w {
                col_major[c * h + r] = pixels[r * w + c];
            }
        }
        Self::from_column_major(width, height, &col_major)
    }

    /// Rasterizes a box: a pixel is set when its center lies inside the box.
    pub fn from_box(width: u32, height: u32, bbox: &BBox) -> Self {
        let (c0, c1) = center_span(bbox.x1, bbox.x2, width);
        let (r0, r1) = center_span(bbox.y1, bbox.y2, height);
        if c0 >= c1 || r0 >= r1 {
            return Self::empty(width, height);
        }
        let mut runs = Vec::with_capacity(2 * (c1 - c0) as usize + 1);
        let mut pos = 0u32;
        for c in c0..c1 {
            let start = c * height + r0;
            runs.push(start - pos);
            runs.push(r1 - r0);
            pos = start + (r1 - r0);
        }
        runs.push(width * height - pos);
        BinaryMask { width, height, runs: canonical_runs(&runs) }
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn runs(&self) -> &[u32] {
        &self.runs
    }

    /// Number of foreground pixels.
    pub fn area(&self) -> u64 {
        self.runs.iter().skip(1).step_by(2).map(|&r| r as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.area() == 0
    }

    /// Foreground intervals `[start, end)` over column-major linear indices.
    pub fn intervals(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let mut pos = 0u32;
        self.runs.iter().enumerate().filter_map(move |(i, &r)| {
            let start = pos;
            pos += r;
            (i % 2 == 1 && r > 0).then_some((start, pos))
        })
    }

    pub fn to_column_major(&self) -> Vec<bool> {
        let mut out = vec![false; (self.width * self.height) as usize];
        for (s, e) in self.intervals() {
            out[s as usize..e as usize].iter_mut().for_each(|p| *p = true);
        }
        out
    }

    pub fn get(&self, col: u32, row: u32) -> bool {
        let idx = col * self.height + row;
        self.intervals().any(|(s, e)| s <= idx && idx < e)
    }

    pub fn check_same_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::input(format!(
                "mask dimension mismatch: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }

    /// Number of foreground pixels shared with `other`, computed on runs.
    pub fn intersection_area(&self, other: &BinaryMask) -> Result<u64> {
        self.check_same_dims(other)?;
        let a: Vec<(u32, u32)> = self.intervals().collect();
        let b: Vec<(u32, u32)> = other.intervals().collect();
        let (mut i, mut j, mut total) = (0, 0, 0u64);
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if hi > lo {
                total += (hi - lo) as u64;
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Ok(total)
    }

    /// Tightest box around the foreground; `(0,0,0,0)` for an empty mask.
    pub fn to_box(&self) -> BBox {
        mask_to_box(self)
    }
}

fn center_span(lo: f64, hi: f64, limit: u32) -> (u32, u32) {
    // pixel k is covered when lo <= k + 0.5 < hi
    let first = (lo - 0.5).ceil().max(0.0);
    let last = (hi - 0.5).ceil().max(0.0);
    let first = (first as u64).min(limit as u64) as u32;
    let last = (last as u64).min(limit as u64) as u32;
    (first, last.max(first))
}

fn canonical_runs(runs: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::with_capacity(runs.len());
    for (i, &r) in runs.iter().enumerate() {
        if i == 0 {
            out.push(r);
            continue;
        }
        if r == 0 {
            continue;
        }
        // parity of the output must match the parity of the input run
        let want_fg = i % 2 == 1;
        let last_is_fg = (out.len() - 1) % 2 == 1;
        if want_fg == last_is_fg {
            *out.last_mut().unwrap() += r;
        } else {
            out.push(r);
        }
    }
    // a trailing all-zero encoding of a 0-pixel mask is []
    if out.len() == 1 && out[0] == 0 {
        out.clear();
    }
    out
}

/// Foreground IoU of two masks of equal size; 0 when both are empty.
pub fn mask_iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    let inter = a.intersection_area(b)?;
    let union = a.area() + b.area() - inter;
    Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}

pub fn mask_to_box(m: &BinaryMask) -> BBox {
    let h = m.height;
    if h == 0 {
        return BBox::default();
    }
    let mut bounds: Option<(u32, u32, u32, u32)> = None;
    for (s, e) in m.intervals() {
        let (c0, c1) = (s / h, (e - 1) / h);
        let (r0, r1) = if c0 == c1 { (s % h, (e - 1) % h) } else { (0, h - 1) };
        bounds = Some(match bounds {
            None => (c0, r0, c1, r1),
            Some((a, b, c, d)) => (a.min(c0), b.min(r0), c.max(c1), d.max(r1)),
        });
    }
    match bounds {
        None => BBox::default(),
        Some((c0, r0, c1, r1)) => BBox {
            x1: c0 as f64,
            y1: r0 as f64,
            x2: (c1 + 1) as f64,
            y2: (r1 + 1) as f64,
        },
    }
}

/// JSON form of an RLE mask: `{"size": [h, w], "counts": ...}` where counts is
/// either the compressed string or a plain list of run lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RleJson {
    pub size: [u32; 2],
    pub counts: RleCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RleCounts {
    Compressed(String),
    Runs(Vec<u32>),
}

impl RleJson {
    pub fn to_mask(&self) -> Result<BinaryMask> {
        let [h, w] = self.size;
        match &self.counts {
            RleCounts::Compressed(s) => decode_rle(s, w, h),
            RleCounts::Runs(r) => BinaryMask::from_runs(w, h, r),
        }
    }

    pub fn from_mask(m: &BinaryMask) -> Self {
        RleJson { size: [m.height, m.width], counts: RleCounts::Compressed(encode_rle(m)) }
    }
}

/// Encodes runs as the COCO compressed string (LEB128-like, 5 bits per char,
/// offset by 48, counts after the third stored as deltas to `runs[i-2]`).
pub fn encode_rle(m: &BinaryMask) -> String {
    let cnts = &m.runs;
    let mut s = String::with_capacity(cnts.len() * 2);
    for i in 0..cnts.len() {
        let mut x = cnts[i] as i64;
        if i > 2 {
            x -= cnts[i - 2] as i64;
        }
        loop {
            let mut c = (x & 0x1f) as u8;
            x >>= 5;
            let more = if c & 0x10 != 0 { x != -1 } else { x != 0 };
            if more {
                c |= 0x20;
            }
            s.push((c + 48) as char);
            if !more {
                break;
            }
        }
    }
    s
}

/// Decodes a COCO compressed RLE string for a `width x height` mask.
pub fn decode_rle(s: &str, width: u32, height: u32) -> Result<BinaryMask> {
    let bytes = s.as_bytes();
    let mut cnts: Vec<i64> = Vec::new();
    let mut p = 0;
    while p < bytes.len() {
        let mut x: i64 = 0;
        let mut k = 0;
        loop {
            let Some(&b) = bytes.get(p) else {
                return Err(Error::input("truncated RLE string"));
            };
            if !(48..48 + 64).contains(&b) {
                return Err(Error::input(format!("invalid RLE character {:?}", b as char)));
            }
            if k >= 12 {
                return Err(Error::input("RLE count overflow"));
            }
            let c = (b - 48) as i64;
            x |= (c & 0x1f) << (5 * k);
            p += 1;
            k += 1;
            if c & 0x20 == 0 {
                if c & 0x10 != 0 {
                    x |= -1i64 << (5 * k);
                }
                break;
            }
        }
        if cnts.len() > 2 {
            x += cnts[cnts.len() - 2];
        }
        if x < 0 || x > u32::MAX as i64 {
            return Err(Error::input(format!("RLE run {x} out of range")));
        }
        cnts.push(x);
    }
    let runs: Vec<u32> = cnts.into_iter().map(|c| c as u32).collect();
    BinaryMask::from_runs(width, height, &runs)
}
