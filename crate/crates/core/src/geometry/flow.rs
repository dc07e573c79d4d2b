use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Magic number opening every Middlebury `.flo` file.
pub const FLO_MAGIC: f32 = 202021.25;

/// Dense per-pixel displacement field, row-major `(du, dv)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: u32,
    height: u32,
    data: Vec<[f32; 2]>,
}

impl FlowField {
    pub fn new(width: u32, height: u32, data: Vec<[f32; 2]>) -> Result<Self> {
        if data.len() != width as usize * height as usize {
            return Err(Error::input(format!(
                "flow buffer has {} vectors, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if data.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::input("flow contains non-finite displacements"));
        }
        Ok(FlowField { width, height, data })
    }

    pub fn zeros(width: u32, height: u32) -> Self {
        FlowField { width, height, data: vec![[0.0, 0.0]; width as usize * height as usize] }
    }

    pub fn uniform(width: u32, height: u32, du: f32, dv: f32) -> Self {
        FlowField { width, height, data: vec![[du, dv]; width as usize * height as usize] }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn at(&self, col: u32, row: u32) -> [f32; 2] {
        self.data[(row * self.width + col) as usize]
    }

    #[inline]
    pub fn set(&mut self, col: u32, row: u32, v: [f32; 2]) {
        self.data[(row * self.width + col) as usize] = v;
    }

    pub fn data(&self) -> &[[f32; 2]] {
        &self.data
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.data.len() * 8);
        out.extend_from_slice(&FLO_MAGIC.to_le_bytes());
        out.extend_from_slice(&(self.width as i32).to_le_bytes());
        out.extend_from_slice(&(self.height as i32).to_le_bytes());
        for [u, v] in &self.data {
            out.extend_from_slice(&u.to_le_bytes());
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let word = |i: usize| -> [u8; 4] { bytes[i..i + 4].try_into().unwrap() };
        if bytes.len() < 12 {
            return Err(Error::input("flow file shorter than its 12-byte header"));
        }
        let magic = f32::from_le_bytes(word(0));
        if magic != FLO_MAGIC {
            return Err(Error::input(format!("bad .flo magic {magic}, expected {FLO_MAGIC}")));
        }
        let w = i32::from_le_bytes(word(4));
        let h = i32::from_le_bytes(word(8));
        if w < 0 || h < 0 {
            return Err(Error::input(format!("negative flow dimensions {w}x{h}")));
        }
        let n = w as usize * h as usize;
        if bytes.len() != 12 + n * 8 {
            return Err(Error::input(format!(
                "flow payload is {} bytes, expected {} for {w}x{h}",
                bytes.len() - 12,
                n * 8
            )));
        }
        let data = (0..n)
            .map(|i| {
                let o = 12 + i * 8;
                [f32::from_le_bytes(word(o)), f32::from_le_bytes(word(o + 4))]
            })
            .collect();
        FlowField::new(w as u32, h as u32, data)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }
}
