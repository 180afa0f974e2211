use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest grid accepted by [`GridSpec::validate`].
pub const DEFAULT_PIXEL_CAP: usize = 4096 * 4096;

/// A rectangle of the plane sampled at pixel centers. Row 0 is the top
/// (largest imaginary part).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub center: [f64; 2],
    pub width: f64,
    pub height: f64,
    pub cols: usize,
    pub rows: usize,
}

impl GridSpec {
    pub fn new(center: Complex64, width: f64, height: f64, cols: usize, rows: usize) -> Result<Self> {
        let g = GridSpec {
            center: [center.re, center.im],
            width,
            height,
            cols,
            rows,
        };
        g.validate(DEFAULT_PIXEL_CAP)?;
        Ok(g)
    }

    /// Grid covering `[re_min, re_max] × [im_min, im_max]`.
    pub fn from_bounds(re: (f64, f64), im: (f64, f64), cols: usize, rows: usize) -> Result<Self> {
        GridSpec::new(
            Complex64::new((re.0 + re.1) / 2.0, (im.0 + im.1) / 2.0),
            re.1 - re.0,
            im.1 - im.0,
            cols,
            rows,
        )
    }

    pub fn validate(&self, pixel_cap: usize) -> Result<()> {
        let finite = self.center.iter().all(|c| c.is_finite()) && self.width.is_finite() && self.height.is_finite();
        if !finite || self.width <= 0.0 || self.height <= 0.0 {
            return Err(Error::invalid("grid width and height must be positive and finite"));
        }
        if self.cols == 0 || self.rows == 0 {
            return Err(Error::invalid("grid needs at least one row and one column"));
        }
        let requested = self.cols.saturating_mul(self.rows);
        if requested > pixel_cap {
            return Err(Error::ResourceCap {
                requested,
                cap: pixel_cap,
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(self.center[0], self.center[1])
    }

    pub fn point(&self, row: usize, col: usize) -> Complex64 {
        let x = ((col as f64 + 0.5) / self.cols as f64 - 0.5) * self.width;
        let y = (0.5 - (row as f64 + 0.5) / self.rows as f64) * self.height;
        Complex64::new(self.center[0] + x, self.center[1] + y)
    }

    pub fn point_at(&self, index: usize) -> Complex64 {
        self.point(index / self.cols, index % self.cols)
    }

    /// Pixel containing `z`, or `None` outside the window.
    pub fn pixel_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let u = (z.re - self.center[0]) / self.width + 0.5;
        let v = 0.5 - (z.im - self.center[1]) / self.height;
        let col = (u * self.cols as f64).floor();
        let row = (v * self.rows as f64).floor();
        if !(col >= 0.0 && row >= 0.0 && col < self.cols as f64 && row < self.rows as f64) {
            return None;
        }
        Some((row as usize, col as usize))
    }

    pub fn is_frame(&self, row: usize, col: usize) -> bool {
        row == 0 || col == 0 || row + 1 == self.rows || col + 1 == self.cols
    }

    pub fn pixel_area(&self) -> f64 {
        (self.width / self.cols as f64) * (self.height / self.rows as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaskKind {
    #[serde(rename = "I_approx")]
    Escaping,
    #[serde(rename = "J_approx")]
    Julia,
    #[serde(rename = "F_approx")]
    Fatou,
    #[serde(rename = "custom")]
    Custom,
}

/// Per-pixel boolean classification of a grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    grid: GridSpec,
    bits: Vec<bool>,
    kind: MaskKind,
}

impl Mask {
    pub fn empty(grid: GridSpec, kind: MaskKind) -> Self {
        Mask {
            grid,
            bits: vec![false; grid.len()],
            kind,
        }
    }

    pub fn from_bits(grid: GridSpec, bits: Vec<bool>, kind: MaskKind) -> Result<Self> {
        if bits.len() != grid.len() {
            return Err(Error::invalid(format!(
                "mask has {} bits for a {}x{} grid",
                bits.len(),
                grid.rows,
                grid.cols
            )));
        }
        Ok(Mask { grid, bits, kind })
    }

    pub fn from_fn(grid: GridSpec, kind: MaskKind, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let bits = (0..grid.len()).map(|i| f(i / grid.cols, i % grid.cols)).collect();
        Mask { grid, bits, kind }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kind(&self) -> MaskKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: MaskKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn rows(&self) -> usize {
        self.grid.rows
    }

    pub fn cols(&self) -> usize {
        self.grid.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.grid.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.grid.cols + col] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Mask {
        Mask {
            grid: self.grid,
            bits: self.bits.iter().map(|b| !b).collect(),
            kind: MaskKind::Custom,
        }
    }

    pub fn same_grid(&self, other: &Mask) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Binary PGM: `P5`, maxval 255, set pixels 255 and unset 0.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.grid.cols, self.grid.rows).into_bytes();
        out.extend(self.bits.iter().map(|&b| if b { 255u8 } else { 0u8 }));
        out
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_pgm())?;
        Ok(())
    }

    /// Reads a PGM written by [`Mask::to_pgm`]; any non-zero byte is set.
    pub fn from_pgm(grid: GridSpec, bytes: &[u8], kind: MaskKind) -> Result<Mask> {
        let header = format!("P5\n{} {}\n255\n", grid.cols, grid.rows);
        let body = bytes
            .strip_prefix(header.as_bytes())
            .ok_or_else(|| Error::invalid("PGM header does not match the grid"))?;
        Mask::from_bits(grid, body.iter().map(|&b| b != 0).collect(), kind)
    }
}
