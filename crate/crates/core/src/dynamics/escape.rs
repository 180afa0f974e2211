//! Escaping-set approximation: a pixel belongs to `I_approx` when the orbit of
//! its center escapes under every word of the budget.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, Mask, MaskKind};
use crate::error::{Error, Result};
use crate::function::{iterate, word_map, EntireMap, IterParams, Outcome};
use crate::oracle::Membership;
use crate::word::{enumerate_words, Alphabet, Word};

/// The finite set of words standing in for "every element of S".
#[derive(Debug, Clone, PartialEq)]
pub struct WordBudget {
    pub max_word_len: usize,
    pub words: Vec<Word>,
    pub params: IterParams,
}

impl WordBudget {
    /// Every word of length `<= max_word_len`.
    pub fn full(alphabet: &Alphabet, max_word_len: usize, params: IterParams) -> Result<Self> {
        if max_word_len == 0 {
            return Err(Error::invalid("word budget needs max_word_len >= 1"));
        }
        params.validate()?;
        Ok(WordBudget {
            max_word_len,
            words: enumerate_words(alphabet, max_word_len),
            params,
        })
    }

    /// The words of this budget accepted by `oracle`.
    pub fn filtered<M: Membership + ?Sized>(&self, oracle: &M) -> WordBudget {
        WordBudget {
            max_word_len: self.max_word_len,
            words: self.words.iter().filter(|w| oracle.contains(w)).cloned().collect(),
            params: self.params,
        }
    }
}

/// Compact per-pixel verdict kept in the cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubeCell {
    pub code: CellCode,
    pub steps: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum CellCode {
    Bounded = 0,
    Escaped = 1,
    /// Escaped through a non-finite iterate.
    Overflow = 2,
    Indeterminate = 3,
}

impl CubeCell {
    pub fn escaped(&self) -> bool {
        matches!(self.code, CellCode::Escaped | CellCode::Overflow)
    }
}

/// Per-word, per-pixel verdicts. Word-major, then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VerdictCube {
    pub grid: GridSpec,
    pub words: Vec<String>,
    pub params: IterParams,
    cells: Vec<CubeCell>,
}

pub const CUBE_MAGIC: &[u8; 8] = b"SGLCUBE1";

#[derive(Debug, Serialize, Deserialize)]
pub struct CubeHeader {
    pub grid: GridSpec,
    pub words: Vec<String>,
    #[serde(rename = "N")]
    pub max_steps: u32,
    #[serde(rename = "R")]
    pub escape_radius: f64,
    pub layout: String,
}

impl VerdictCube {
    pub fn cell(&self, word: usize, pixel: usize) -> CubeCell {
        self.cells[word * self.grid.len() + pixel]
    }

    pub fn word_mask(&self, word: usize) -> Mask {
        let n = self.grid.len();
        let bits = self.cells[word * n..(word + 1) * n].iter().map(CubeCell::escaped).collect();
        Mask::from_bits(self.grid, bits, MaskKind::Escaping).expect("cube slice matches grid")
    }

    pub fn overflow_count(&self) -> usize {
        self.cells.iter().filter(|c| c.code == CellCode::Overflow).count()
    }

    /// Little-endian layout: magic `SGLCUBE1`, then `u32` rows, cols, word
    /// count, N, then `f64` R, then one 5-byte record per cell
    /// (`u8` code, `u32` steps), word-major then row-major.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + 5 * self.cells.len());
        out.extend_from_slice(CUBE_MAGIC);
        for v in [
            self.grid.rows as u32,
            self.grid.cols as u32,
            self.words.len() as u32,
            self.params.max_steps,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.params.escape_radius.to_le_bytes());
        for c in &self.cells {
            out.push(c.code as u8);
            out.extend_from_slice(&c.steps.to_le_bytes());
        }
        out
    }

    pub fn header(&self) -> CubeHeader {
        CubeHeader {
            grid: self.grid,
            words: self.words.clone(),
            max_steps: self.params.max_steps,
            escape_radius: self.params.escape_radius,
            layout: "SGLCUBE1 u32le rows,cols,words,N f64le R; records u8 code (0 bounded,1 escaped,2 overflow,3 indeterminate) + u32le steps; word-major, row-major".into(),
        }
    }

    /// Writes `<stem>.cube` and the `<stem>.cube.json` sidecar.
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::File::create(path)?.write_all(&self.to_bytes())?;
        let sidecar = path.with_extension("cube.json");
        std::fs::write(sidecar, serde_json::to_string_pretty(&self.header())? + "\n")?;
        Ok(())
    }

    pub fn from_bytes(bytes: &[u8], words: Vec<String>, grid: GridSpec) -> Result<Self> {
        let bad = || Error::invalid("malformed verdict cube");
        let rest = bytes.strip_prefix(CUBE_MAGIC).ok_or_else(bad)?;
        let u32_at = |i: usize| -> Result<u32> {
            Ok(u32::from_le_bytes(rest.get(i..i + 4).ok_or_else(bad)?.try_into().unwrap()))
        };
        let (rows, cols, nwords, max_steps) = (u32_at(0)?, u32_at(4)?, u32_at(8)?, u32_at(12)?);
        if rows as usize != grid.rows || cols as usize != grid.cols || nwords as usize != words.len() {
            return Err(bad());
        }
        let r = f64::from_le_bytes(rest.get(16..24).ok_or_else(bad)?.try_into().unwrap());
        let body = &rest[24..];
        if body.len() != 5 * grid.len() * words.len() {
            return Err(bad());
        }
        let cells = body
            .chunks_exact(5)
            .map(|c| {
                let code = match c[0] {
                    0 => CellCode::Bounded,
                    1 => CellCode::Escaped,
                    2 => CellCode::Overflow,
                    3 => CellCode::Indeterminate,
                    _ => return Err(bad()),
                };
                Ok(CubeCell {
                    code,
                    steps: u32::from_le_bytes(c[1..5].try_into().unwrap()),
                })
            })
            .collect::<Result<_>>()?;
        Ok(VerdictCube {
            grid,
            words,
            params: IterParams {
                max_steps,
                escape_radius: r,
            },
            cells,
        })
    }
}

pub struct EscapeResult {
    pub mask: Mask,
    pub cube: VerdictCube,
}

/// `I_approx`: pixels whose orbit escapes under every budget word.
///
/// Rows are classified in parallel on the current rayon pool; the result does
/// not depend on the number of workers.
pub fn escaping_mask(
    alphabet: &Alphabet,
    generators: &[EntireMap],
    grid: &GridSpec,
    budget: &WordBudget,
) -> Result<EscapeResult> {
    grid.validate(super::grid::DEFAULT_PIXEL_CAP)?;
    if budget.words.is_empty() {
        return Err(Error::invalid("word budget is empty"));
    }
    if generators.len() != alphabet.len() {
        return Err(Error::invalid("one generator per alphabet letter is required"));
    }
    budget.params.validate()?;
    let maps = budget
        .words
        .iter()
        .map(|w| word_map(w, generators))
        .collect::<Result<Vec<_>>>()?;
    let nw = maps.len();
    let params = budget.params;

    // pixel-major while computing, one row per task
    let rows: Vec<Vec<CubeCell>> = (0..grid.rows)
        .into_par_iter()
        .map(|row| {
            let mut out = Vec::with_capacity(grid.cols * nw);
            for col in 0..grid.cols {
                let z = grid.point(row, col);
                out.extend(maps.iter().map(|m| to_cell(iterate(m, z, params))));
            }
            out
        })
        .collect();

    let n = grid.len();
    let mut cells = vec![
        CubeCell {
            code: CellCode::Indeterminate,
            steps: 0
        };
        n * nw
    ];
    let mut bits = vec![false; n];
    for (row, chunk) in rows.into_iter().enumerate() {
        for (col, per_word) in chunk.chunks_exact(nw).enumerate() {
            let p = row * grid.cols + col;
            bits[p] = per_word.iter().all(CubeCell::escaped);
            for (w, cell) in per_word.iter().enumerate() {
                cells[w * n + p] = *cell;
            }
        }
    }
    Ok(EscapeResult {
        mask: Mask::from_bits(*grid, bits, MaskKind::Escaping)?,
        cube: VerdictCube {
            grid: *grid,
            words: budget.words.iter().map(|w| alphabet.display(w).to_string()).collect(),
            params,
            cells,
        },
    })
}

fn to_cell(v: crate::function::OrbitVerdict) -> CubeCell {
    let code = match v.outcome {
        Outcome::Escaped { overflow: true, .. } => CellCode::Overflow,
        Outcome::Escaped { .. } => CellCode::Escaped,
        Outcome::Bounded { .. } => CellCode::Bounded,
        Outcome::Indeterminate => CellCode::Indeterminate,
    };
    CubeCell {
        code,
        steps: v.steps_used,
    }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    fn small_grid() -> GridSpec {
        GridSpec::from_bounds((-2.0, 4.0), (-3.0, 3.0), 24, 24).unwrap()
    }

    #[test]
    fn sin_origin_not_escaping() {
        let a = Alphabet::with_size(1, false).unwrap();
        // odd size puts a pixel center on 0
        let g = GridSpec::new(Complex64::new(0.0, 0.0), 2.0, 2.0, 5, 5).unwrap();
        let b = WordBudget::full(&a, 2, IterParams::default()).unwrap();
        let r = escaping_mask(&a, &[EntireMap::sin()], &g, &b).unwrap();
        assert!(!r.mask.get(2, 2));
    }

    #[test]
    fn exp_large_positive_reals_escape() {
        let a = Alphabet::with_size(1, false).unwrap();
        let g = small_grid();
        let b = WordBudget::full(&a, 1, IterParams::default()).unwrap();
        let r = escaping_mask(&a, &[EntireMap::exp()], &g, &b).unwrap();
        // pixels on the real axis neighbourhood with re > 1
        for col in 0..g.cols {
            let z = g.point(11, col);
            if z.re > 1.0 {
                assert!(r.mask.get(11, col), "{z}");
            }
        }
    }

    #[test]
    fn cube_round_trip_and_mask_agree() {
        let a = Alphabet::with_size(2, false).unwrap();
        let g = small_grid();
        let b = WordBudget::full(&a, 2, IterParams::new(30, 1e8).unwrap()).unwrap();
        let r = escaping_mask(&a, &[EntireMap::sin(), EntireMap::cos()], &g, &b).unwrap();
        let back = VerdictCube::from_bytes(&r.cube.to_bytes(), r.cube.words.clone(), g).unwrap();
        assert_eq!(back, r.cube);
        let mut inter = vec![true; g.len()];
        for w in 0..b.words.len() {
            for (p, bit) in r.cube.word_mask(w).bits().iter().enumerate() {
                inter[p] &= bit;
            }
        }
        assert_eq!(r.mask.bits(), &inter[..]);
    }

    #[test]
    fn empty_budget_rejected() {
        let a = Alphabet::with_size(1, false).unwrap();
        let b = WordBudget {
            max_word_len: 1,
            words: vec![],
            params: IterParams::default(),
        };
        assert!(escaping_mask(&a, &[EntireMap::exp()], &small_grid(), &b).is_err());
    }
}
