use serde::{Deserialize, Serialize};

use super::grid::Mask;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskComparison {
    pub jaccard: f64,
    pub a_minus_b: usize,
    pub b_minus_a: usize,
}

/// Jaccard similarity `|a∧b| / |a∨b|` (1.0 when both are empty) and the two
/// one-sided difference counts.
pub fn mask_compare(a: &Mask, b: &Mask) -> Result<MaskComparison> {
    a.same_grid(b)?;
    let (mut both, mut either, mut a_only, mut b_only) = (0usize, 0usize, 0usize, 0usize);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        both += (x && y) as usize;
        either += (x || y) as usize;
        a_only += (x && !y) as usize;
        b_only += (y && !x) as usize;
    }
    Ok(MaskComparison {
        jaccard: if either == 0 { 1.0 } else { both as f64 / either as f64 },
        a_minus_b: a_only,
        b_minus_a: b_only,
    })
}

/// Pixels in `a` but not in `b`; zero certifies `a ⊆ b` at this resolution.
pub fn mask_subset_violations(a: &Mask, b: &Mask) -> Result<usize> {
    a.same_grid(b)?;
    Ok(a.bits().iter().zip(b.bits()).filter(|(&x, &y)| x && !y).count())
}
