//! 3×3 (8-neighbourhood) binary morphology. The outermost ring of pixels is
//! the frame: interior and boundary are undefined there and come out unset.

use super::grid::{Mask, MaskKind};

/// Pixels whose whole 3×3 neighbourhood is set.
pub fn erode(mask: &Mask) -> Mask {
    let g = *mask.grid();
    Mask::from_fn(g, MaskKind::Custom, |r, c| {
        !g.is_frame(r, c) && neighbourhood(r, c).all(|(dr, dc)| mask.get(dr, dc))
    })
}

/// Pixels whose 3×3 neighbourhood meets the mask.
pub fn dilate(mask: &Mask) -> Mask {
    let g = *mask.grid();
    Mask::from_fn(g, MaskKind::Custom, |r, c| {
        !g.is_frame(r, c) && neighbourhood(r, c).any(|(dr, dc)| mask.get(dr, dc))
    })
}

/// Non-frame pixels whose 3×3 neighbourhood meets both the mask and its complement.
pub fn boundary(mask: &Mask) -> Mask {
    let g = *mask.grid();
    Mask::from_fn(g, MaskKind::Julia, |r, c| {
        if g.is_frame(r, c) {
            return false;
        }
        let first = mask.get(r - 1, c - 1);
        neighbourhood(r, c).any(|(dr, dc)| mask.get(dr, dc) != first)
    })
}

/// The same boundary computed on the complement side: `dilate(¬I) ∖ erode(¬I)`.
pub fn boundary_via_complement(mask: &Mask) -> Mask {
    let outside = mask.complement();
    let grown = dilate(&outside);
    let core = erode(&outside);
    let bits = grown.bits().iter().zip(core.bits()).map(|(&a, &b)| a && !b).collect();
    Mask::from_bits(*mask.grid(), bits, MaskKind::Julia).expect("same grid")
}

/// `(F_approx, J_approx)` from `I_approx`: F is the interior of I together with
/// the interior of its complement, J is the boundary of I. Together with the
/// frame they partition the grid.
pub fn fatou_julia_masks(i_mask: &Mask) -> (Mask, Mask) {
    let inner = erode(i_mask);
    let outer = erode(&i_mask.complement());
    let bits = inner.bits().iter().zip(outer.bits()).map(|(&a, &b)| a || b).collect();
    let f = Mask::from_bits(*i_mask.grid(), bits, MaskKind::Fatou).expect("same grid");
    (f, boundary(i_mask))
}

fn neighbourhood(r: usize, c: usize) -> impl Iterator<Item = (usize, usize)> {
    (r - 1..=r + 1).flat_map(move |rr| (c - 1..=c + 1).map(move |cc| (rr, cc)))
}
