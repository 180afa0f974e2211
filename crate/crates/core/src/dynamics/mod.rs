//! Pixel-level approximations of escaping, Julia and Fatou sets.

pub mod components;
pub mod compare;
pub mod escape;
pub mod grid;
pub mod morphology;

pub use compare::{mask_compare, mask_subset_violations, MaskComparison};
pub use components::{
    component_image, label_components, stabilizer_probe, ComponentMap, ComponentStabilizer, ImageVerdict,
    ProbeOptions,
};
pub use escape::{escaping_mask, EscapeResult, VerdictCube, WordBudget};
pub use grid::{GridSpec, Mask, MaskKind, DEFAULT_PIXEL_CAP};
pub use morphology::{boundary, boundary_via_complement, fatou_julia_masks};
