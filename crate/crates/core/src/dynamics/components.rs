//! Fatou components as 4-connected regions of `F_approx`, and where a map
//! sends them.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, Mask};
use crate::function::{word_map, EntireMap};
use crate::word::{Alphabet, ExtendedWord, Word};

/// Fraction of finite images that must land in one component.
pub const PLURALITY: f64 = 0.9;
pub const MIN_SAMPLES: usize = 16;

/// Per-pixel component labels; 0 means "not in the mask".
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentMap {
    grid: GridSpec,
    labels: Vec<u32>,
    pixels: Vec<Vec<usize>>,
}

impl ComponentMap {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn count(&self) -> usize {
        self.pixels.len()
    }

    pub fn label_at(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.grid.cols + col]
    }

    /// Row-major pixel indices of component `label` (1-based).
    pub fn pixels(&self, label: u32) -> &[usize] {
        &self.pixels[label as usize - 1]
    }

    pub fn size(&self, label: u32) -> usize {
        self.pixels(label).len()
    }

    /// Label of the component whose pixel contains `z`, if any.
    pub fn component_at(&self, z: num_complex::Complex64) -> Option<u32> {
        let (r, c) = self.grid.pixel_of(z)?;
        match self.label_at(r, c) {
            0 => None,
            l => Some(l),
        }
    }
}

/// 4-connected labelling, labels numbered by first pixel in row-major order.
pub fn label_components(mask: &Mask) -> ComponentMap {
    let g = *mask.grid();
    let mut labels = vec![0u32; g.len()];
    let mut pixels: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..g.len() {
        if !mask.bits()[start] || labels[start] != 0 {
            continue;
        }
        let label = pixels.len() as u32 + 1;
        let mut members = Vec::new();
        labels[start] = label;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            members.push(p);
            let (r, c) = (p / g.cols, p % g.cols);
            let mut visit = |q: usize| {
                if mask.bits()[q] && labels[q] == 0 {
                    labels[q] = label;
                    queue.push_back(q);
                }
            };
            if r > 0 {
                visit(p - g.cols);
            }
            if r + 1 < g.rows {
                visit(p + g.cols);
            }
            if c > 0 {
                visit(p - 1);
            }
            if c + 1 < g.cols {
                visit(p + 1);
            }
        }
        members.sort_unstable();
        pixels.push(members);
    }
    ComponentMap { grid: g, labels, pixels }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageVerdict {
    Target(u32),
    Escaped,
    Split,
    OffGrid,
}

impl ImageVerdict {
    pub fn resolved(&self) -> Option<u32> {
        match self {
            ImageVerdict::Target(l) => Some(*l),
            _ => None,
        }
    }
}

/// Where `map` sends component `label`, judged from up to `samples` evenly
/// spaced pixel centers.
///
/// * `Escaped`: at least 90% of images are non-finite or beyond `escape_radius`.
/// * `Target(l)`: at least 90% of the finite images land in component `l`.
/// * `OffGrid`: at least 90% of images left the window (or escaped).
/// * `Split`: anything else.
pub fn component_image(
    label: u32,
    map: &EntireMap,
    components: &ComponentMap,
    samples: usize,
    escape_radius: f64,
) -> ImageVerdict {
    let pixels = components.pixels(label);
    let n = samples.max(MIN_SAMPLES).min(pixels.len());
    let grid = components.grid();
    let (mut escaped, mut off) = (0usize, 0usize);
    let mut hits: BTreeMap<u32, usize> = BTreeMap::new();
    for k in 0..n {
        let p = pixels[k * pixels.len() / n];
        let w = map.eval(grid.point_at(p));
        if !w.is_finite() || w.norm() > escape_radius {
            escaped += 1;
            continue;
        }
        match grid.pixel_of(w) {
            None => off += 1,
            Some((r, c)) => *hits.entry(components.label_at(r, c)).or_default() += 1,
        }
    }
    let finite = n - escaped;
    if escaped as f64 >= PLURALITY * n as f64 {
        return ImageVerdict::Escaped;
    }
    let best = hits
        .iter()
        .filter(|(&l, _)| l != 0)
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)));
    if let Some((&l, &count)) = best {
        if count as f64 >= PLURALITY * finite as f64 {
            return ImageVerdict::Target(l);
        }
    }
    if (off + escaped) as f64 >= PLURALITY * n as f64 {
        ImageVerdict::OffGrid
    } else {
        ImageVerdict::Split
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub samples: usize,
    /// Components smaller than this are skipped.
    pub min_component_size: usize,
    /// Only the largest components are probed.
    pub max_components: usize,
    pub include_identity: bool,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            samples: 64,
            min_component_size: 16,
            max_components: 8,
            include_identity: false,
        }
    }
}

/// Components worth probing: large enough, largest first, reported by label.
pub fn select_components(components: &ComponentMap, opts: &ProbeOptions) -> Vec<u32> {
    let mut ls: Vec<u32> = (1..=components.count() as u32)
        .filter(|&l| components.size(l) >= opts.min_component_size)
        .collect();
    ls.sort_by_key(|&l| (std::cmp::Reverse(components.size(l)), l));
    ls.truncate(opts.max_components);
    ls.sort_unstable();
    ls
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentStabilizer {
    pub label: u32,
    pub size: usize,
    /// Budget words `w` with `U_w = U`.
    pub stabilizer: Vec<ExtendedWord>,
    /// Image verdict for every probed word, in budget order.
    pub images: Vec<(ExtendedWord, ImageVerdict)>,
    /// Pairs `(u, v)` in the stabilizer whose in-budget product is not.
    pub closure_violations: Vec<(Word, Word)>,
}

/// For each selected component and each budget word, whether the word maps
/// the component back into itself.
pub fn stabilizer_probe(
    alphabet: &Alphabet,
    components: &ComponentMap,
    generators: &[EntireMap],
    words: &[Word],
    escape_radius: f64,
    opts: &ProbeOptions,
) -> crate::error::Result<Vec<ComponentStabilizer>> {
    let mut probe: Vec<(ExtendedWord, EntireMap)> = Vec::new();
    if opts.include_identity {
        probe.push((ExtendedWord::Identity, EntireMap::identity()));
    }
    for w in words {
        probe.push((ExtendedWord::Word(w.clone()), word_map(w, generators)?));
    }
    let max_len = words.iter().map(Word::len).max().unwrap_or(0);
    Ok(select_components(components, opts)
        .into_iter()
        .map(|label| {
            let images: Vec<(ExtendedWord, ImageVerdict)> = probe
                .iter()
                .map(|(w, m)| (w.clone(), component_image(label, m, components, opts.samples, escape_radius)))
                .collect();
            let stabilizer: Vec<ExtendedWord> = images
                .iter()
                .filter(|(_, v)| *v == ImageVerdict::Target(label))
                .map(|(w, _)| w.clone())
                .collect();
            let plain: Vec<&Word> = stabilizer.iter().filter_map(ExtendedWord::as_word).collect();
            let mut closure_violations = Vec::new();
            for u in &plain {
                for v in &plain {
                    if u.len() + v.len() <= max_len {
                        let uv = ExtendedWord::Word(alphabet.compose(u, v));
                        if !stabilizer.contains(&uv) {
                            closure_violations.push(((*u).clone(), (*v).clone()));
                        }
                    }
                }
            }
            ComponentStabilizer {
                label,
                size: components.size(label),
                stabilizer,
                images,
                closure_violations,
            }
        })
        .collect())
}
