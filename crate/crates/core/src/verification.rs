//! Named, reproducible experiments relating the escaping, Julia and Fatou
//! approximations of a semigroup `S` and a subsemigroup `T`.
//!
//! Every check returns a [`TheoremReport`] whose verdict distinguishes an
//! unmet hypothesis (`hypothesis_failed`) and an inconclusive probe
//! (`indeterminate`) from a violated conclusion (`fail`).

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{BudgetDef, ExperimentDef, Semigroup, SemigroupDef};
use crate::dynamics::{
    boundary, boundary_via_complement, escaping_mask, fatou_julia_masks, label_components, mask_compare,
    mask_subset_violations, stabilizer_probe, GridSpec, ImageVerdict, Mask, MaskKind, ProbeOptions, VerdictCube,
    WordBudget,
};
use crate::error::{Error, Result};
use crate::function::word_map;
use crate::index::{cofinite_index, finite_index, rees_index, IndexVerdict};
use crate::oracle::{OracleDef, SubsemigroupOracle, CLOSURE_CHECK_LEN};
use crate::word::{Alphabet, Direction, ExtendedWord, Word};

/// Points used by the commutation spot-check.
pub const COMMUTATION_POINTS: usize = 32;
pub const COMMUTATION_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_INDEX: usize = 8;
pub const DEFAULT_SAMPLES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Monotonicity,
    IndexEquality,
    ReesEquality,
    BoundaryIdentity,
    FundamentalSet,
    CofiniteStabilizer,
    IndexGolden,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Monotonicity => "monotonicity",
            ExperimentKind::IndexEquality => "index_equality",
            ExperimentKind::ReesEquality => "rees_equality",
            ExperimentKind::BoundaryIdentity => "boundary_identity",
            ExperimentKind::FundamentalSet => "fundamental_set",
            ExperimentKind::CofiniteStabilizer => "cofinite_stabilizer",
            ExperimentKind::IndexGolden => "index_golden",
        }
    }

    fn default_anchor(&self) -> &'static str {
        match self {
            ExperimentKind::Monotonicity => "I(S) ⊆ I(T), F(S) ⊆ F(T), J(T) ⊆ J(S) for T ⊆ S",
            ExperimentKind::IndexEquality => "finite or cofinite index in an abelian S: I, J, F coincide",
            ExperimentKind::ReesEquality => "finite Rees index: I, J, F coincide",
            ExperimentKind::BoundaryIdentity => "J(S) = ∂I(S) and int I(S) ⊆ F(S)",
            ExperimentKind::FundamentalSet => "a fundamental set lies in F(S), and in I(S) when it covers R(S)",
            ExperimentKind::CofiniteStabilizer => "some component in a finite forward orbit has a stabilizer of cofinite index",
            ExperimentKind::IndexGolden => "index value of a worked example",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    Finite,
    Cofinite,
    Rees,
}

impl IndexKind {
    pub fn compute(
        &self,
        alphabet: &Alphabet,
        oracle: &SubsemigroupOracle,
        bound: usize,
        max_index: usize,
    ) -> Result<IndexVerdict> {
        match self {
            IndexKind::Finite => finite_index(alphabet, oracle, bound, max_index, Direction::Left),
            IndexKind::Cofinite => cofinite_index(alphabet, oracle, bound, max_index, Direction::Left),
            IndexKind::Rees => rees_index(alphabet, oracle, bound),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "sets")]
    pub min_jaccard_sets: f64,
    #[serde(default = "boundaries")]
    pub min_jaccard_boundary: f64,
    /// As a fraction of the pixels (or of the region's pixels).
    #[serde(default = "violations")]
    pub max_violation_fraction: f64,
}

fn sets() -> f64 {
    0.98
}

fn boundaries() -> f64 {
    0.95
}

fn violations() -> f64 {
    0.005
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            min_jaccard_sets: sets(),
            min_jaccard_boundary: boundaries(),
            max_violation_fraction: violations(),
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for v in [self.min_jaccard_sets, self.min_jaccard_boundary, self.max_violation_fraction] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("tolerance {v} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// A disk or axis-aligned rectangle in plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Region {
    Disk { center: [f64; 2], radius: f64 },
    Rect { re: [f64; 2], im: [f64; 2] },
}

impl Region {
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Region::Disk { center, radius } => (z - Complex64::new(center[0], center[1])).norm() < radius,
            Region::Rect { re, im } => z.re > re[0] && z.re < re[1] && z.im > im[0] && z.im < im[1],
        }
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            Region::Disk { center, radius } => (
                [center[0] - radius, center[0] + radius],
                [center[1] - radius, center[1] + radius],
            ),
            Region::Rect { re, im } => (re, im),
        }
    }

    fn validate(&self) -> Result<()> {
        let ([a, b], [c, d]) = self.bounds();
        if !(a < b && c < d) || ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("region has zero area"));
        }
        Ok(())
    }

    /// Deterministic, evenly spread interior points (sunflower for a disk,
    /// golden-ratio lattice for a rectangle).
    pub fn samples(&self, n: usize) -> Vec<Complex64> {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        (0..n)
            .map(|k| {
                let t = (k as f64 + 0.5) / n as f64;
                let s = ((k as f64 + 0.5) * golden).fract();
                match *self {
                    Region::Disk { center, radius } => {
                        let angle = 2.0 * std::f64::consts::PI * s;
                        Complex64::new(center[0], center[1]) + Complex64::from_polar(radius * t.sqrt(), angle)
                    }
                    Region::Rect { re, im } => {
                        Complex64::new(re[0] + t * (re[1] - re[0]), im[0] + s * (im[1] - im[0]))
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
    HypothesisFailed,
    /// The experiment's preconditions did not hold (non-abelian generators,
    /// inexact index, ...); nothing was measured.
    Refused,
}

/// Every truncation parameter an experiment ran under.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Truncation {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index_bound: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_word_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub words_s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub words_t: Option<usize>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u32>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub escape_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub experiment: String,
    pub kind: ExperimentKind,
    pub anchor: String,
    pub config_hash: String,
    pub verdict: Verdict,
    pub metrics: BTreeMap<String, Value>,
    pub details: Value,
    pub truncation: Truncation,
    pub notes: Vec<String>,
    /// Wall-clock time; the only field that varies between reruns.
    pub runtime_ms: u64,
}

/// Result of one check before it is wrapped into a report.
#[derive(Debug, Clone, Default)]
pub struct Check {
    pub verdict: Option<Verdict>,
    pub metrics: BTreeMap<String, Value>,
    pub details: Value,
    pub truncation: Truncation,
    pub notes: Vec<String>,
    /// Masks behind the metrics, for optional dumping.
    pub masks: Vec<(String, Mask)>,
}

impl Check {
    fn metric(&mut self, key: &str, v: impl Into<Value>) {
        self.metrics.insert(key.to_string(), v.into());
    }

    fn verdict(&self) -> Verdict {
        self.verdict.unwrap_or(Verdict::Indeterminate)
    }
}

/// An experiment together with every config section it references, so that
/// its hash covers everything that determines the outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Experiment {
    pub name: String,
    pub def: ExperimentDef,
    pub semigroup: SemigroupDef,
    pub oracle: Option<OracleDef>,
    pub grid: Option<GridSpec>,
    pub budget: Option<BudgetDef>,
}

impl Experiment {
    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn config_hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("experiment serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// The masks of one semigroup (or sub-budget) on a grid.
pub struct SetApprox {
    pub i: Mask,
    pub f: Mask,
    pub j: Mask,
    pub cube: VerdictCube,
}

pub fn approximate(sg: &Semigroup, grid: &GridSpec, budget: &WordBudget) -> Result<SetApprox> {
    let r = escaping_mask(&sg.alphabet, &sg.generators, grid, budget)?;
    let (f, j) = fatou_julia_masks(&r.mask);
    Ok(SetApprox {
        i: r.mask,
        f,
        j,
        cube: r.cube,
    })
}

fn budget_truncation(budget: &WordBudget, grid: &GridSpec) -> Truncation {
    Truncation {
        max_word_len: Some(budget.max_word_len),
        words_s: Some(budget.words.len()),
        max_steps: Some(budget.params.max_steps),
        escape_radius: Some(budget.params.escape_radius),
        grid: Some(*grid),
        ..Truncation::default()
    }
}

fn t_budget(budget: &WordBudget, oracle: &SubsemigroupOracle) -> Result<WordBudget> {
    let t = budget.filtered(oracle);
    if t.words.is_empty() {
        return Err(Error::invalid(format!(
            "no word of length <= {} lies in T",
            budget.max_word_len
        )));
    }
    Ok(t)
}

fn frac(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

/// `T ⊆ S` implies `I_S ⊆ I_T` (exactly), `F_S ⊆ F_T` and `J_T ⊆ J_S`
/// (within `tol.max_violation_fraction` of the pixels).
pub fn check_monotonicity(
    sg: &Semigroup,
    oracle: &SubsemigroupOracle,
    grid: &GridSpec,
    budget: &WordBudget,
    tol: &Tolerances,
) -> Result<Check> {
    let tb = t_budget(budget, oracle)?;
    let s = approximate(sg, grid, budget)?;
    let t = approximate(sg, grid, &tb)?;
    let n = grid.len();
    let vi = mask_subset_violations(&s.i, &t.i)?;
    let vf = mask_subset_violations(&s.f, &t.f)?;
    let vj = mask_subset_violations(&t.j, &s.j)?;
    let mut c = Check {
        truncation: Truncation {
            words_t: Some(tb.words.len()),
            ..budget_truncation(budget, grid)
        },
        ..Check::default()
    };
    c.metric("pixels", n);
    c.metric("i_violations", vi);
    c.metric("f_violations", vf);
    c.metric("j_violations", vj);
    c.metric("f_violation_fraction", frac(vf, n));
    c.metric("j_violation_fraction", frac(vj, n));
    c.metric("i_s_pixels", s.i.count());
    c.metric("i_t_pixels", t.i.count());
    let ok = vi == 0 && frac(vf, n) <= tol.max_violation_fraction && frac(vj, n) <= tol.max_violation_fraction;
    c.verdict = Some(if ok { Verdict::Pass } else { Verdict::Fail });
    c.masks = masks_of(s, t);
    Ok(c)
}

fn masks_of(s: SetApprox, t: SetApprox) -> Vec<(String, Mask)> {
    vec![
        ("I_S".into(), s.i),
        ("F_S".into(), s.f),
        ("J_S".into(), s.j),
        ("I_T".into(), t.i),
        ("F_T".into(), t.f),
        ("J_T".into(), t.j),
    ]
}

/// Compares every pair of generators at [`COMMUTATION_POINTS`] seeded random
/// points of the window. Returns the worst relative defect.
pub fn commutation_defect(sg: &Semigroup, grid: &GridSpec) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let c = grid.center();
    let points: Vec<Complex64> = (0..COMMUTATION_POINTS)
        .map(|_| {
            let x: f64 = rng.random::<f64>() - 0.5;
            let y: f64 = rng.random::<f64>() - 0.5;
            c + Complex64::new(x * grid.width, y * grid.height)
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (a, f) in sg.generators.iter().enumerate() {
        for g in &sg.generators[a + 1..] {
            for &z in &points {
                let (fg, gf) = (f.eval(g.eval(z)), g.eval(f.eval(z)));
                if fg.is_finite() && gf.is_finite() {
                    worst = worst.max((fg - gf).norm() / fg.norm().max(1.0));
                }
            }
        }
    }
    worst
}

fn equality_metrics(c: &mut Check, s: &SetApprox, t: &SetApprox, tol: &Tolerances) -> Result<()> {
    let ji = mask_compare(&s.i, &t.i)?.jaccard;
    let jf = mask_compare(&s.f, &t.f)?.jaccard;
    let jj = mask_compare(&s.j, &t.j)?.jaccard;
    c.metric("jaccard_i", ji);
    c.metric("jaccard_f", jf);
    c.metric("jaccard_j", jj);
    c.metric("i_s_pixels", s.i.count());
    c.metric("i_t_pixels", t.i.count());
    c.metric("j_s_pixels", s.j.count());
    let ok = ji >= tol.min_jaccard_sets && jf >= tol.min_jaccard_sets && jj >= tol.min_jaccard_boundary;
    c.verdict = Some(if ok { Verdict::Pass } else { Verdict::Fail });
    Ok(())
}

/// Equality of `I`, `F`, `J` for a subsemigroup of Exact finite or cofinite
/// index in an abelian semigroup.
#[allow(clippy::too_many_arguments)]
pub fn check_index_equality(
    sg: &Semigroup,
    oracle: &SubsemigroupOracle,
    grid: &GridSpec,
    budget: &WordBudget,
    kind: IndexKind,
    bound: usize,
    max_index: usize,
    tol: &Tolerances,
) -> Result<Check> {
    if kind == IndexKind::Rees {
        return Err(Error::invalid("index equality takes a finite or cofinite index"));
    }
    if !sg.alphabet.is_abelian() {
        return Err(Error::Refused("semigroup is not declared abelian".into()));
    }
    let defect = commutation_defect(sg, grid);
    if defect > COMMUTATION_TOL {
        return Err(Error::Refused(format!(
            "generators fail the commutation spot-check (relative defect {defect:e})"
        )));
    }
    let verdict = kind.compute(&sg.alphabet, oracle, bound, max_index)?;
    if !verdict.is_exact() {
        return Err(Error::Refused(format!(
            "{} index is not exact at bound {bound}",
            kind_name(kind)
        )));
    }
    equality_check(sg, oracle, grid, budget, tol, kind, verdict, Some(defect))
}

fn kind_name(k: IndexKind) -> &'static str {
    match k {
        IndexKind::Finite => "finite",
        IndexKind::Cofinite => "cofinite",
        IndexKind::Rees => "Rees",
    }
}

#[allow(clippy::too_many_arguments)]
fn equality_check(
    sg: &Semigroup,
    oracle: &SubsemigroupOracle,
    grid: &GridSpec,
    budget: &WordBudget,
    tol: &Tolerances,
    kind: IndexKind,
    verdict: IndexVerdict,
    defect: Option<f64>,
) -> Result<Check> {
    let tb = t_budget(budget, oracle)?;
    let s = approximate(sg, grid, budget)?;
    let t = approximate(sg, grid, &tb)?;
    let mut c = Check {
        truncation: Truncation {
            index_bound: Some(verdict.bound),
            words_t: Some(tb.words.len()),
            ..budget_truncation(budget, grid)
        },
        details: json!({ "index_kind": kind_name(kind), "index": verdict.to_json(&sg.alphabet) }),
        ..Check::default()
    };
    c.metric("index_value", verdict.exact_value());
    if let Some(d) = defect {
        c.metric("commutation_defect", d);
    }
    equality_metrics(&mut c, &s, &t, tol)?;
    c.masks = masks_of(s, t);
    Ok(c)
}

/// Equality of `I`, `F`, `J` for a subsemigroup of Exact Rees index.
pub fn check_rees_equality(
    sg: &Semigroup,
    oracle: &SubsemigroupOracle,
    grid: &GridSpec,
    budget: &WordBudget,
    bound: usize,
    tol: &Tolerances,
) -> Result<Check> {
    let verdict = rees_index(&sg.alphabet, oracle, bound)?;
    if !verdict.is_exact() {
        return Err(Error::Refused(format!("Rees index is not exact at bound {bound}")));
    }
    equality_check(sg, oracle, grid, budget, tol, IndexKind::Rees, verdict, None)
}

/// `J_approx` against the complement-side boundary, and `F`/`J` as a
/// partition of the non-frame pixels. Pixel-exact.
pub fn check_boundary_identity(sg: &Semigroup, grid: &GridSpec, budget: &WordBudget) -> Result<Check> {
    let s = approximate(sg, grid, budget)?;
    let other = boundary_via_complement(&s.i);
    let direct = boundary(&s.i);
    let disagree = mask_compare(&s.j, &other)?;
    let disagree = disagree.a_minus_b + disagree.b_minus_a;
    let direct_mismatch = mask_subset_violations(&s.j, &direct)? + mask_subset_violations(&direct, &s.j)?;
    let (mut overlap, mut uncovered) = (0usize, 0usize);
    for p in 0..grid.len() {
        let (r, col) = (p / grid.cols, p % grid.cols);
        let (f, j) = (s.f.bits()[p], s.j.bits()[p]);
        overlap += (f && j) as usize;
        uncovered += (!grid.is_frame(r, col) && !f && !j) as usize;
    }
    let mut c = Check {
        truncation: budget_truncation(budget, grid),
        ..Check::default()
    };
    c.metric("boundary_disagreements", disagree + direct_mismatch);
    c.metric("f_j_overlap", overlap);
    c.metric("uncovered_pixels", uncovered);
    c.metric("i_pixels", s.i.count());
    c.metric("f_pixels", s.f.count());
    c.metric("j_pixels", s.j.count());
    let ok = disagree + direct_mismatch == 0 && overlap == 0 && uncovered == 0;
    c.verdict = Some(if ok { Verdict::Pass } else { Verdict::Fail });
    c.masks = vec![
        ("I_S".into(), s.i),
        ("F_S".into(), s.f),
        ("J_S".into(), s.j),
        ("J_complement_side".into(), other),
    ];
    Ok(c)
}

/// Disjoint-translate hypothesis on `samples` points of `region`, then the
/// share of the region's pixels in `F_approx` (and in `I_approx` when the
/// region is declared `fundamental`).
pub fn check_fundamental_set(
    sg: &Semigroup,
    region: &Region,
    grid: &GridSpec,
    budget: &WordBudget,
    samples: usize,
    fundamental: bool,
    tol: &Tolerances,
) -> Result<Check> {
    region.validate()?;
    if samples == 0 {
        return Err(Error::invalid("fundamental-set check needs at least one sample"));
    }
    let ([a, b], [lo, hi]) = region.bounds();
    let c0 = grid.center();
    let inside = |x: f64, y: f64| {
        (x - c0.re).abs() <= grid.width / 2.0 && (y - c0.im).abs() <= grid.height / 2.0
    };
    if !(inside(a, lo) && inside(b, hi)) {
        return Err(Error::invalid("region is not inside the grid window"));
    }
    let pixels: Vec<usize> = (0..grid.len()).filter(|&p| region.contains(grid.point_at(p))).collect();
    if pixels.is_empty() {
        return Err(Error::invalid("region contains no pixel center"));
    }

    let mut c = Check {
        truncation: budget_truncation(budget, grid),
        ..Check::default()
    };
    let points = region.samples(samples);
    let mut hits = 0usize;
    let mut first: Option<(String, Complex64)> = None;
    for w in &budget.words {
        let m = word_map(w, &sg.generators)?;
        for &u in &points {
            if region.contains(m.eval(u)) {
                hits += 1;
                first.get_or_insert_with(|| (sg.alphabet.display(w).to_string(), u));
            }
        }
    }
    c.metric("samples", samples);
    c.metric("hypothesis_violations", hits);
    c.metric("region_pixels", pixels.len());
    if let Some((word, u)) = first {
        c.details = json!({ "first_violation": { "word": word, "point": [u.re, u.im] } });
        c.verdict = Some(Verdict::HypothesisFailed);
        return Ok(c);
    }

    let s = approximate(sg, grid, budget)?;
    let out_f = pixels.iter().filter(|&&p| !s.f.bits()[p]).count();
    c.metric("outside_f", out_f);
    c.metric("fraction_in_f", 1.0 - frac(out_f, pixels.len()));
    let mut ok = frac(out_f, pixels.len()) <= tol.max_violation_fraction;
    if fundamental {
        let out_i = pixels.iter().filter(|&&p| !s.i.bits()[p]).count();
        c.metric("outside_i", out_i);
        c.metric("fraction_in_i", 1.0 - frac(out_i, pixels.len()));
        ok &= frac(out_i, pixels.len()) <= tol.max_violation_fraction;
    } else {
        c.notes.push("covering condition not declared; I-containment not asserted".into());
    }
    let region_mask = Mask::from_bits(
        *grid,
        (0..grid.len()).map(|p| region.contains(grid.point_at(p))).collect(),
        MaskKind::Custom,
    )?;
    c.verdict = Some(if ok { Verdict::Pass } else { Verdict::Fail });
    c.masks = vec![("I_S".into(), s.i), ("F_S".into(), s.f), ("U".into(), region_mask)];
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ComponentFinding {
    label: u32,
    size: usize,
    /// `found`, `not_found`, `escaping` or `unresolved`.
    status: &'static str,
    orbit: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<u32>,
    witnesses: Vec<String>,
    stabilizer: Vec<String>,
    closure_violations: usize,
}

/// For each probed Fatou component with a finite forward orbit inside the
/// budget, looks for a component `W` in the orbit such that every short word
/// `u` has a witness `w` (Identity allowed) with `U_{w∘u} = W`.
///
/// Witnesses have length `<= L/2` and `u` ranges over lengths `<= L - L/2`,
/// so every product stays inside the budget. With `focus`, only the component
/// containing that point is probed.
pub fn check_cofinite_stabilizer(
    sg: &Semigroup,
    grid: &GridSpec,
    budget: &WordBudget,
    opts: &ProbeOptions,
    focus: Option<Complex64>,
) -> Result<Check> {
    let s = approximate(sg, grid, budget)?;
    let components = label_components(&s.f);
    if components.count() == 0 {
        return Err(Error::invalid("F_approx has no component"));
    }
    let focus_label = focus
        .map(|z| {
            components
                .component_at(z)
                .ok_or_else(|| Error::invalid(format!("{z} is not in a Fatou component of the grid")))
        })
        .transpose()?;
    let mut opts = ProbeOptions {
        include_identity: true,
        ..*opts
    };
    if focus_label.is_some() {
        opts.min_component_size = 0;
        opts.max_components = usize::MAX;
    }
    let mut probes = stabilizer_probe(
        &sg.alphabet,
        &components,
        &sg.generators,
        &budget.words,
        budget.params.escape_radius,
        &opts,
    )?;
    if let Some(l) = focus_label {
        probes.retain(|p| p.label == l);
    }
    let a = &sg.alphabet;
    let half = budget.max_word_len / 2;
    let witnesses: Vec<ExtendedWord> = std::iter::once(ExtendedWord::Identity)
        .chain(budget.words.iter().filter(|w| w.len() <= half).cloned().map(ExtendedWord::Word))
        .collect();
    let targets: Vec<&Word> = budget
        .words
        .iter()
        .filter(|u| u.len() <= budget.max_word_len - half)
        .collect();

    let mut findings = Vec::new();
    let (mut found, mut unresolved, mut not_found) = (0usize, 0usize, 0usize);
    for p in &probes {
        let image: BTreeMap<&ExtendedWord, ImageVerdict> = p.images.iter().map(|(w, v)| (w, *v)).collect();
        let resolved: Option<BTreeSet<u32>> = p.images.iter().map(|(_, v)| v.resolved()).collect();
        let mut f = ComponentFinding {
            label: p.label,
            size: p.size,
            status: "unresolved",
            orbit: Vec::new(),
            target: None,
            witnesses: Vec::new(),
            stabilizer: p.stabilizer.iter().map(|w| a.display_ext(w)).collect(),
            closure_violations: p.closure_violations.len(),
        };
        match resolved {
            None if p.images.iter().any(|(_, v)| matches!(v, ImageVerdict::Split | ImageVerdict::OffGrid)) => {
                unresolved += 1;
            }
            None => f.status = "escaping",
            Some(orbit) => {
                f.orbit = orbit.iter().copied().collect();
                f.status = "not_found";
                'candidates: for &w_label in &orbit {
                    let mut used = BTreeSet::new();
                    for u in &targets {
                        let u_ext = ExtendedWord::Word((*u).clone());
                        let hit = witnesses
                            .iter()
                            .find(|w| image.get(&a.compose_ext(w, &u_ext)) == Some(&ImageVerdict::Target(w_label)));
                        match hit {
                            Some(w) => {
                                used.insert(w.clone());
                            }
                            None => continue 'candidates,
                        }
                    }
                    f.status = "found";
                    f.target = Some(w_label);
                    f.witnesses = used.iter().map(|w| a.display_ext(w)).collect();
                    break;
                }
                if f.status == "found" {
                    found += 1;
                } else {
                    not_found += 1;
                }
            }
        }
        findings.push(f);
    }

    let mut c = Check {
        truncation: budget_truncation(budget, grid),
        details: json!({ "components": findings }),
        ..Check::default()
    };
    c.metric("components_total", components.count());
    c.metric("components_probed", probes.len());
    c.metric("found", found);
    c.metric("not_found", not_found);
    c.metric("unresolved", unresolved);
    c.verdict = Some(if unresolved == 0 && not_found == 0 && found > 0 {
        Verdict::Pass
    } else {
        Verdict::Indeterminate
    });
    c.notes
        .push("the no-wandering-domain hypothesis is not checked".into());
    c.masks = vec![("F_S".into(), s.f)];
    Ok(c)
}

/// Compares an index verdict with its expected kind and value.
pub fn check_index_golden(
    alphabet: &Alphabet,
    oracle: &SubsemigroupOracle,
    kind: IndexKind,
    bound: usize,
    max_index: usize,
    expect_kind: &str,
    expect_value: Option<usize>,
) -> Result<Check> {
    let v = kind.compute(alphabet, oracle, bound, max_index)?;
    let j = v.to_json(alphabet);
    let ok = j.kind == expect_kind && (expect_value.is_none() || j.value == expect_value);
    let mut c = Check {
        truncation: Truncation {
            index_bound: Some(bound),
            ..Truncation::default()
        },
        details: json!({ "index_kind": kind_name(kind), "verdict": j, "expected": { "kind": expect_kind, "value": expect_value } }),
        ..Check::default()
    };
    c.metric("value", j.value);
    c.verdict = Some(if ok { Verdict::Pass } else { Verdict::Fail });
    Ok(c)
}

/// Runs a resolved experiment.
///
/// Refusals (unmet preconditions) become a `refused` report; configuration
/// errors and closure rejections are returned as errors.
pub fn run_experiment(exp: &Experiment) -> Result<(TheoremReport, Vec<(String, Mask)>)> {
    exp.validate()?;
    let start = Instant::now();
    let d = &exp.def;
    let sg = Semigroup::from_def(&exp.semigroup)?;
    let oracle = d
        .oracle
        .as_ref()
        .map(|_| SubsemigroupOracle::new(exp.oracle.as_ref().expect("resolved"), &sg.alphabet, CLOSURE_CHECK_LEN))
        .transpose()?;
    let budget = exp.budget.map(|b| b.word_budget(&sg.alphabet)).transpose()?;
    let grid = exp.grid;
    let max_index = d.max_index.unwrap_or(DEFAULT_MAX_INDEX);
    let need = || -> Result<(&GridSpec, &WordBudget)> { Ok((grid.as_ref().unwrap(), budget.as_ref().unwrap())) };

    let outcome = match d.kind {
        ExperimentKind::Monotonicity => {
            let (g, b) = need()?;
            check_monotonicity(&sg, oracle.as_ref().unwrap(), g, b, &d.tolerances)
        }
        ExperimentKind::IndexEquality => {
            let (g, b) = need()?;
            check_index_equality(
                &sg,
                oracle.as_ref().unwrap(),
                g,
                b,
                d.index.unwrap(),
                d.bound.unwrap(),
                max_index,
                &d.tolerances,
            )
        }
        ExperimentKind::ReesEquality => {
            let (g, b) = need()?;
            check_rees_equality(&sg, oracle.as_ref().unwrap(), g, b, d.bound.unwrap(), &d.tolerances)
        }
        ExperimentKind::BoundaryIdentity => {
            let (g, b) = need()?;
            check_boundary_identity(&sg, g, b)
        }
        ExperimentKind::FundamentalSet => {
            let (g, b) = need()?;
            check_fundamental_set(
                &sg,
                d.region.as_ref().unwrap(),
                g,
                b,
                d.samples.unwrap_or(DEFAULT_SAMPLES),
                d.fundamental,
                &d.tolerances,
            )
        }
        ExperimentKind::CofiniteStabilizer => {
            let (g, b) = need()?;
            let focus = d.component_at.map(|[re, im]| Complex64::new(re, im));
            check_cofinite_stabilizer(&sg, g, b, &d.probe.unwrap_or_default(), focus)
        }
        ExperimentKind::IndexGolden => {
            let e = d.expect.as_ref().unwrap();
            check_index_golden(
                &sg.alphabet,
                oracle.as_ref().unwrap(),
                d.index.unwrap(),
                d.bound.unwrap(),
                max_index,
                &e.kind,
                e.value,
            )
        }
    };
    let mut check = match outcome {
        Ok(c) => c,
        Err(Error::Refused(reason)) => Check {
            verdict: Some(Verdict::Refused),
            notes: vec![reason],
            ..Check::default()
        },
        Err(e) => return Err(e),
    };
    let mut notes = d.notes.clone();
    notes.append(&mut check.notes);
    let report = TheoremReport {
        experiment: exp.name.clone(),
        kind: d.kind,
        anchor: d.anchor.clone().unwrap_or_else(|| d.kind.default_anchor().to_string()),
        config_hash: exp.config_hash(),
        verdict: check.verdict(),
        metrics: check.metrics,
        details: check.details,
        truncation: check.truncation,
        notes,
        runtime_ms: start.elapsed().as_millis() as u64,
    };
    Ok((report, check.masks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SemigroupDef;
    use crate::function::IterParams;

    fn semigroup(gens: &[&str], abelian: bool) -> Semigroup {
        Semigroup::from_def(&SemigroupDef {
            generators: gens.iter().map(|s| s.to_string()).collect(),
            names: vec![],
            abelian,
        })
        .unwrap()
    }

    fn grid(n: usize) -> GridSpec {
        GridSpec::from_bounds((-2.0, 4.0), (-3.0, 3.0), n, n).unwrap()
    }

    fn budget(sg: &Semigroup, len: usize) -> WordBudget {
        WordBudget::full(&sg.alphabet, len, IterParams::default()).unwrap()
    }

    fn oracle(sg: &Semigroup, def: OracleDef) -> SubsemigroupOracle {
        SubsemigroupOracle::new(&def, &sg.alphabet, 6).unwrap()
    }

    fn f64_metric(c: &Check, k: &str) -> f64 {
        c.metrics[k].as_f64().unwrap()
    }

    #[test]
    fn monotonicity_with_t_equal_s_is_exact() {
        let sg = semigroup(&["sin(z)", "cos(z)"], false);
        let whole = SubsemigroupOracle::whole(&sg.alphabet);
        let c = check_monotonicity(&sg, &whole, &grid(24), &budget(&sg, 2), &Tolerances::default()).unwrap();
        assert_eq!(c.verdict, Some(Verdict::Pass));
        for k in ["i_violations", "f_violations", "j_violations"] {
            assert_eq!(c.metrics[k], 0, "{k}");
        }
    }

    #[test]
    fn index_equality_t_equal_s_gives_jaccard_one() {
        let sg = semigroup(&["exp(z)"], true);
        let whole = SubsemigroupOracle::whole(&sg.alphabet);
        let c = check_index_equality(
            &sg,
            &whole,
            &grid(24),
            &budget(&sg, 2),
            IndexKind::Finite,
            6,
            4,
            &Tolerances::default(),
        )
        .unwrap();
        for k in ["jaccard_i", "jaccard_f", "jaccard_j"] {
            assert_eq!(f64_metric(&c, k), 1.0);
        }
        assert_eq!(c.verdict, Some(Verdict::Pass));
    }

    #[test]
    fn index_equality_refuses_non_abelian() {
        let sg = semigroup(&["sin(z)", "cos(z)"], false);
        let whole = SubsemigroupOracle::whole(&sg.alphabet);
        let r = check_index_equality(&sg, &whole, &grid(8), &budget(&sg, 2), IndexKind::Finite, 4, 4, &Tolerances::default());
        assert!(matches!(r, Err(Error::Refused(_))));
    }

    #[test]
    fn index_equality_refuses_declared_abelian_that_does_not_commute() {
        let sg = semigroup(&["sin(z)", "cos(z)"], true);
        let whole = SubsemigroupOracle::whole(&sg.alphabet);
        let r = check_index_equality(&sg, &whole, &grid(8), &budget(&sg, 2), IndexKind::Finite, 4, 4, &Tolerances::default());
        assert!(matches!(r, Err(Error::Refused(m)) if m.contains("commutation")));
    }

    #[test]
    fn commuting_affine_pair_passes_spot_check() {
        // z+1 and z+i commute exactly
        let sg = semigroup(&["z + 1", "z + i"], true);
        assert!(commutation_defect(&sg, &grid(8)) <= COMMUTATION_TOL);
    }

    #[test]
    fn index_equality_refuses_inexact_index() {
        let sg = semigroup(&["exp(z)"], true);
        // multiples of 9 need more than 2 translates
        let t = oracle(&sg, OracleDef::LengthMultiple { n: 9 });
        let r = check_index_equality(&sg, &t, &grid(8), &budget(&sg, 2), IndexKind::Finite, 12, 2, &Tolerances::default());
        assert!(matches!(r, Err(Error::Refused(_))));
    }

    #[test]
    fn rees_refuses_unbounded() {
        let sg = semigroup(&["exp(z)"], false);
        let t = oracle(&sg, OracleDef::LengthMultiple { n: 2 });
        let r = check_rees_equality(&sg, &t, &grid(8), &budget(&sg, 2), 8, &Tolerances::default());
        assert!(matches!(r, Err(Error::Refused(_))));
    }

    #[test]
    fn boundary_identity_holds() {
        let sg = semigroup(&["sin(z)", "cos(z)"], false);
        let c = check_boundary_identity(&sg, &grid(32), &budget(&sg, 2)).unwrap();
        assert_eq!(c.verdict, Some(Verdict::Pass));
        assert!(c.metrics["j_pixels"].as_u64().unwrap() > 0);
    }

    #[test]
    fn all_escaping_window_has_empty_boundary() {
        // far right of the real axis: exp escapes everywhere
        let sg = semigroup(&["exp(z)"], false);
        let g = GridSpec::from_bounds((5.0, 6.0), (-0.5, 0.5), 16, 16).unwrap();
        let c = check_boundary_identity(&sg, &g, &budget(&sg, 1)).unwrap();
        assert_eq!(c.metrics["j_pixels"], 0);
        assert_eq!(c.verdict, Some(Verdict::Pass));
    }

    #[test]
    fn fundamental_set_fixed_point_is_hypothesis_failure() {
        let sg = semigroup(&["exp(z)"], false);
        // fixed point of exp: z = -W(-1)
        let p = Complex64::new(0.318_131_505_204_764_1, 1.337_235_701_430_689);
        assert!((p.exp() - p).norm() < 1e-12);
        let u = Region::Disk {
            center: [p.re, p.im],
            radius: 0.2,
        };
        let c = check_fundamental_set(&sg, &u, &grid(32), &budget(&sg, 2), 500, false, &Tolerances::default()).unwrap();
        assert_eq!(c.verdict, Some(Verdict::HypothesisFailed));
        assert!(c.metrics["hypothesis_violations"].as_u64().unwrap() > 0);
    }

    #[test]
    fn fundamental_set_rejects_degenerate_and_outside() {
        let sg = semigroup(&["exp(z)"], false);
        let zero = Region::Disk {
            center: [0.0, 0.0],
            radius: 0.0,
        };
        let b = budget(&sg, 1);
        assert!(check_fundamental_set(&sg, &zero, &grid(8), &b, 10, false, &Tolerances::default()).is_err());
        let far = Region::Rect {
            re: [10.0, 11.0],
            im: [0.0, 1.0],
        };
        assert!(check_fundamental_set(&sg, &far, &grid(8), &b, 10, false, &Tolerances::default()).is_err());
    }

    #[test]
    fn region_samples_are_inside() {
        let d = Region::Disk {
            center: [-4.0, 0.0],
            radius: 0.2,
        };
        let pts = d.samples(500);
        assert_eq!(pts.len(), 500);
        assert!(pts.iter().all(|&z| d.contains(z)));
        let r = Region::Rect {
            re: [0.0, 1.0],
            im: [2.0, 3.0],
        };
        assert!(r.samples(100).iter().all(|&z| r.contains(z)));
    }

    #[test]
    fn golden_matches_and_mismatches() {
        let a = Alphabet::with_size(1, false).unwrap();
        let t = SubsemigroupOracle::new(&OracleDef::LengthMultiple { n: 3 }, &a, 6).unwrap();
        let ok = check_index_golden(&a, &t, IndexKind::Finite, 12, 8, "Exact", Some(3)).unwrap();
        assert_eq!(ok.verdict, Some(Verdict::Pass));
        let bad = check_index_golden(&a, &t, IndexKind::Finite, 12, 8, "Exact", Some(2)).unwrap();
        assert_eq!(bad.verdict, Some(Verdict::Fail));
    }

    #[test]
    fn cofinite_stabilizer_on_attracting_basin() {
        let sg = semigroup(&["z*exp(-(0.5*z^2 + 1.5*z - 1))"], false);
        let g = GridSpec::from_bounds((-1.0, 2.0), (-1.5, 1.5), 48, 48).unwrap();
        let attractor = Complex64::new((17f64.sqrt() - 3.0) / 2.0, 0.0);
        let c = check_cofinite_stabilizer(&sg, &g, &budget(&sg, 3), &ProbeOptions::default(), None).unwrap();
        let s = approximate(&sg, &g, &budget(&sg, 3)).unwrap();
        let label = label_components(&s.f).component_at(attractor).unwrap();
        let comps = c.details["components"].as_array().unwrap();
        let basin = comps.iter().find(|f| f["label"] == label).unwrap();
        assert_eq!(basin["status"], "found");
        assert_eq!(basin["target"], label);
        assert_eq!(basin["witnesses"], json!(["id"]));
        assert_eq!(basin["stabilizer"].as_array().unwrap().len(), 4);

        let focused =
            check_cofinite_stabilizer(&sg, &g, &budget(&sg, 3), &ProbeOptions::default(), Some(attractor)).unwrap();
        assert_eq!(focused.metrics["components_probed"], 1);
        assert_eq!(focused.verdict, Some(Verdict::Pass));
        // a point of the Julia approximation is rejected
        assert!(check_cofinite_stabilizer(&sg, &g, &budget(&sg, 3), &ProbeOptions::default(), Some(Complex64::new(9.0, 9.0))).is_err());
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let text = r#"
[semigroups.e]
generators = ["exp(z)"]
[grids.g]
center = [1.0, 0.0]
width = 6.0
height = 6.0
cols = 8
rows = 8
[budgets.b]
max_word_len = 1
[experiments.x]
kind = "boundary_identity"
semigroup = "e"
grid = "g"
budget = "b"
"#;
        let a = crate::config::Config::parse(text).unwrap().experiment("x").unwrap();
        let b = crate::config::Config::parse(text).unwrap().experiment("x").unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
        let c = crate::config::Config::parse(&text.replace("cols = 8", "cols = 9"))
            .unwrap()
            .experiment("x")
            .unwrap();
        assert_ne!(a.config_hash(), c.config_hash());
        let (r1, _) = run_experiment(&a).unwrap();
        let (r2, _) = run_experiment(&b).unwrap();
        assert_eq!(r1.metrics, r2.metrics);
        assert_eq!(r1.verdict, Verdict::Pass);
    }
}
