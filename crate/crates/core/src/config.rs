//! TOML configuration: named semigroups, grids, budgets, oracles and
//! experiments, plus suites grouping experiments.
//!
//! ```toml
//! [semigroups.sincos]
//! generators = ["sin(z)", "cos(z)"]
//!
//! [grids.standard]
//! center = [1.0, 0.0]
//! width = 6.0
//! height = 6.0
//! cols = 128
//! rows = 128
//!
//! [budgets.len3]
//! max_word_len = 3
//! N = 100
//! R = 1e10
//!
//! [oracles.even]
//! kind = "length_multiple"
//! n = 2
//!
//! [experiments.sincos-even]
//! kind = "monotonicity"
//! semigroup = "sincos"
//! oracle = "even"
//! grid = "standard"
//! budget = "len3"
//!
//! [suites]
//! smoke = ["sincos-even"]
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::{GridSpec, ProbeOptions, WordBudget, DEFAULT_PIXEL_CAP};
use crate::error::{Error, Result};
use crate::function::{parse_formula, EntireMap, IterParams, DEFAULT_ESCAPE_RADIUS, DEFAULT_MAX_STEPS};
use crate::oracle::{OracleDef, SubsemigroupOracle, CLOSURE_CHECK_LEN};
use crate::verification::{Experiment, ExperimentKind, IndexKind, Region, Tolerances};
use crate::word::Alphabet;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub semigroups: BTreeMap<String, SemigroupDef>,
    #[serde(default)]
    pub grids: BTreeMap<String, GridSpec>,
    #[serde(default)]
    pub budgets: BTreeMap<String, BudgetDef>,
    #[serde(default)]
    pub oracles: BTreeMap<String, OracleDef>,
    #[serde(default)]
    pub experiments: BTreeMap<String, ExperimentDef>,
    #[serde(default)]
    pub suites: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub output: OutputDef,
}

/// Generator formulas, or just letter names for a purely combinatorial semigroup.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupDef {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub names: Vec<String>,
    #[serde(default)]
    pub abelian: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetDef {
    pub max_word_len: usize,
    #[serde(rename = "N", default = "default_steps")]
    pub max_steps: u32,
    #[serde(rename = "R", default = "default_radius")]
    pub escape_radius: f64,
}

fn default_steps() -> u32 {
    DEFAULT_MAX_STEPS
}

fn default_radius() -> f64 {
    DEFAULT_ESCAPE_RADIUS
}

impl BudgetDef {
    pub fn params(&self) -> Result<IterParams> {
        IterParams::new(self.max_steps, self.escape_radius)
    }

    pub fn word_budget(&self, alphabet: &Alphabet) -> Result<WordBudget> {
        WordBudget::full(alphabet, self.max_word_len, self.params()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDef {
    #[serde(default = "default_dir")]
    pub directory: String,
    /// Dump the masks behind each experiment as PGM.
    #[serde(default)]
    pub masks: bool,
}

fn default_dir() -> String {
    "out".into()
}

impl Default for OutputDef {
    fn default() -> Self {
        OutputDef {
            directory: default_dir(),
            masks: false,
        }
    }
}

/// One experiment section. Which fields are required depends on `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentDef {
    pub kind: ExperimentKind,
    pub semigroup: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<IndexKind>,
    /// Word-length bound for index computations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// The covering condition of a fundamental set, declared rather than checked.
    #[serde(default)]
    pub fundamental: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeOptions>,
    /// Probe only the Fatou component containing this point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component_at: Option<[f64; 2]>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Expected index verdict for `index_golden`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
    /// Free-form statement of what the experiment tests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    /// `Exact`, `AtLeast` or `UnboundedUpTo`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<usize>,
}

/// A semigroup ready for computation.
#[derive(Debug, Clone, PartialEq)]
pub struct Semigroup {
    pub alphabet: Alphabet,
    /// Empty for a combinatorial-only semigroup.
    pub generators: Vec<EntireMap>,
}

impl Semigroup {
    pub fn from_def(def: &SemigroupDef) -> Result<Self> {
        let generators = def
            .generators
            .iter()
            .map(|f| parse_formula(f))
            .collect::<Result<Vec<_>>>()?;
        let alphabet = match (def.names.is_empty(), generators.len()) {
            (true, 0) => return Err(Error::Config("semigroup needs generators or names".into())),
            (true, n) => Alphabet::with_size(n, def.abelian)?,
            (false, 0) => Alphabet::new(def.names.iter().cloned(), def.abelian)?,
            (false, n) if n == def.names.len() => Alphabet::new(def.names.iter().cloned(), def.abelian)?,
            (false, n) => {
                return Err(Error::Config(format!(
                    "{n} generators but {} names",
                    def.names.len()
                )))
            }
        };
        Ok(Semigroup { alphabet, generators })
    }

    pub fn has_maps(&self) -> bool {
        !self.generators.is_empty()
    }
}

impl Config {
    /// Parses and validates; every error names the offending line.
    pub fn parse(text: &str) -> Result<Config> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        config.validate().map_err(|(section, e)| {
            let line = line_of(text, &section).map(|l| format!("line {l}: ")).unwrap_or_default();
            let e = match e {
                Error::Config(m) => m,
                other => other.to_string(),
            };
            Error::Config(format!("{line}[{section}]: {e}"))
        })?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Config> {
        Config::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn validate(&self) -> std::result::Result<(), (String, Error)> {
        for (name, def) in &self.semigroups {
            Semigroup::from_def(def).map_err(|e| (format!("semigroups.{name}"), e))?;
        }
        for (name, g) in &self.grids {
            // the pixel cap is a resource limit, enforced when the grid is used
            g.validate(usize::MAX).map_err(|e| (format!("grids.{name}"), e))?;
        }
        for (name, b) in &self.budgets {
            let at = |e| (format!("budgets.{name}"), e);
            if b.max_word_len == 0 {
                return Err(at(Error::Config("max_word_len must be >= 1".into())));
            }
            b.params().map_err(at)?;
        }
        for name in self.experiments.keys() {
            self.experiment(name)
                .and_then(|exp| exp.validate())
                .map_err(|e| (format!("experiments.{name}"), e))?;
        }
        for (name, members) in &self.suites {
            for m in members {
                if !self.experiments.contains_key(m) {
                    return Err(("suites".into(), Error::Config(format!("suite {name:?} names unknown experiment {m:?}"))));
                }
            }
        }
        Ok(())
    }

    pub fn semigroup(&self, name: &str) -> Result<Semigroup> {
        Semigroup::from_def(lookup(&self.semigroups, "semigroup", name)?)
    }

    /// Resolves a named oracle against `alphabet`, rejecting it unless it is
    /// closed under composition up to the default check length.
    pub fn oracle(&self, name: &str, alphabet: &Alphabet) -> Result<SubsemigroupOracle> {
        SubsemigroupOracle::new(lookup(&self.oracles, "oracle", name)?, alphabet, CLOSURE_CHECK_LEN)
    }

    pub fn grid(&self, name: &str) -> Result<GridSpec> {
        let g = *lookup(&self.grids, "grid", name)?;
        g.validate(DEFAULT_PIXEL_CAP)?;
        Ok(g)
    }

    pub fn budget(&self, name: &str) -> Result<BudgetDef> {
        Ok(*lookup(&self.budgets, "budget", name)?)
    }

    /// A self-contained experiment: the section plus every section it references.
    pub fn experiment(&self, name: &str) -> Result<Experiment> {
        let def = lookup(&self.experiments, "experiment", name)?.clone();
        let semigroup = lookup(&self.semigroups, "semigroup", &def.semigroup)?.clone();
        let oracle = def
            .oracle
            .as_deref()
            .map(|o| lookup(&self.oracles, "oracle", o).cloned())
            .transpose()?;
        let grid = def.grid.as_deref().map(|g| self.grid(g)).transpose()?;
        let budget = def.budget.as_deref().map(|b| self.budget(b)).transpose()?;
        Ok(Experiment {
            name: name.to_string(),
            def,
            semigroup,
            oracle,
            grid,
            budget,
        })
    }

    /// Experiment names of a suite, in suite order.
    pub fn suite(&self, name: &str) -> Result<Vec<String>> {
        Ok(lookup(&self.suites, "suite", name)?.clone())
    }
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, what: &str, name: &str) -> Result<&'a T> {
    map.get(name)
        .ok_or_else(|| Error::Config(format!("unknown {what} {name:?}")))
}

/// 1-based line of the `[section]` header (or dotted key) introducing `section`.
fn line_of(text: &str, section: &str) -> Option<usize> {
    let (table, key) = section.split_once('.').unwrap_or((section, ""));
    let quoted = format!("{table}.\"{key}\"");
    let mut in_table = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let header = header.trim();
            if header == section || header == quoted {
                return Some(i + 1);
            }
            in_table = header == table;
        } else if in_table && !key.is_empty() && line.split(['=', '.']).next().map(str::trim) == Some(key) {
            return Some(i + 1);
        }
    }
    None
}

impl Experiment {
    /// Checks that the fields the experiment kind needs are present.
    pub fn validate(&self) -> Result<()> {
        use ExperimentKind::*;
        let d = &self.def;
        let need = |ok: bool, field: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!("{} experiment needs `{field}`", d.kind.as_str())))
            }
        };
        if d.kind != IndexGolden {
            need(d.grid.is_some(), "grid")?;
            need(d.budget.is_some(), "budget")?;
            if self.semigroup.generators.is_empty() {
                return Err(Error::Config("dynamics experiments need generator formulas".into()));
            }
        }
        match d.kind {
            Monotonicity => need(d.oracle.is_some(), "oracle")?,
            IndexEquality => {
                need(d.oracle.is_some(), "oracle")?;
                need(d.bound.is_some(), "bound")?;
                need(matches!(d.index, Some(IndexKind::Finite | IndexKind::Cofinite)), "index = finite|cofinite")?;
            }
            ReesEquality => {
                need(d.oracle.is_some(), "oracle")?;
                need(d.bound.is_some(), "bound")?;
            }
            BoundaryIdentity | CofiniteStabilizer => {}
            FundamentalSet => need(d.region.is_some(), "region")?,
            IndexGolden => {
                need(d.oracle.is_some(), "oracle")?;
                need(d.bound.is_some(), "bound")?;
                need(d.index.is_some(), "index")?;
                need(d.expect.is_some(), "expect")?;
            }
        }
        d.tolerances.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[semigroups.sincos]
generators = ["sin(z)", "cos(z)"]

[semigroups.pair]
names = ["f", "g"]

[grids.small]
center = [1.0, 0.0]
width = 6.0
height = 6.0
cols = 32
rows = 32

[budgets.short]
max_word_len = 2

[oracles.even]
kind = "length_multiple"
n = 2

[experiments.mono]
kind = "monotonicity"
semigroup = "sincos"
oracle = "even"
grid = "small"
budget = "short"

[experiments.golden]
kind = "index_golden"
semigroup = "pair"
oracle = "even"
index = "finite"
bound = 6
expect = { kind = "Exact", value = 2 }

[suites]
all = ["mono", "golden"]
"#;

    #[test]
    fn parses_and_resolves() {
        let c = Config::parse(SAMPLE).unwrap();
        let b = c.budget("short").unwrap();
        assert_eq!((b.max_steps, b.escape_radius), (100, 1e10));
        assert_eq!(c.semigroup("sincos").unwrap().alphabet.names(), ["f", "g"]);
        let e = c.experiment("mono").unwrap();
        assert_eq!(e.grid.unwrap().cols, 32);
        assert_eq!(c.suite("all").unwrap(), ["mono", "golden"]);
    }

    #[test]
    fn round_trip() {
        let c = Config::parse(SAMPLE).unwrap();
        let again = Config::parse(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn syntax_error_names_line() {
        let bad = SAMPLE.replace("max_word_len = 2", "max_word_len = ");
        let msg = Config::parse(&bad).unwrap_err().to_string();
        assert!(msg.contains("line 16"), "{msg}");
    }

    #[test]
    fn unresolved_reference_names_line() {
        let bad = SAMPLE.replace("budget = \"short\"", "budget = \"long\"");
        let msg = Config::parse(&bad).unwrap_err().to_string();
        assert!(msg.starts_with("config error: line 22: [experiments.mono]: unknown budget"), "{msg}");
    }

    #[test]
    fn missing_field_for_kind() {
        let bad = SAMPLE.replace("bound = 6\n", "");
        let msg = Config::parse(&bad).unwrap_err().to_string();
        assert!(msg.contains("bound"), "{msg}");
    }

    #[test]
    fn closure_checked_on_resolution() {
        let bad = SAMPLE.replace(
            "kind = \"length_multiple\"\nn = 2",
            "kind = \"complement_of_finite\"\nexclude = [\"f.f\"]\nbase = { kind = \"generated_by\", words = [\"f\", \"g\"] }",
        );
        let c = Config::parse(&bad).unwrap();
        let a = c.semigroup("pair").unwrap().alphabet;
        assert!(matches!(c.oracle("even", &a), Err(Error::NotClosed { .. })));
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = SAMPLE.replace("rows = 32", "rows = 32\ncolour = 1");
        assert!(Config::parse(&bad).is_err());
    }

    #[test]
    fn formula_errors_surface() {
        let bad = SAMPLE.replace("\"cos(z)\"", "\"log(z)\"");
        let msg = Config::parse(&bad).unwrap_err().to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }
}
