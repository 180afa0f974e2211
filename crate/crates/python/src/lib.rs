//! Python bindings, imported as `semilab`.
//!
//! Structured results (index verdicts, experiment reports) come back as plain
//! dicts with the same keys as the CLI's JSON output.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use semilab_core::config::{Config as CoreConfig, SemigroupDef, Semigroup};
use semilab_core::dynamics::{escaping_mask, fatou_julia_masks, GridSpec, Mask, WordBudget};
use semilab_core::function::{iterate as core_iterate, parse_formula, IterParams, Outcome};
use semilab_core::index::{cofinite_index, finite_index, rees_index};
use semilab_core::oracle::{Membership, OracleDef, SubsemigroupOracle, CLOSURE_CHECK_LEN};
use semilab_core::verification::run_experiment;
use semilab_core::word::{enumerate_words, Alphabet as CoreAlphabet, Direction};

fn err(e: semilab_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn from_py(obj: &Bound<'_, PyAny>) -> PyResult<serde_json::Value> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Generator letters, free or abelian.
#[pyclass(frozen)]
struct Alphabet {
    inner: CoreAlphabet,
}

#[pymethods]
impl Alphabet {
    #[new]
    #[pyo3(signature = (names, abelian = false))]
    fn new(names: Vec<String>, abelian: bool) -> PyResult<Self> {
        Ok(Alphabet {
            inner: CoreAlphabet::new(names, abelian).map_err(err)?,
        })
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    #[getter]
    fn abelian(&self) -> bool {
        self.inner.is_abelian()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Canonical form of a dotted word such as `"f.g.f"`.
    fn canonical(&self, word: &str) -> PyResult<String> {
        let w = self.inner.parse_extended(word).map_err(err)?;
        Ok(self.inner.display_ext(&w))
    }

    /// `outer ∘ inner`; `"id"` is the identity.
    fn compose(&self, outer: &str, inner: &str) -> PyResult<String> {
        let a = self.inner.parse_extended(outer).map_err(err)?;
        let b = self.inner.parse_extended(inner).map_err(err)?;
        Ok(self.inner.display_ext(&self.inner.compose_ext(&a, &b)))
    }

    /// Every word of length `1..=max_len`, shortest first.
    fn words(&self, max_len: usize) -> Vec<String> {
        enumerate_words(&self.inner, max_len)
            .iter()
            .map(|w| self.inner.display(w).to_string())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Alphabet({:?}, abelian={})", self.inner.names(), self.inner.is_abelian())
    }
}

/// A subsemigroup given by a definition dict such as
/// `{"kind": "length_multiple", "n": 2}`, checked for closure on creation.
#[pyclass(frozen)]
struct Oracle {
    inner: SubsemigroupOracle,
}

#[pymethods]
impl Oracle {
    #[new]
    #[pyo3(signature = (alphabet, definition, closure_len = CLOSURE_CHECK_LEN))]
    fn new(alphabet: &Alphabet, definition: &Bound<'_, PyAny>, closure_len: usize) -> PyResult<Self> {
        let def: OracleDef =
            serde_json::from_value(from_py(definition)?).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Oracle {
            inner: SubsemigroupOracle::new(&def, &alphabet.inner, closure_len).map_err(err)?,
        })
    }

    fn __contains__(&self, word: &str) -> PyResult<bool> {
        let w = self.inner.alphabet().parse_word(word).map_err(err)?;
        Ok(self.inner.contains(&w))
    }

    /// Members of length `<= max_len`, shortest first.
    fn words(&self, max_len: usize) -> Vec<String> {
        let a = self.inner.alphabet();
        self.inner
            .words_up_to(max_len)
            .iter()
            .map(|w| a.display(w).to_string())
            .collect()
    }
}

/// Index of `oracle` in its alphabet's semigroup: `kind` is `"finite"`,
/// `"cofinite"` or `"rees"`. Returns `{kind, value, bound, witnesses}`.
#[pyfunction]
#[pyo3(signature = (oracle, kind, bound, max_index = 8, direction = "left"))]
fn index<'py>(
    py: Python<'py>,
    oracle: &Oracle,
    kind: &str,
    bound: usize,
    max_index: usize,
    direction: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let dir = match direction {
        "left" => Direction::Left,
        "right" => Direction::Right,
        _ => return Err(PyValueError::new_err("direction must be 'left' or 'right'")),
    };
    let t = &oracle.inner;
    let a = t.alphabet();
    let v = match kind {
        "finite" => finite_index(a, t, bound, max_index, dir),
        "cofinite" => cofinite_index(a, t, bound, max_index, dir),
        "rees" => rees_index(a, t, bound),
        _ => return Err(PyValueError::new_err("kind must be 'finite', 'cofinite' or 'rees'")),
    }
    .map_err(err)?;
    to_py(py, &serde_json::to_value(v.to_json(a)).unwrap())
}

/// Escape test of one orbit: `{escaped, steps, modulus}` or
/// `{escaped: False, steps, last}`.
#[pyfunction]
#[pyo3(signature = (formula, z, max_steps = 100, escape_radius = 1e10))]
fn iterate<'py>(
    py: Python<'py>,
    formula: &str,
    z: Complex64,
    max_steps: u32,
    escape_radius: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let map = parse_formula(formula).map_err(err)?;
    let params = IterParams::new(max_steps, escape_radius).map_err(err)?;
    let v = core_iterate(&map, z, params);
    let d = PyDict::new(py);
    d.set_item("steps", v.steps_used)?;
    match v.outcome {
        Outcome::Escaped { modulus, overflow, .. } => {
            d.set_item("escaped", true)?;
            d.set_item("modulus", modulus)?;
            d.set_item("overflow", overflow)?;
        }
        Outcome::Bounded { last } => {
            d.set_item("escaped", false)?;
            d.set_item("last", last)?;
        }
        Outcome::Indeterminate => d.set_item("escaped", py.None())?,
    }
    Ok(d)
}

fn mask_bytes<'py>(py: Python<'py>, m: &Mask) -> Bound<'py, PyBytes> {
    let bytes: Vec<u8> = m.bits().iter().map(|&b| b as u8).collect();
    PyBytes::new(py, &bytes)
}

/// `I`, `F` and `J` approximations on a grid, as row-major bytes of 0/1 under
/// the keys `"I"`, `"F"`, `"J"`, plus `"rows"` and `"cols"`.
#[pyfunction]
#[pyo3(signature = (generators, center, width, height, cols, rows, max_word_len,
                    abelian = false, max_steps = 100, escape_radius = 1e10))]
#[allow(clippy::too_many_arguments)]
fn masks<'py>(
    py: Python<'py>,
    generators: Vec<String>,
    center: Complex64,
    width: f64,
    height: f64,
    cols: usize,
    rows: usize,
    max_word_len: usize,
    abelian: bool,
    max_steps: u32,
    escape_radius: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let sg = Semigroup::from_def(&SemigroupDef {
        generators,
        names: Vec::new(),
        abelian,
    })
    .map_err(err)?;
    let grid = GridSpec::new(center, width, height, cols, rows).map_err(err)?;
    let params = IterParams::new(max_steps, escape_radius).map_err(err)?;
    let budget = WordBudget::full(&sg.alphabet, max_word_len, params).map_err(err)?;
    let r = py
        .detach(|| escaping_mask(&sg.alphabet, &sg.generators, &grid, &budget))
        .map_err(err)?;
    let (f, j) = fatou_julia_masks(&r.mask);
    let d = PyDict::new(py);
    d.set_item("rows", rows)?;
    d.set_item("cols", cols)?;
    d.set_item("I", mask_bytes(py, &r.mask))?;
    d.set_item("F", mask_bytes(py, &f))?;
    d.set_item("J", mask_bytes(py, &j))?;
    Ok(d)
}

/// A parsed experiment config.
#[pyclass(frozen)]
struct Config {
    inner: CoreConfig,
}

#[pymethods]
impl Config {
    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Config {
            inner: CoreConfig::load(&path).map_err(err)?,
        })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Config {
            inner: CoreConfig::parse(text).map_err(err)?,
        })
    }

    fn experiments(&self) -> Vec<String> {
        self.inner.experiments.keys().cloned().collect()
    }

    fn suite(&self, name: &str) -> PyResult<Vec<String>> {
        self.inner.suite(name).map_err(err)
    }

    fn oracle(&self, name: &str, semigroup: &str) -> PyResult<Oracle> {
        let sg = self.inner.semigroup(semigroup).map_err(err)?;
        Ok(Oracle {
            inner: self.inner.oracle(name, &sg.alphabet).map_err(err)?,
        })
    }

    /// Runs one experiment and returns its report dict.
    fn run<'py>(&self, py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
        let exp = self.inner.experiment(name).map_err(err)?;
        let (report, _) = py.detach(|| run_experiment(&exp)).map_err(err)?;
        to_py(py, &serde_json::to_value(&report).unwrap())
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml().map_err(err)
    }
}

#[pymodule]
fn semilab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Alphabet>()?;
    m.add_class::<Oracle>()?;
    m.add_class::<Config>()?;
    m.add_function(wrap_pyfunction!(index, m)?)?;
    m.add_function(wrap_pyfunction!(iterate, m)?)?;
    m.add_function(wrap_pyfunction!(masks, m)?)?;
    Ok(())
}
