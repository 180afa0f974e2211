//! `semilab`: render escaping/Julia/Fatou masks, compute subsemigroup indices
//! and run experiment suites described by a TOML config.
//!
//! Exit codes: 0 ok, 1 usage/config error, 2 resource cap, 3 non-exact index,
//! 4 oracle not closed, 5 a theorem conclusion failed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use semilab_core::config::Config;
use semilab_core::dynamics::{escaping_mask, fatou_julia_masks, Mask};
use semilab_core::verification::{run_experiment, IndexKind, TheoremReport, Verdict, DEFAULT_MAX_INDEX};
use semilab_core::Error;
use serde_json::json;

#[derive(Parser)]
#[command(name = "semilab", version, about = "Escaping-set and subsemigroup-index experiments")]
struct Cli {
    /// Worker threads for pixel classification (default: all cores).
    #[arg(long, global = true, env = "SEMILAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one mask of a semigroup as PGM, with a JSON sidecar.
    Render {
        config: PathBuf,
        #[arg(long)]
        semigroup: String,
        /// Needed when the config defines more than one grid.
        #[arg(long)]
        grid: Option<String>,
        /// Needed when the config defines more than one budget.
        #[arg(long)]
        budget: Option<String>,
        #[arg(long, value_enum, ignore_case = true, default_value = "I")]
        set: SetArg,
        #[arg(long)]
        out: PathBuf,
        /// Also write the per-word verdict cube next to the mask.
        #[arg(long)]
        cube: bool,
    },
    /// Print the index of an oracle subsemigroup as JSON.
    Index {
        config: PathBuf,
        #[arg(long)]
        semigroup: String,
        #[arg(long)]
        oracle: String,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        bound: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_INDEX)]
        max_index: usize,
    },
    /// Run experiments and write `report.json`.
    Verify {
        config: PathBuf,
        #[arg(long, required_unless_present = "all", conflicts_with = "all")]
        suite: Option<String>,
        #[arg(long)]
        all: bool,
        /// Output directory (default: the config's `output.directory`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SetArg {
    I,
    J,
    F,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Finite,
    Cofinite,
    Rees,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ResourceCap { .. } => 2,
            Error::ReesNotExact { .. } => 3,
            Error::NotClosed { .. } => 4,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.threads {
        Some(0) => Err(fail(1, "--threads must be at least 1")),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| run(cli.command)),
            Err(e) => Err(fail(1, e.to_string())),
        },
        None => run(cli.command),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("semilab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Render {
            config,
            semigroup,
            grid,
            budget,
            set,
            out,
            cube,
        } => render(&config, &semigroup, grid, budget, set, &out, cube),
        Command::Index {
            config,
            semigroup,
            oracle,
            kind,
            bound,
            max_index,
        } => index(&config, &semigroup, &oracle, kind, bound, max_index),
        Command::Verify { config, suite, out, .. } => verify(&config, suite.as_deref(), out),
    }
}

/// The named entry, or the only one when no name is given.
fn pick<T>(map: &BTreeMap<String, T>, name: Option<String>, what: &str) -> Result<String, Failure> {
    match name {
        Some(n) => Ok(n),
        None if map.len() == 1 => Ok(map.keys().next().unwrap().clone()),
        None => Err(fail(1, format!("config defines {} {what}s; pass --{what}", map.len()))),
    }
}

fn render(
    path: &Path,
    semigroup: &str,
    grid: Option<String>,
    budget: Option<String>,
    set: SetArg,
    out: &Path,
    cube: bool,
) -> Outcome {
    let start = Instant::now();
    let config = Config::load(path)?;
    let sg = config.semigroup(semigroup)?;
    if !sg.has_maps() {
        return Err(fail(1, format!("semigroup {semigroup:?} has no generator formulas")));
    }
    let grid_name = pick(&config.grids, grid, "grid")?;
    let budget_name = pick(&config.budgets, budget, "budget")?;
    let g = config.grid(&grid_name)?;
    let b = config.budget(&budget_name)?;
    let r = escaping_mask(&sg.alphabet, &sg.generators, &g, &b.word_budget(&sg.alphabet)?)?;
    let (f, j) = fatou_julia_masks(&r.mask);
    let (mask, label): (&Mask, &str) = match set {
        SetArg::I => (&r.mask, "I"),
        SetArg::J => (&j, "J"),
        SetArg::F => (&f, "F"),
    };
    mask.write_pgm(out)?;
    if cube {
        r.cube.write(&out.with_extension("cube"))?;
    }
    let sidecar = json!({
        "semigroup": semigroup,
        "set": label,
        "pixels_set": mask.count(),
        "grid": g,
        "budget": { "max_word_len": b.max_word_len, "N": b.max_steps, "R": b.escape_radius, "words": r.cube.words },
        "overflow_cells": r.cube.overflow_count(),
        "runtime_ms": start.elapsed().as_millis() as u64,
    });
    write_json(&sidecar_path(out), &sidecar)?;
    Ok(0)
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn index(path: &Path, semigroup: &str, oracle: &str, kind: KindArg, bound: usize, max_index: usize) -> Outcome {
    let config = Config::load(path)?;
    let sg = config.semigroup(semigroup)?;
    let t = config.oracle(oracle, &sg.alphabet)?;
    let kind = match kind {
        KindArg::Finite => IndexKind::Finite,
        KindArg::Cofinite => IndexKind::Cofinite,
        KindArg::Rees => IndexKind::Rees,
    };
    let v = kind.compute(&sg.alphabet, &t, bound, max_index)?;
    println!("{}", serde_json::to_string(&v.to_json(&sg.alphabet)).map_err(Error::from)?);
    Ok(if v.is_exact() { 0 } else { 3 })
}

fn verify(path: &Path, suite: Option<&str>, out: Option<PathBuf>) -> Outcome {
    let config = Config::load(path)?;
    let names = match suite {
        Some(s) => config.suite(s)?,
        None => config.experiments.keys().cloned().collect(),
    };
    let dir = out.unwrap_or_else(|| PathBuf::from(&config.output.directory));
    std::fs::create_dir_all(&dir)?;
    let mut reports: Vec<TheoremReport> = Vec::new();
    for name in &names {
        let (report, masks) = run_experiment(&config.experiment(name)?)?;
        println!("{:<17} {name}{}", verdict_str(report.verdict), headline(&report));
        if config.output.masks {
            for (label, mask) in &masks {
                mask.write_pgm(&dir.join(format!("{name}.{label}.pgm")))?;
            }
        }
        reports.push(report);
    }
    write_json(&dir.join("report.json"), &serde_json::to_value(&reports).map_err(Error::from)?)?;

    let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
    let (pass, failed) = (count(Verdict::Pass), count(Verdict::Fail));
    let mut extra = Vec::new();
    for v in [Verdict::Indeterminate, Verdict::HypothesisFailed, Verdict::Refused] {
        if count(v) > 0 {
            extra.push(format!("{} {}", count(v), verdict_str(v)));
        }
    }
    let extra = if extra.is_empty() {
        String::new()
    } else {
        format!(" ({})", extra.join(", "))
    };
    println!("PASS {pass}/{}{extra}", pass + failed);
    Ok(if failed > 0 {
        5
    } else if count(Verdict::Refused) > 0 {
        1
    } else {
        0
    })
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Indeterminate => "indeterminate",
        Verdict::HypothesisFailed => "hypothesis_failed",
        Verdict::Refused => "refused",
    }
}

/// The metrics most worth a glance, in a fixed order.
fn headline(r: &TheoremReport) -> String {
    const KEYS: [&str; 9] = [
        "value",
        "jaccard_i",
        "jaccard_f",
        "jaccard_j",
        "i_violations",
        "f_violation_fraction",
        "j_violation_fraction",
        "fraction_in_f",
        "boundary_disagreements",
    ];
    let parts: Vec<String> = KEYS
        .iter()
        .filter_map(|k| r.metrics.get(*k).map(|v| format!("{k}={v}")))
        .collect();
    if parts.is_empty() {
        String::new()
    } else {
        format!("  {}", parts.join(" "))
    }
}

/// Pretty JSON, written to a temporary file and renamed into place.
fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)? + "\n";
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
