//! Figure-style sweeps, validation runs and their on-disk output.
//!
//! Every run produces CSV curves plus one `<id>.json` metadata file that
//! embeds the fully resolved parameters. Nothing time- or host-dependent is
//! written, so a rerun with the same config and seed is byte-identical.

mod figures;
mod validate;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ResolvedConfig, System};
use crate::error::{Error, Result};
use crate::ising::Normalization;
use crate::units::GridSpec;

pub use figures::{run_fig2, run_fig3, run_fig4, run_fig5, run_scan};
pub use validate::{run_validate, Check};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Scan,
    Validate,
}

impl Experiment {
    pub fn id(&self) -> &'static str {
        match self {
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::Scan => "scan",
            Experiment::Validate => "validate",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Command-line settings that take precedence over the config file.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Overrides {
    pub grid: Option<GridSpec>,
    pub echo: Option<bool>,
    pub theta: Option<f64>,
    pub normalization: Option<Normalization>,
    pub system: Option<System>,
}

/// One fully specified run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSpec {
    pub experiment: Experiment,
    pub config: ResolvedConfig,
    pub normalization: Normalization,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl RunSpec {
    /// Folds `overrides` into `config`.
    pub fn new(
        experiment: Experiment,
        mut config: ResolvedConfig,
        overrides: Overrides,
        out_dir: impl Into<PathBuf>,
        seed: u64,
    ) -> Result<Self> {
        if let Some(grid) = overrides.grid {
            config.grid = Some(grid);
        }
        if let Some(echo) = overrides.echo {
            config.protocol.echo = echo;
        }
        if let Some(theta) = overrides.theta {
            config.protocol.theta = theta;
            config.fig2_thetas = vec![theta];
        }
        if let Some(system) = overrides.system {
            config.system = system;
        }
        config.protocol.build().map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            experiment,
            config,
            normalization: overrides.normalization.unwrap_or_default(),
            out_dir: out_dir.into(),
            seed,
        })
    }

    pub fn run(&self) -> Result<RunOutput> {
        match self.experiment {
            Experiment::Fig2 => run_fig2(&self.config),
            Experiment::Fig3 => run_fig3(&self.config),
            Experiment::Fig4 => run_fig4(&self.config, self.normalization),
            Experiment::Fig5 => run_fig5(&self.config),
            Experiment::Scan => run_scan(&self.config, self.normalization, self.seed),
            Experiment::Validate => run_validate(self.seed),
        }
    }
}

/// A file to be written into the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<Artifact>,
    pub summary: Value,
    /// False only for a validation run with a failing check.
    pub passed: bool,
}

impl RunOutput {
    fn new(files: Vec<Artifact>, summary: Value) -> Self {
        Self { files, summary, passed: true }
    }
}

/// Writes the run's files and its metadata; returns the paths written.
pub fn write_output(spec: &RunSpec, output: &RunOutput) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&spec.out_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", spec.out_dir.display())))?;
    let mut written = Vec::new();
    for file in &output.files {
        written.push(write_file(&spec.out_dir, &file.name, &file.contents)?);
    }
    let metadata = json!({
        "experiment": spec.experiment,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": spec.seed,
        "normalization": spec.normalization,
        "parameters": spec.config,
        "files": output.files.iter().map(|f| f.name.as_str()).collect::<Vec<_>>(),
        "passed": output.passed,
        "summary": output.summary,
    });
    let text = serde_json::to_string_pretty(&metadata).map_err(|e| Error::Numerical(e.to_string()))? + "\n";
    written.push(write_file(&spec.out_dir, &format!("{}.json", spec.experiment.id()), &text)?);
    Ok(written)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Numerical(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Process exit code for an error: 2 for bad input, 3 for numerical failure.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_)
        | Error::Parameter(_)
        | Error::UnsupportedRegime(_)
        | Error::Domain(_)
        | Error::Unsupported(_)
        | Error::Capacity(_) => 2,
        Error::Numerical(_) | Error::NotFound(_) | Error::Singularity(_) => 3,
    }
}

/// Exit code for a validation run that completed with failing checks.
pub const VALIDATION_FAILURE: i32 = 4;

/// Minimal CSV builder with a fixed float format.
struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        Self { text: header.join(",") + "\n", columns: header.len() }
    }

    fn row(&mut self, cells: &[Cell]) {
        debug_assert_eq!(cells.len(), self.columns);
        let line: Vec<String> = cells.iter().map(Cell::render).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    fn finish(self, name: impl Into<String>) -> Artifact {
        Artifact { name: name.into(), contents: self.text }
    }
}

enum Cell {
    F(f64),
    Opt(Option<f64>),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::Opt(Some(x)) => fmt_f64(*x),
            Cell::Opt(None) => String::new(),
            Cell::S(s) => s.clone(),
        }
    }
}

/// Shortest round-trip representation in exponent form; −0 prints as 0.
fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0e0".into()
    } else if x.is_finite() {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format() {
        let mut csv = Csv::new(&["a", "b", "c"]);
        csv.row(&[Cell::F(0.1), Cell::Opt(None), Cell::S("x".into())]);
        csv.row(&[Cell::F(-2.5e-300), Cell::Opt(Some(3.0)), Cell::F(f64::NAN)]);
        csv.row(&[Cell::F(-0.0), Cell::F(0.0), Cell::S(String::new())]);
        assert_eq!(csv.finish("t.csv").contents, "a,b,c\n1e-1,,x\n-2.5e-300,3e0,NaN\n0e0,0e0,\n");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Numerical("x".into())), 3);
    }
}
