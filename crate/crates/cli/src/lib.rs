//! Front end of the `calabi` binary: configuration, check orchestration and report files.
//!
//! Exit codes: 0 when every requested check passes, 1 when one fails,
//! 2 for configuration or I/O problems, 3 when a computation errors out.

// `!(x <= tol)` is used so that NaN fails tolerance checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::commands::CheckOutput;
use crate::config::Config;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Calabi,
    Orbits,
    Verify,
    Extend,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Calabi => "calabi",
            Check::Orbits => "orbits",
            Check::Verify => "verify",
            Check::Extend => "extend",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{check}: {source}{}", hint(source))]
    Numeric {
        check: &'static str,
        source: calabi_core::Error,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Advice appended to numerical errors that a config change can fix.
fn hint(e: &calabi_core::Error) -> &'static str {
    match e {
        calabi_core::Error::Anchoring { .. } | calabi_core::Error::Integration { .. } => {
            "\nhint: for hamiltonian maps, raise map.steps to reduce the flow error"
        }
        calabi_core::Error::Hypothesis(_) => "\nhint: conjugate the map so that it rotates the boundary rigidly",
        _ => "",
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric { .. } => 3,
        }
    }
}

/// Polar seed grid written `NRxNTHETA`, e.g. `16x8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedGrid(pub usize, pub usize);

impl std::str::FromStr for SeedGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(['x', 'X', ','])
            .ok_or_else(|| format!("expected NRxNTHETA, got {s:?}"))?;
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
        Ok(SeedGrid(parse(a)?, parse(b)?))
    }
}

#[derive(Debug, Parser)]
#[command(name = "calabi", version, about = "Calabi invariants, mean actions and extension certificates of disc maps")]
pub struct Args {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for report.json, report.txt and CSV files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Check to run; repeat for several. Defaults to calabi.
    #[arg(long, value_enum)]
    pub check: Vec<Check>,
    #[arg(long)]
    pub grid_r: Option<usize>,
    #[arg(long)]
    pub grid_theta: Option<usize>,
    /// Largest orbit period searched.
    #[arg(long)]
    pub dmax: Option<usize>,
    /// Extension stage index n.
    #[arg(long)]
    pub stage_n: Option<usize>,
    /// Certificate k to check the stage bounds at; defaults to the certified one.
    #[arg(long)]
    pub cert_k: Option<u64>,
    /// Normalisation level of the action.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Orbit seed grid, NRxNTHETA.
    #[arg(long)]
    pub seed_grid: Option<SeedGrid>,
}

/// Reports of one invocation.
pub struct RunOutput {
    pub pass: bool,
    pub json: serde_json::Value,
    pub text: String,
    pub csv: Vec<(String, String)>,
}

/// Config file with the command-line overrides applied and validated.
pub fn resolve_config(args: &Args) -> Result<Config, CliError> {
    let mut cfg = Config::load(&args.config)?;
    let n = &mut cfg.numerics;
    if let Some(v) = args.grid_r {
        n.grid_r = v;
    }
    if let Some(v) = args.grid_theta {
        n.grid_theta = v;
    }
    if let Some(v) = args.dmax {
        n.d_max = v;
    }
    if let Some(v) = args.stage_n {
        n.stage_n = v;
    }
    if let Some(v) = args.cert_k {
        n.cert_k = Some(v);
    }
    if let Some(SeedGrid(a, b)) = args.seed_grid {
        n.seed_grid = [a, b];
    }
    if let Some(a) = args.a {
        cfg.a = a;
    }
    if !cfg.a.is_finite() {
        return Err(CliError::Config("a must be finite".into()));
    }
    cfg.numerics.validate()?;
    Ok(cfg)
}

pub fn run(args: &Args) -> Result<RunOutput, CliError> {
    let cfg = resolve_config(args)?;
    let map = cfg.map.build().map_err(|source| CliError::Numeric { check: "map", source })?;
    let checks = if args.check.is_empty() {
        vec![Check::Calabi]
    } else {
        args.check.clone()
    };
    let mut outputs: Vec<CheckOutput> = Vec::new();
    for &c in &checks {
        let out = match c {
            Check::Calabi => commands::calabi(&cfg, &map),
            Check::Orbits => commands::orbits(&cfg, &map),
            Check::Verify => commands::verify(&cfg, &map),
            Check::Extend => commands::extend(&cfg, &map),
        }
        .map_err(|source| CliError::Numeric {
            check: c.name(),
            source,
        })?;
        outputs.push(out);
    }
    let pass = outputs.iter().all(|o| o.pass);
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": "calabi",
        "version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(&cfg).expect("config serialises"),
        "pass": pass,
        "checks": outputs.iter().map(|o| json!({
            "check": o.check,
            "pass": o.pass,
            "result": o.result,
        })).collect::<Vec<_>>(),
    });
    let text = outputs.iter().map(|o| o.text.as_str()).collect::<Vec<_>>().join("\n");
    let csv = outputs.into_iter().flat_map(|o| o.csv).collect();
    Ok(RunOutput { pass, json, text, csv })
}

fn write_outputs(dir: &Path, out: &RunOutput) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let json = serde_json::to_string_pretty(&out.json).expect("report serialises");
    std::fs::write(dir.join("report.json"), json + "\n").map_err(io)?;
    std::fs::write(dir.join("report.txt"), &out.text).map_err(io)?;
    for (name, body) in &out.csv {
        std::fs::write(dir.join(name), body).map_err(io)?;
    }
    Ok(())
}

/// Caps the global rayon pool at `CALABI_THREADS` workers when set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("CALABI_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("CALABI_THREADS must be a positive integer, got {v:?}")))?;
    // Fails only if the pool already exists, in which case it is left as is.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn main_with(args: Args) -> ExitCode {
    let result = init_threads().and_then(|_| {
        let out = run(&args)?;
        if let Some(dir) = &args.out {
            write_outputs(dir, &out)?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(if out.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
