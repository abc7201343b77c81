//! `steklov`: compute DtN spectra of warped products and check the
//! eigenvalue bounds against them.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver failure,
//! 4 a bound was reported `Violated`.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Command, RunConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_VIOLATED: u8 = 4;

#[derive(Parser)]
#[command(name = "steklov", version, about = "Dirichlet-to-Neumann spectra of p-forms on warped products")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Compute the spectrum and write it as CSV/JSON.
    Compute(Flags),
    /// Run bound checkers and report verdicts (exit 4 on a violation).
    Verify(Flags),
    /// Repeat `verify` over values of one parameter, long-format output.
    Sweep(Flags),
    /// Print the sphere eigenvalues and ratio bounds for (n, p).
    Table(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Sectioned key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ball | cylinder | sin | sharpness | file
    #[arg(long)]
    warp: Option<String>,
    #[arg(long)]
    n: Option<u32>,
    /// Form degree.
    #[arg(long)]
    p: Option<u32>,
    /// Radius of connected presets.
    #[arg(long = "R")]
    radius: Option<f64>,
    /// Length of two-boundary presets.
    #[arg(long = "L")]
    length: Option<f64>,
    /// Highest sphere mode solved.
    #[arg(long = "m-max", visible_alias = "k-max")]
    m_max: Option<u32>,
    /// Width parameter of the sharpness family.
    #[arg(long)]
    eps: Option<f64>,
    /// Upper bound C on h for the gap estimate.
    #[arg(long = "C")]
    c: Option<f64>,
    /// Relative tolerance of the integrator.
    #[arg(long)]
    tol: Option<f64>,
    /// Start offset from the singular end, relative to R.
    #[arg(long)]
    r0: Option<f64>,
    /// Also run the finite-element oracle on this many elements.
    #[arg(long = "fem-n")]
    fem_n: Option<usize>,
    /// Profile file for --warp file (two columns "r h").
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Topology of a profile file: connected | two-boundary
    #[arg(long)]
    topology: Option<String>,
    /// Directory for output files; nothing is written without it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json | both
    #[arg(long)]
    format: Option<String>,
    /// Theorem id (e.g. t1.2, t1.4ii, cor1.9) or "all".
    #[arg(long)]
    theorem: Option<String>,
    /// Write radial solution samples to <out>/radial.
    #[arg(long)]
    dump: bool,
    /// Swept parameter: eps | L | R | p
    #[arg(long)]
    param: Option<String>,
    /// Comma-separated values of the swept parameter.
    #[arg(long)]
    values: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        fn s<T: ToString>(key: &'static str, v: &Option<T>) -> Option<(&'static str, String)> {
            v.as_ref().map(|v| (key, v.to_string()))
        }
        [
            s("warp", &self.warp),
            s("n", &self.n),
            s("p", &self.p),
            s("R", &self.radius),
            s("L", &self.length),
            s("m_max", &self.m_max),
            s("eps", &self.eps),
            s("C", &self.c),
            s("tol", &self.tol),
            s("r0", &self.r0),
            s("fem_n", &self.fem_n),
            s("profile", &self.profile.as_ref().map(|p| p.display().to_string())),
            s("topology", &self.topology),
            s("out", &self.out.as_ref().map(|p| p.display().to_string())),
            s("format", &self.format),
            s("theorem", &self.theorem),
            self.dump.then(|| ("dump", "true".to_string())),
            s("param", &self.param),
            s("values", &self.values),
        ]
        .into_iter()
        .flatten()
        .collect()
    }
}

fn build_config(command: Command, flags: &Flags) -> steklov_core::Result<RunConfig> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                steklov_core::Error::Parse(format!("cannot read config {}: {e}", path.display()))
            })?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::new(command),
    };
    cfg.command = command;
    for (key, value) in flags.pairs() {
        cfg.set(key, &value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<steklov_core::Error>() {
        Some(e) if !e.is_config_error() => EXIT_SOLVER,
        _ => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match &cli.command {
        Sub::Compute(f) => (Command::Compute, f),
        Sub::Verify(f) => (Command::Verify, f),
        Sub::Sweep(f) => (Command::Sweep, f),
        Sub::Table(f) => (Command::Table, f),
    };
    let cfg = match build_config(command, flags) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result = match command {
        Command::Compute => commands::compute(&cfg),
        Command::Verify => commands::verify(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Table => commands::table(&cfg),
    }
    .and_then(|mut outcome| {
        if let Some(dir) = &cfg.out {
            // The effective configuration, reusable with --config.
            outcome.files.push(("run.conf".into(), cfg.serialize()));
            outcome.write(dir)?;
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            eprint!("{}", outcome.stderr);
            if outcome.violated {
                ExitCode::from(EXIT_VIOLATED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
