//! Command-line front end. Exit codes: 0 success, 1 failed assertion,
//! 2 configuration or input error, 3 numerical failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{run, ScenarioConfig, ScenarioKind};
use crate::measure::read_csv;
use crate::orlicz::luxemburg_norm;
use crate::young::YoungParams;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Environment variable that overrides the output directory of `run`.
pub const OUT_ENV: &str = "ORLICZ_LAB_OUT";

#[derive(Debug, Parser)]
#[command(name = "orlicz-lab", version, about = "Orlicz-norm L∞ bounds for degenerate elliptic problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write its CSV tables and JSON summary.
    Run {
        #[arg(long, value_parser = parse_scenario)]
        scenario: ScenarioKind,
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `output.dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Luxemburg norm of a field stored in a CSV written by `write_csv`.
    Norm {
        /// Young function exponents `p,q`.
        #[arg(long, value_parser = parse_young)]
        young: YoungParams,
        #[arg(long)]
        field: PathBuf,
        /// Field column; defaults to the last column.
        #[arg(long)]
        column: Option<String>,
    },
    /// Conjugate Young function at `t`.
    Conjugate {
        #[arg(long, value_parser = parse_young)]
        young: YoungParams,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        /// Use the closed-form comparison function instead of the Legendre transform.
        #[arg(long)]
        closed: bool,
    },
}

fn parse_scenario(s: &str) -> std::result::Result<ScenarioKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_young(s: &str) -> std::result::Result<YoungParams, String> {
    let (p, q) = s.split_once(',').ok_or_else(|| format!("expected p,q, got {s:?}"))?;
    let p: f64 = p.trim().parse().map_err(|_| format!("bad p in {s:?}"))?;
    let q: f64 = q.trim().parse().map_err(|_| format!("bad q in {s:?}"))?;
    YoungParams::new(p, q).map_err(|e| e.to_string())
}

fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERIC
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::Run { scenario, config, out } => {
            let cfg = ScenarioConfig::from_file(&config)?;
            let dir = match std::env::var_os(OUT_ENV) {
                Some(v) if !v.is_empty() => PathBuf::from(v),
                _ => out.unwrap_or_else(|| cfg.out_dir.clone()),
            };
            let result = run(scenario, &cfg)?;
            let files = result.write(&dir)?;
            for a in &result.assertions {
                let verdict = if a.pass { "PASS" } else { "FAIL" };
                println!("{verdict} {}: {} {} {} (tol {})", a.name, a.value, a.relation, a.limit, a.tolerance);
            }
            for f in &files {
                println!("wrote {}", f.display());
            }
            Ok(if result.pass() { EXIT_OK } else { EXIT_ASSERTION })
        }
        Command::Norm { young, field, column } => {
            let file = File::open(&field).map_err(|e| Error::Config(format!("cannot open {}: {e}", field.display())))?;
            let (dom, fields) = read_csv(BufReader::new(file))?;
            let chosen = match &column {
                Some(name) => fields.iter().find(|(n, _)| n == name),
                None => fields.last(),
            };
            let (_, f) = chosen.ok_or_else(|| Error::Config(format!("no field column {:?} in {}", column, field.display())))?;
            println!("{}", luxemburg_norm(f, &young, &dom)?.value);
            Ok(EXIT_OK)
        }
        Command::Conjugate { young, t, closed } => {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("--t must be a finite value >= 0, got {t}")));
            }
            let value = if closed { young.conjugate_closed(t)? } else { young.conjugate_eval(t)? };
            println!("{value}");
            Ok(EXIT_OK)
        }
    }
}
