//! `bykov-atlas`: command-line front end for the bykov-core toolkit.
//!
//! Exit codes: 0 success, 1 usage error, 2 domain or validation error, 3 numerical or I/O failure.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::PathBuf;

use bykov_core::{Error, ModelParams, RawParams};
use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::Context;
use crate::config::RunConfig;

/// Environment variable read when `--jobs` is absent.
pub const JOBS_ENV: &str = "BYKOV_ATLAS_JOBS";

const PARAM_KEYS: [&str; 8] = ["alpha1", "C1", "E1", "alpha2", "E2", "C2", "a", "rotation"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Parser)]
#[command(name = "bykov-atlas", version, about = "Numerics for conservative Bykov heteroclinic cycles")]
pub struct Cli {
    /// JSON configuration; the reference parameter set is used when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_delimiter = ',', default_value = "csv,json")]
    pub format: Vec<Format>,
    /// Worker threads; falls back to BYKOV_ATLAS_JOBS, then to the number of cores.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Region B bounds, rationality of gamma and a seeded region-consistency sweep.
    ParamsCheck,
    /// Image of a vertical segment under the return map.
    SegmentTrace,
    /// Reversal ladders, one per phase family.
    Reversals {
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// First-order tangency candidates against a vertical stable line.
    Tangency,
    /// Tangency candidates of higher order along iterated segments.
    Cascade,
    /// Crossings of the stable and unstable spirals on the top disk.
    Spirals,
    /// Fixed points of the return map with their stability class.
    FixedPoints,
    /// Height intervals with elliptic trace along reversal fibers.
    EllipticStrip,
    /// Boundary-sampling horseshoe heuristic for one strip.
    Horseshoe,
    /// Escape-time profile of a three-dimensional field along a segment.
    Timedelay,
    /// Printed formulas compared against the composed maps.
    DiscrepancyReport,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Maps an error chain onto the documented exit codes.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    if let Some(e) = err.downcast_ref::<Error>() {
        return match e {
            Error::NonPositiveParameter(_)
            | Error::ResonanceViolated { .. }
            | Error::ShearBelowOne(_)
            | Error::DomainEscape(_)
            | Error::InvalidInput(_)
            | Error::NoReversals => 2,
            Error::NearSingular { .. } | Error::FormulaMismatch { .. } | Error::Extinct(_) | Error::Underflow { .. } => 3,
        };
    }
    if err.downcast_ref::<svg::SvgError>().is_some() {
        return 2;
    }
    3
}

fn jobs(flag: Option<usize>) -> Result<usize, UsageError> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var(JOBS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| UsageError(format!("{JOBS_ENV}={v:?} is not a positive integer")))?,
            Err(_) => return Ok(0),
        },
    };
    if n == 0 {
        return Err(UsageError("--jobs must be at least 1".into()));
    }
    Ok(n)
}

/// Parses the configuration. A parameter block that is present must be complete.
pub fn load_config(bytes: &[u8], origin: &str) -> anyhow::Result<(RunConfig, Option<RawParams>)> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| UsageError(format!("{origin}: invalid JSON: {e}")))?;
    if !value.is_object() {
        return Err(UsageError(format!("{origin}: top level must be a JSON object")).into());
    }
    let raw = if PARAM_KEYS.iter().any(|k| value.get(k).is_some()) {
        Some(
            serde_json::from_value::<RawParams>(value.clone())
                .map_err(|e| UsageError(format!("{origin}: parameter block: {e}")))?,
        )
    } else {
        None
    };
    let config: RunConfig =
        serde_json::from_value(value).map_err(|e| UsageError(format!("{origin}: {e}")))?;
    Ok((config, raw))
}

fn execute(cli: Cli) -> anyhow::Result<String> {
    let (config_bytes, origin) = match &cli.config {
        Some(path) => (
            std::fs::read(path).map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?,
            path.display().to_string(),
        ),
        None => (b"{}".to_vec(), "default configuration".to_string()),
    };
    let (config, raw) = load_config(&config_bytes, &origin)?;
    let params = match raw {
        Some(raw) => raw.validate()?,
        None => ModelParams::figure_caption(),
    };
    let ctx = Context {
        config,
        config_bytes,
        params,
        out: cli.out,
        seed: cli.seed,
        formats: cli.format.into_iter().collect::<BTreeSet<_>>(),
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs(cli.jobs)?).build()?;
    pool.install(|| match cli.command {
        Command::ParamsCheck => commands::params_check(&ctx),
        Command::SegmentTrace => commands::segment_trace_cmd(&ctx),
        Command::Reversals { nmax } => commands::reversals(&ctx, nmax),
        Command::Tangency => commands::tangency(&ctx),
        Command::Cascade => commands::cascade(&ctx),
        Command::Spirals => commands::spirals(&ctx),
        Command::FixedPoints => commands::fixed_points(&ctx),
        Command::EllipticStrip => commands::elliptic_strip_cmd(&ctx),
        Command::Horseshoe => commands::horseshoe(&ctx),
        Command::Timedelay => commands::timedelay(&ctx),
        Command::DiscrepancyReport => commands::discrepancy_report(&ctx),
    })
}

/// Runs the tool on `argv` (program name first) and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("usage error");
            eprintln!("bykov-atlas: {}", line.trim_start_matches("error: "));
            return 1;
        }
    };
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            eprintln!("bykov-atlas: {}", chain.join(": ").replace('\n', " "));
            exit_code(&e)
        }
    }
}
