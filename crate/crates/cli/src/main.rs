//! `carp`: fit, simulate, study and diagnose covariate-adjusted recurrent
//! event models.
//!
//! Every failure is reported on stderr as `{"error": {"kind", "message"}}`
//! with a nonzero exit status.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use carp_core::io::ingest::default_base;
use carp_core::io::{
    diagnose, ingest_reader, summarize, write_history_csv, FitReport, Grid, Ingested, RunConfig,
};
use carp_core::{fit, run_study, simulate_history, CarpError, SimConfig, Variant};

#[derive(Parser)]
#[command(name = "carp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the configuration).
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to an eruption log and write a JSON report.
    Fit {
        /// CSV with header time,duration,geyser.
        data: PathBuf,
        /// mln or copula (default mln).
        #[arg(long, value_parser = parse_variant)]
        variant: Option<Variant>,
        /// Fix the covariate coefficients at zero.
        #[arg(long)]
        zero_b: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate a history and write it as an eruption log.
    Simulate {
        /// Number of events (overrides the configuration).
        #[arg(long)]
        n_events: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a simulation study and write one row per scenario and fitted model.
    Study {
        /// Replicates per scenario.
        #[arg(long)]
        replicates: Option<usize>,
        /// reference, sample-size, tau, scale or covariate.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<Grid>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare fitted cumulative intensities with observed counts.
    Diagnose {
        /// CSV the model was fitted to.
        data: PathBuf,
        /// JSON report written by `carp fit`.
        #[arg(long)]
        fit: PathBuf,
        /// Spacing of the output grid, in hours.
        #[arg(long, default_value_t = 1.0)]
        grid_step: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Per-type counts and gap/duration moments as JSON.
    Summarize {
        /// CSV with header time,duration,geyser.
        data: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse::<Variant>().map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CarpError> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CarpError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_data(path: &Path, cfg: &RunConfig) -> Result<Ingested, CarpError> {
    ingest_reader(File::open(path)?, &cfg.mapping, &cfg.data)
}

fn run(cli: Cli) -> Result<(), CarpError> {
    match cli.command {
        Command::Fit {
            data,
            variant,
            zero_b,
            common,
        } => {
            let cfg = load_config(common.config.as_deref())?;
            let seed = common.seed.or(cfg.seed).unwrap_or(0);
            let variant = variant.or(cfg.variant).unwrap_or(Variant::Mln);
            let history = read_data(&data, &cfg)?.history;
            let fit_cfg = carp_core::FitConfig {
                seed,
                zero_b: zero_b || cfg.fit.zero_b,
                ..cfg.fit.clone()
            };
            let result = fit(variant, &history, &fit_cfg)?;
            let report = FitReport::new(&result, history.len(), seed, cfg.hash());
            let mut out = output(common.out.as_deref())?;
            writeln!(out, "{}", report.to_json()?)?;
            out.flush()?;
        }
        Command::Simulate { n_events, common } => {
            let cfg = load_config(common.config.as_deref())?;
            let seed = common.seed.or(cfg.seed).unwrap_or(0);
            let sim = SimConfig {
                model: cfg.simulate.truth.to_model()?,
                n_events: n_events.unwrap_or(cfg.simulate.n_events),
                covariate_law: cfg.simulate.covariate_law,
                seed,
            };
            let history = simulate_history(&sim)?;
            let out = output(common.out.as_deref())?;
            write_history_csv(&history, default_base(), &cfg.mapping, out)?;
        }
        Command::Study {
            replicates,
            grid,
            common,
        } => {
            let mut cfg = load_config(common.config.as_deref())?;
            if let Some(r) = replicates {
                if r == 0 {
                    return Err(CarpError::Config("--replicates must be positive".into()));
                }
                cfg.study.replicates = r;
            }
            if let Some(g) = grid {
                cfg.study.grid = g;
            }
            let seed = common.seed.or(cfg.seed).unwrap_or(0);
            let scenarios = cfg.study.grid.scenarios(cfg.study.covariate_law);
            let result = run_study(&scenarios, &cfg.study_config(seed))?;
            let out = output(common.out.as_deref())?;
            result.write_csv(out)?;
        }
        Command::Diagnose {
            data,
            fit,
            grid_step,
            common,
        } => {
            let cfg = load_config(common.config.as_deref())?;
            let history = read_data(&data, &cfg)?.history;
            let report = FitReport::load(&fit)?;
            let series = diagnose(&report.model, &history, grid_step)?;
            let out = output(common.out.as_deref())?;
            series.write_csv(out)?;
        }
        Command::Summarize { data, common } => {
            let cfg = load_config(common.config.as_deref())?;
            let history = read_data(&data, &cfg)?.history;
            let mut out = output(common.out.as_deref())?;
            writeln!(out, "{}", serde_json::to_string_pretty(&summarize(&history))?)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = serde_json::json!({
                "error": { "kind": "usage", "message": e.to_string().trim_end() }
            });
            eprintln!("{err}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed downstream pipe (`carp simulate | head`) is not an error.
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            let err = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{err}");
            ExitCode::FAILURE
        }
    }
}

fn is_broken_pipe(e: &CarpError) -> bool {
    let io = match e {
        CarpError::Io(io) => Some(io),
        CarpError::Csv(c) => match c.kind() {
            csv::ErrorKind::Io(io) => Some(io),
            _ => None,
        },
        _ => None,
    };
    io.is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}
