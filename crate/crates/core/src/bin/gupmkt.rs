//! `gupmkt`: spectrum tables, resonance scans, propagation and calibration.
//!
//! Exit codes: 0 success, 2 usage or configuration, 3 domain error,
//! 4 numerical failure. Failures also print one JSON line on stderr with
//! `category`, `kind` and `message`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gup_market::calibration::VolatilityQuote;
use gup_market::io::{cmd_calibrate, cmd_propagate, cmd_scan, cmd_spectrum, CalibrateRequest, Overrides, RunConfig};
use gup_market::{Error, TimeUnit};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "gupmkt", version, about = "Driven quantum well model of a price-limited stock")]
struct Cli {
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: the config's `out_dir`, else `.`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Express rates and durations in this unit
    #[arg(long, global = true, value_enum)]
    unit: Option<UnitArg>,
    /// Numerical propagation in scans
    #[arg(long, global = true)]
    exact: bool,
    #[arg(long = "n-basis", global = true)]
    n_basis: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Day,
    Second,
}

impl From<UnitArg> for TimeUnit {
    fn from(u: UnitArg) -> Self {
        match u {
            UnitArg::Day => TimeUnit::TradingDay,
            UnitArg::Second => TimeUnit::Second,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Energy levels, characteristic frequencies and dipole couplings
    Spectrum,
    /// Ground-state depletion across a grid of drive frequencies
    Scan,
    /// Amplitudes, densities and interval probabilities over time
    Propagate,
    /// Model parameters from market observables
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct CalibrateArgs {
    /// `date,close` CSV; its close-to-close volatility replaces --sigma-annual
    #[arg(long)]
    series: Option<PathBuf>,
    #[arg(long)]
    sigma_annual: Option<f64>,
    #[arg(long)]
    mean_price: Option<f64>,
    #[arg(long)]
    tick: Option<f64>,
    #[arg(long)]
    limit_fraction: Option<f64>,
    /// Read --sigma-annual as a percentage
    #[arg(long)]
    percent: bool,
}

fn load(path: &Option<PathBuf>) -> Result<RunConfig, Error> {
    match path {
        Some(p) => RunConfig::from_path(p),
        None => Err(Error::Config("--config is required for this command".into())),
    }
}

fn run(cli: Cli) -> Result<Value, Error> {
    let overrides = Overrides {
        unit: cli.unit.map(TimeUnit::from),
        exact: cli.exact,
        n_basis: cli.n_basis,
    };
    let out_dir = |cfg: Option<&RunConfig>| {
        cli.out
            .clone()
            .or_else(|| cfg.and_then(|c| c.out_dir.clone()))
            .unwrap_or_else(|| PathBuf::from("."))
    };
    match &cli.command {
        Command::Spectrum => {
            let cfg = overrides.apply(&load(&cli.config)?);
            cmd_spectrum(&cfg, &out_dir(Some(&cfg)))
        }
        Command::Scan => {
            let cfg = overrides.apply(&load(&cli.config)?);
            cmd_scan(&cfg, &out_dir(Some(&cfg)))
        }
        Command::Propagate => {
            let cfg = overrides.apply(&load(&cli.config)?);
            cmd_propagate(&cfg, &out_dir(Some(&cfg)))
        }
        Command::Calibrate(args) => {
            let base = cli.config.as_ref().map(|p| RunConfig::from_path(p)).transpose()?;
            let mut inputs = base.as_ref().and_then(|c| c.market).unwrap_or_default();
            if let Some(v) = args.sigma_annual {
                inputs.sigma_annual = v;
                inputs.quote = VolatilityQuote::Fraction;
            }
            if args.percent {
                inputs.quote = VolatilityQuote::Percent;
            }
            if let Some(v) = args.mean_price {
                inputs.mean_price = v;
            }
            if let Some(v) = args.tick {
                inputs.tick = v;
            }
            if let Some(v) = args.limit_fraction {
                inputs.limit_fraction = v;
            }
            let unit = overrides
                .unit
                .or(base.as_ref().map(|c| c.model.time_unit))
                .unwrap_or(TimeUnit::TradingDay);
            let request = CalibrateRequest {
                inputs,
                series: args.series.clone(),
                unit,
                n_basis: overrides.n_basis.or(base.as_ref().map(|c| c.model.n_basis)),
            };
            let base = base.map(|c| RunConfig {
                exact_path: c.exact_path || overrides.exact,
                ..c
            });
            cmd_calibrate(&request, base.as_ref(), &out_dir(base.as_ref()))
        }
    }
}

fn fail(category: &str, code: u8, kind: &str, message: &str) -> ExitCode {
    eprintln!("{}", json!({ "category": category, "kind": kind, "message": message }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", 2, "Usage", e.to_string().trim()),
    };
    match run(cli) {
        Ok(summary) => {
            for path in summary["outputs"].as_array().into_iter().flatten() {
                println!("{}", path.as_str().unwrap_or_default());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let category = e.category();
            fail(category.as_str(), category.exit_code() as u8, e.kind(), &e.to_string())
        }
    }
}
