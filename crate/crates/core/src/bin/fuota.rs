//! Command-line front end. Exit status: 0 ok, 2 config or input error,
//! 3 numerical failure (also a `compare` outside tolerance), 4 incomplete
//! simulation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lora_fuota::config::{load_config, ExperimentSpec, Mode};
use lora_fuota::error::{Error, Result};
use lora_fuota::runner;

#[derive(Parser)]
#[command(name = "fuota", version, about = "Multicast LoRaWAN firmware update model and simulator")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    runs: Option<u32>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
}

#[derive(Subcommand)]
enum Verb {
    /// Analytical per-distance and averaged metrics.
    Analyze(Common),
    /// Monte Carlo metrics, with analysis alongside in `both` mode.
    Simulate(Common),
    /// Proposed scheme over the configured (w, L) grid.
    Sweep(Common),
    /// Battery lifetime for the configured cases.
    Lifetime(Common),
    /// Relative differences between two per_distance.csv files.
    Compare {
        reference: PathBuf,
        candidate: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        /// Optional CSV report of every compared cell.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    match s {
        "analysis" => Ok(Mode::Analysis),
        "simulate" => Ok(Mode::Simulate),
        "both" => Ok(Mode::Both),
        _ => Err(format!("expected analysis, simulate or both, got {s:?}")),
    }
}

fn resolve(c: &Common, default_mode: impl FnOnce(Mode) -> Mode) -> Result<ExperimentSpec> {
    let mut spec = load_config(&c.config)?;
    if let Some(s) = c.seed {
        spec.experiment.seed = s;
    }
    if let Some(r) = c.runs {
        if r == 0 {
            return Err(Error::InvalidParameter("--runs must be positive".into()));
        }
        spec.experiment.runs = r;
    }
    spec.experiment.mode = c.mode.unwrap_or_else(|| default_mode(spec.experiment.mode));
    Ok(spec)
}

fn run(cli: Cli) -> Result<i32> {
    let outcome = match &cli.verb {
        Verb::Analyze(c) => {
            let spec = resolve(c, |_| Mode::Analysis)?;
            runner::run_tables("analyze", &spec, spec.experiment.mode, &c.out)?
        }
        Verb::Simulate(c) => {
            let spec = resolve(c, |m| if m.simulate() { m } else { Mode::Simulate })?;
            runner::run_tables("simulate", &spec, spec.experiment.mode, &c.out)?
        }
        Verb::Sweep(c) => {
            let spec = resolve(c, |m| m)?;
            runner::run_sweep(&spec, spec.experiment.mode, &c.out)?
        }
        Verb::Lifetime(c) => {
            let spec = resolve(c, |m| m)?;
            runner::run_lifetime(&spec, spec.experiment.mode, &c.out)?
        }
        Verb::Compare { reference, candidate, tolerance, out } => {
            let report = runner::compare_files(reference, candidate, *tolerance)?;
            if let Some(p) = out {
                runner::write_compare_report(&report, p)?;
            }
            let failed = report.rows.iter().filter(|r| !r.pass).count();
            println!(
                "compared {} cells, {failed} outside tolerance {tolerance}, max relative error {:.4}",
                report.rows.len(),
                report.max_rel_error()
            );
            return Ok(if report.pass() { 0 } else { 3 });
        }
    };
    for f in &outcome.files {
        println!("{}", f.display());
    }
    if outcome.incomplete {
        eprintln!("warning: some recipients did not finish within the transmission cap");
        return Ok(4);
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match run(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
