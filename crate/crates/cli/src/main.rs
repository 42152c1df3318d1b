use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use einforge_cli::builtins::{builtin, builtin_names};
use einforge_cli::config::{load_scenario, parse_scenario, ScenarioConfig};
use einforge_cli::emit::{emit_report, write_reports, Format};
use einforge_cli::runner::{run_scenario, RunOptions, TierChoice};
use einforge_core::kernel::sampling::{env_thread_count, with_threads};

/// Builds explicit Einstein, ambient and Poincaré metrics from a scenario and
/// checks their defining identities numerically.
///
/// Exit status is 0 iff every check passes, 1 if any check fails and 2 on
/// configuration or construction errors. EF_THREADS caps worker threads.
#[derive(Parser, Debug)]
#[command(name = "einforge", version)]
struct Args {
    /// Scenario file, or the name of a builtin scenario.
    #[arg(long, required_unless_present = "list_builtins")]
    scenario: Option<String>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the number of sample points.
    #[arg(long)]
    samples: Option<usize>,
    /// Jets used by the Einstein-type checks.
    #[arg(long = "tol-tier", value_parser = ["analytic", "fd"], default_value = "analytic")]
    tol_tier: String,
    /// Output file. Defaults to the scenario's `out`, else standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "plain"], default_value = "csv")]
    format: String,
    /// Prints the builtin scenario names and exits.
    #[arg(long)]
    list_builtins: bool,
}

fn resolve(scenario: &str) -> Result<ScenarioConfig, String> {
    let path = Path::new(scenario);
    if path.exists() {
        return load_scenario(path).map_err(|e| format!("{}: {e}", path.display()));
    }
    match builtin(scenario) {
        Some(text) => parse_scenario(text).map_err(|e| format!("builtin {scenario}: {e}")),
        None => Err(format!("'{scenario}' is neither a file nor a builtin scenario (see --list-builtins)")),
    }
}

fn run(args: Args) -> Result<bool, String> {
    if args.list_builtins {
        for name in builtin_names() {
            println!("{name}");
        }
        return Ok(true);
    }
    let config = resolve(args.scenario.as_deref().expect("clap enforces --scenario"))?;
    let options = RunOptions {
        seed: args.seed,
        samples: args.samples,
        tier: if args.tol_tier == "fd" { TierChoice::FiniteDifference } else { TierChoice::Analytic },
    };
    let format: Format = args.format.parse()?;
    let execute = || run_scenario(&config, &options);
    let reports = match env_thread_count() {
        Some(n) => with_threads(n, execute),
        None => execute(),
    }
    .map_err(|e| e.to_string())?;
    let out = args.out.or_else(|| config.out.clone());
    match out {
        Some(path) => emit_report(&reports, format, &path).map_err(|e| format!("{}: {e}", path.display()))?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_reports(&reports, format, &mut lock).and_then(|_| lock.flush()).map_err(|e| e.to_string())?;
        }
    }
    for r in reports.iter().filter(|r| !r.pass) {
        eprintln!("FAIL {} ({}): max residual {:e} > tolerance {:e}", r.check_name, r.scenario, r.max_abs_residual, r.tolerance);
    }
    Ok(reports.iter().all(|r| r.pass))
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
