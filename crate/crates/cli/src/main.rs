use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bbjump_cli::report::emit_report;
use bbjump_cli::{
    resolve_output_dir, run_scenario, ConfigError, ExperimentConfig, ExperimentReport, OutputFormat, RunError, Scenario,
    EXIT_FAILURE, OUT_DIR_ENV,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bbjump", version, about = "Decoupling and jump-code simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `base_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides BBJUMP_OUT_DIR and `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `num_trajectories`.
        #[arg(long)]
        trajectories: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// Check the operator identity suite; exits 1 if any check fails.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// List the available scenarios.
    List,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, out, trajectories, format } => run(config, seed, out, trajectories, format),
        Command::Verify { seed, out, format } => verify(seed, out, format),
        Command::List => {
            for s in Scenario::ALL {
                println!("{:<22}{}", s.name(), s.description());
            }
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILURE as u8),
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn env_out_dir() -> Option<PathBuf> {
    std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn run(
    path: PathBuf,
    seed: Option<u64>,
    out: Option<PathBuf>,
    trajectories: Option<usize>,
    format: Option<OutputFormat>,
) -> Result<bool, RunError> {
    let mut config = ExperimentConfig::from_path(&path)?;
    if let Some(s) = seed {
        config.base_seed = s;
    }
    if let Some(t) = trajectories {
        config.num_trajectories = t;
    }
    if let Some(f) = format {
        config.output.format = Some(f);
    }
    config.validate()?;
    let scenario = config.scenario()?;
    if scenario.uses_trajectories() {
        let noise = config.noise_model().map_err(|e| ConfigError::new("noise", e.to_string()))?;
        if let Some(msg) = config.pulse_schedule().advisory(&noise) {
            log::warn!("{msg}");
        }
    }
    log::info!("running {} with seed {}", scenario, config.base_seed);
    let report = run_scenario(&config)?;
    let dir = resolve_output_dir(out, env_out_dir(), config.output.dir.clone());
    let stem = config.output.stem.clone().unwrap_or_else(|| scenario.name().to_string());
    write_report(&report, dir, &stem, config.output.format.unwrap_or_default())?;
    Ok(report.checks_passed != Some(false) || scenario != Scenario::GateIdentities)
}

fn write_report(report: &ExperimentReport, dir: Option<PathBuf>, stem: &str, format: OutputFormat) -> Result<(), RunError> {
    match dir {
        Some(dir) => {
            for p in emit_report(report, &dir, stem, format)? {
                log::info!("wrote {}", p.display());
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            if format.json() {
                lock.write_all(report.to_json().map_err(std::io::Error::other)?.as_bytes())?;
            } else {
                report.write_csv(&mut lock)?;
            }
        }
    }
    Ok(())
}

fn verify(seed: u64, out: Option<PathBuf>, format: Option<OutputFormat>) -> Result<bool, RunError> {
    let config = ExperimentConfig::from_toml_str(&format!("scenario = \"gate_identities\"\nbase_seed = {seed}\n"))
?;
    let report = run_scenario(&config)?;
    let passed = report.checks_passed == Some(true);
    match resolve_output_dir(out, env_out_dir(), None) {
        Some(dir) => {
            for p in emit_report(&report, &dir, "verify", format.unwrap_or_default())? {
                log::info!("wrote {}", p.display());
            }
        }
        None if format.is_some() => write_report(&report, None, "verify", format.unwrap_or_default())?,
        None => {
            for row in &report.rows {
                let value = |k: &str| row.values.get(k).copied().unwrap_or(f64::NAN);
                println!(
                    "{} {:<30} draws={:<4} max_dev={:.3e} tol={:.0e}",
                    if value("passed") == 1.0 { "PASS" } else { "FAIL" },
                    row.label,
                    value("draws"),
                    value("max_deviation"),
                    value("tolerance")
                );
            }
        }
    }
    if !passed {
        log::error!("identity suite failed");
    }
    Ok(passed)
}
