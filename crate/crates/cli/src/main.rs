use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cheshire_cli::commands;
use cheshire_cli::config::{ConfigError, Origin, RawConfig, RunConfig};
use cheshire_cli::tables::weak_values_to_csv;
use cheshire_core::exec::Execution;

/// Weak-value sweeps, attenuation curves and tomography of the
/// wave/particle Cheshire-cat interferometer.
#[derive(Parser)]
#[command(name = "cheshire", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weak values of all four path ⊗ attribute projectors over α.
    WeakValues(Common),
    /// Normalized incidence vs imaginary time, one CSV per α and observable.
    IteCurve(Common),
    /// Simulated tomography of the BS2 output state.
    Tomography(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    /// `exact` or `shots`.
    #[arg(long)]
    mode: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Degrees: `0,45,90` or `start:stop:step`.
    #[arg(long)]
    alpha: Option<String>,
    /// Comma-separated ND transmissions.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// Subset of `PL,PR,WL,WR`.
    #[arg(long)]
    observables: Option<String>,
    /// Depolarizing strength applied before tomography.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    resamples: Option<String>,
    #[arg(long)]
    weighted: Option<String>,
    #[arg(long)]
    repeats: Option<String>,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut raw = RawConfig::default();
        if let Some(path) = &self.config {
            raw.apply_file(path)?;
        }
        raw.apply_env(std::env::vars())?;
        let flags = [
            ("seed", &self.seed),
            ("mode", &self.mode),
            ("out", &self.out),
            ("alpha", &self.alpha),
            ("schedule", &self.schedule),
            ("lambda", &self.lambda),
            ("observables", &self.observables),
            ("noise", &self.noise),
            ("resamples", &self.resamples),
            ("weighted", &self.weighted),
            ("repeats", &self.repeats),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                raw.set(key, v, Origin::Flag(key.into()))?;
            }
        }
        RunConfig::resolve(&raw)
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

enum Failure {
    Config(ConfigError),
    Numerical(cheshire_core::Error),
    Io(PathBuf, std::io::Error),
}

impl Failure {
    fn report(&self) -> ExitCode {
        match self {
            Failure::Config(e) => {
                eprintln!("configuration error: {e}");
                ExitCode::from(2)
            }
            Failure::Numerical(e) => {
                eprintln!("numerical failure: {e}");
                ExitCode::from(3)
            }
            Failure::Io(p, e) => {
                eprintln!("cannot write {}: {e}", p.display());
                ExitCode::from(1)
            }
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Io(dir.to_path_buf(), e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Failure::Io(path.clone(), e))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (Command::WeakValues(common) | Command::IteCurve(common) | Command::Tomography(common)) =
        &cli.command;
    let cfg = common.resolve().map_err(Failure::Config)?;
    let exec = common.execution();
    match cli.command {
        Command::WeakValues(_) => {
            let rows = commands::weak_values(&cfg, exec).map_err(Failure::Numerical)?;
            write(&cfg.out, "weak_values.csv", &weak_values_to_csv(&rows))
        }
        Command::IteCurve(_) => {
            let tables = commands::ite_curves(&cfg, exec).map_err(Failure::Numerical)?;
            for t in tables {
                let name = format!("ite_{}_alpha{}.csv", t.observable, t.alpha_deg);
                write(&cfg.out, &name, &t.to_csv())?;
            }
            Ok(())
        }
        Command::Tomography(_) => {
            let report = commands::tomography(&cfg, exec).map_err(Failure::Numerical)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            write(&cfg.out, "tomography.json", &(json + "\n"))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
