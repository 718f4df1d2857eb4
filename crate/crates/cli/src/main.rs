//! Command-line entry point: parse arguments, load the configuration
//! (file or bundled preset), apply overrides, run the requested mode, and
//! write the CSV to the output path or stdout.
//!
//! Exit codes: 0 on success, 1 for configuration/input problems, 2 for
//! numerical failures during a simulation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use repint_cli::config::{ExperimentConfig, Mode};
use repint_cli::{preset, run, Failure, PRESETS};

#[derive(Parser)]
#[command(
    name = "repint",
    version,
    about = "Simulate a quantum system driven by a stream of finite-duration probe collisions",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the master equation and write observable/work time series
    Evolve(RunArgs),
    /// Solve the stationary state at a single operating point
    Steady(RunArgs),
    /// Scan steady-state observables over one or two parameter axes
    Sweep(RunArgs),
    /// Average stochastic collision trajectories against the generator
    Montecarlo(RunArgs),
    /// Benchmark every kick convention against the stochastic oracle
    Compare(RunArgs),
}

impl Command {
    fn mode(&self) -> Mode {
        match self {
            Command::Evolve(_) => Mode::Evolve,
            Command::Steady(_) => Mode::Steady,
            Command::Sweep(_) => Mode::Sweep,
            Command::Montecarlo(_) => Mode::Montecarlo,
            Command::Compare(_) => Mode::Compare,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Evolve(a)
            | Command::Steady(a)
            | Command::Sweep(a)
            | Command::Montecarlo(a)
            | Command::Compare(a) => a,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Path to a TOML experiment configuration
    #[arg(long, conflicts_with = "preset", value_name = "PATH")]
    config: Option<PathBuf>,
    /// Bundled preset name (fig2 … fig8)
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Write CSV here (overrides run.out; stdout if neither is set)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Override the RNG seed from the configuration
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Cap the worker-thread count
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Suppress the timestamp line so identical runs are byte-identical
    #[arg(long)]
    reproducible: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests route through clap's error path but
            // are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{failure}");
            match failure {
                Failure::Config(_) => ExitCode::from(1),
                Failure::Numeric(_) => ExitCode::from(2),
            }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let mode = cli.command.mode();
    let args = cli.command.args();

    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot configure thread pool: {e}")))?;
    }

    let text = load_config_text(args)?;
    let mut cfg = ExperimentConfig::parse(&text)?;

    // The subcommand decides the mode; a mode named in the file must agree.
    if let Some(declared) = &cfg.run.mode {
        if declared != mode.name() {
            return Err(Failure::Config(format!(
                "config declares run.mode = \"{declared}\" but the subcommand is \"{}\"",
                mode.name()
            )));
        }
    }
    cfg.run.mode = Some(mode.name().to_string());
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.run.out = Some(out.display().to_string());
    }

    let csv = run::execute(mode, &cfg, args.reproducible)?;

    match &cfg.run.out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| Failure::Config(format!("cannot write {path}: {e}"))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn load_config_text(args: &RunArgs) -> Result<String, Failure> {
    match (&args.config, &args.preset) {
        (Some(path), None) => std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display()))),
        (None, Some(name)) => preset(name).map(str::to_string).ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            Failure::Config(format!(
                "unknown preset \"{name}\"; bundled presets: {}",
                names.join(", ")
            ))
        }),
        (None, None) => Err(Failure::Config(
            "provide --config PATH or --preset NAME".into(),
        )),
        (Some(_), Some(_)) => unreachable!("clap rejects --config with --preset"),
    }
}
