use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cqed_cli::config::{parse_backend, uniform_grid, RunConfig};
use cqed_cli::csv;
use cqed_cli::sweep::{run_point, sweep_points};
use cqed_cli::{parse_config, run_preset, run_sweep, validate, CliError, Level, Preset, Result, RunOptions};
use cqed_core::analytic::phase_space_trajectory;
use cqed_core::{Backend, StageKind};

/// Environment variable holding the default output directory.
const OUT_DIR_ENV: &str = "CQED_OUT_DIR";

#[derive(Parser)]
#[command(name = "cqed", version, about = "Entanglement dynamics of an atom crossing two dissipative cavities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory (default: $CQED_OUT_DIR or the working directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evolution backend: dense, branch or oracle.
    #[arg(long, value_parser = backend)]
    backend: Option<Backend>,
    /// Fock cutoffs of the two cavities.
    #[arg(long, value_name = "N1,N2", value_parser = truncation)]
    truncation: Option<[usize; 2]>,
    /// Raise the cutoffs until the concurrences stop changing.
    #[arg(long)]
    converge: bool,
    /// Concurrent simulations (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            backend: self.backend,
            truncation: self.truncation,
            converge: self.converge,
            jobs: self.jobs,
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the base scenario of a configuration file.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run every parameter tuple of a configuration file.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Produce a named figure data set.
    Preset {
        name: Preset,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-check the backends against each other.
    Validate {
        /// Every amplitude and damping combination plus the integrator.
        #[arg(long)]
        full: bool,
    },
    /// Write the first-cavity branch labels of a configuration file.
    PhaseSpace {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn backend(text: &str) -> std::result::Result<Backend, String> {
    parse_backend(text).ok_or_else(|| format!("expected dense, branch or oracle, got '{text}'"))
}

fn truncation(text: &str) -> std::result::Result<[usize; 2], String> {
    let parts: Vec<&str> = text.split(',').collect();
    let parsed: Option<Vec<usize>> = parts.iter().map(|p| p.trim().parse().ok().filter(|&n| n > 0)).collect();
    match parsed.as_deref() {
        Some(&[n1, n2]) => Ok([n1, n2]),
        _ => Err(format!("expected two positive cutoffs N1,N2, got '{text}'")),
    }
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: path.into(), source: e })?;
    parse_config(&text)
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, common } => {
            let cfg = load(&config)?;
            let options = common.options();
            let point = sweep_points(&cfg.scenario, &cfg.sweep, &options).swap_remove(0);
            let trajectory = run_point(&point.scenario, &cfg.sweep.times, cfg.sweep.backend, &options)?;
            let path = common.out_dir().join(point.file_name());
            csv::write_file(&path, &csv::render(&csv::records(&trajectory)))?;
            report(&[path]);
        }
        Command::Sweep { config, common } => {
            let cfg = load(&config)?;
            report(&run_sweep(&cfg.scenario, &cfg.sweep, &common.out_dir(), &common.options())?);
        }
        Command::Preset { name, common } => {
            report(&run_preset(name, &common.out_dir(), &common.options())?);
        }
        Command::Validate { full } => {
            let outcome = validate(if full { Level::Full } else { Level::Quick });
            print!("{outcome}");
            if !outcome.passed() {
                return Err(CliError::Validation("see the FAIL lines above".into()));
            }
        }
        Command::PhaseSpace { config, out } => {
            let cfg = load(&config)?;
            let s = &cfg.scenario;
            let times = uniform_grid(s.duration(StageKind::Cavity1), cfg.sweep.times.len().max(2));
            let path = out
                .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."))
                .join("phase_space.csv");
            csv::write_file(&path, &csv::render_phase_space(&phase_space_trajectory(s, &times)))?;
            report(&[path]);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
