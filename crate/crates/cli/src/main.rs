use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use modeport_cli::commands::{self, Options, Output};
use modeport_cli::output::{gnuplot_script, Format};
use modeport_cli::selftest::{self, Fault};
use modeport_cli::{CliError, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "modeport", version, about = "Teleportation of two-mode bosonic states: sweeps, noise studies and self-tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Data output path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides every seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Adds per-row wall time to sweep output.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single teleportation run: per-outcome table and performance summary.
    Teleport,
    /// Closed-form fidelity and entanglement over a particle-number grid.
    Sweep,
    /// Dephasing or particle-loss scan over a time grid.
    Noise,
    /// Convergence of a resource family towards perfect fidelity.
    Converge,
    /// Bose-Hubbard double-well ground state and its teleportation performance.
    GroundState,
    /// Built-in verification suite.
    Selftest {
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Environment(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    if let Command::Selftest { inject_fault } = cli.command {
        let (report, ok) = selftest::run(inject_fault)?;
        write_output(cli.out.as_ref(), &report.render(cli.format))?;
        return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) });
    }
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = ExperimentConfig::load(path)?;
    let opts = Options { seed: cli.seed, timing: cli.timing };
    let command = match cli.command {
        Command::Teleport => commands::teleport,
        Command::Sweep => commands::sweep,
        Command::Noise => commands::noise,
        Command::Converge => commands::converge,
        Command::GroundState => commands::ground_state,
        Command::Selftest { .. } => unreachable!("handled above"),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Environment(format!("cannot start thread pool: {e}")))?;
    let Output { report, plot } = pool.install(|| command(&cfg, &opts))?;
    let data = cli.out.as_ref().or(cfg.output.data.as_ref());
    write_output(data, &report.render(cli.format))?;
    if let Some(script) = &cfg.output.gnuplot {
        let (Some(data), Some(plot)) = (data, plot) else {
            return Err(CliError::Config("gnuplot output needs a data file and a plottable experiment".into()));
        };
        if cli.format != Format::Csv {
            return Err(CliError::Config("gnuplot output needs --format csv".into()));
        }
        let table = &report.tables[0];
        let text = gnuplot_script(&data.display().to_string(), table, plot.x, &plot.ys, plot.logscale, plot.reference);
        write_output(Some(script), &text)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("modeport: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
