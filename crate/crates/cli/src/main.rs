use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scflab_cli::{run, CliError, CommandKind, ConfigError, ExperimentConfig, Origin};

#[derive(Parser)]
#[command(name = "scflab", version, about = "Memory-kernel oscillator laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key = value config file
    #[arg(long, global = true, allow_hyphen_values = true)]
    config: Option<PathBuf>,

    /// Coupling ratio g/gamma
    #[arg(long, global = true, allow_hyphen_values = true)]
    ratio: Option<String>,

    /// Fock-space truncation
    #[arg(long, global = true, allow_hyphen_values = true)]
    n_cut: Option<String>,

    /// Horizon in units of 1/gamma
    #[arg(long, global = true, allow_hyphen_values = true)]
    t_end: Option<String>,

    /// Integration step in units of 1/gamma
    #[arg(long, global = true, allow_hyphen_values = true)]
    dt: Option<String>,

    /// Initial Fock level
    #[arg(long, global = true, allow_hyphen_values = true)]
    fock: Option<String>,

    /// Spacing of recorded times
    #[arg(long, global = true, allow_hyphen_values = true)]
    record_every: Option<String>,

    /// Deviation tolerance for `compare`
    #[arg(long, global = true, allow_hyphen_values = true)]
    tolerance: Option<String>,

    /// Comma-separated grid keys, e.g. chi_extent=3,chi_count=200
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid_spec: Option<String>,

    /// Sweep ratios as start:stop:step or a comma-separated list
    #[arg(long, global = true, allow_hyphen_values = true)]
    ratios: Option<String>,

    /// Sweep worker threads (0 = one per core)
    #[arg(long, global = true, allow_hyphen_values = true)]
    workers: Option<String>,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Evolve and write trace, chi and Wigner fields
    Simulate,
    /// Audit physicality criteria and report first violations
    Audit,
    /// Audit a grid of coupling ratios
    Sweep,
    /// Compare the integrator against the closed form
    Compare,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut config = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        config.apply_file(path)?;
    }
    let flags = [
        ("ratio", "--ratio", &cli.ratio),
        ("n_cut", "--n-cut", &cli.n_cut),
        ("t_end", "--t-end", &cli.t_end),
        ("dt", "--dt", &cli.dt),
        ("initial_fock", "--fock", &cli.fock),
        ("record_every", "--record-every", &cli.record_every),
        ("tolerance", "--tolerance", &cli.tolerance),
        ("ratios", "--ratios", &cli.ratios),
        ("workers", "--workers", &cli.workers),
    ];
    for (key, flag, value) in flags {
        if let Some(v) = value {
            config.set(key, v, Origin::Flag(flag.into()))?;
        }
    }
    if let Some(spec) = &cli.grid_spec {
        config.apply_grid_spec(spec)?;
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Command::Simulate => CommandKind::Simulate,
        Command::Audit => CommandKind::Audit,
        Command::Sweep => CommandKind::Sweep,
        Command::Compare => CommandKind::Compare,
    };
    let result = resolve(&cli)
        .map_err(CliError::from)
        .and_then(|config| run(command, &config, &cli.out_dir));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.message.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("scflab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
