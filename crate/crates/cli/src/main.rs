use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phonon_source_cli::commands::{self, CliResult};
use phonon_source_cli::config::RunConfig;

/// Dark-polariton phonon source: preparation runs, adiabatic conversion,
/// and validity checks.
#[derive(Parser, Debug)]
#[command(name = "phonon-source", version)]
struct Cli {
    /// Flat `key = value` config file; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override one config key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Fock cutoff of the polariton mode.
    #[arg(long, global = true)]
    cutoff: Option<usize>,
    /// Window length in units of 1/(2π g).
    #[arg(long, global = true)]
    tmax: Option<f64>,
    /// Number of sample intervals.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Print the resolved config in canonical form before running.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One preparation run at the configured point.
    Simulate,
    /// Preparation runs over `n_th_sweep`.
    SweepThermal,
    /// Preparation runs over `drive_sweep`.
    SweepDrive,
    /// Exponential Ω_d ramp converting the dark polariton into a phonon.
    Adiabatic {
        /// Summary CSV of a preparation run; the ramp starts at its g²
        /// minimum plus `dwell_ms`.
        #[arg(long)]
        after: Option<PathBuf>,
    },
    /// Exact-diagonalization checks of the effective model.
    Oracle,
    /// Validity-regime inequalities.
    CheckRegime,
}

fn resolve(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::parse(&commands::read(path)?)?,
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        cfg.apply_override(kv)?;
    }
    if let Some(c) = cli.cutoff {
        cfg.cutoff = c;
    }
    if let Some(t) = cli.tmax {
        cfg.t_max = t;
    }
    if let Some(s) = cli.samples {
        cfg.samples = s;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult {
    let cfg = resolve(cli)?;
    if cli.print_config {
        print!("{}", cfg.emit());
    }
    let out = &cli.out;
    match &cli.command {
        Command::Simulate => commands::simulate(&cfg, out),
        Command::SweepThermal => commands::sweep_thermal(&cfg, out),
        Command::SweepDrive => commands::sweep_drive(&cfg, out),
        Command::Adiabatic { after } => commands::adiabatic(&cfg, out, after.as_deref()),
        Command::Oracle => commands::oracle(&cfg, out),
        Command::CheckRegime => commands::check_regime_cmd(&cfg, out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::from(commands::EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
