use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wallcross::cli::{self, exit, CliError, Report, RunConfig};
use wallcross::lattice_algebra::ApplicationOrder;

#[derive(Parser)]
#[command(name = "wallcross", version, about = "Spectral networks, BPS spectra and wall-crossing checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Truncation level L (overrides the config).
    #[arg(long, global = true)]
    truncation: Option<f64>,
    /// Order in which the rays of a product act.
    #[arg(long, global = true)]
    order: Option<ApplicationOrder>,
    /// Output path: the report, or the SVG for network-svg.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Active rays of a surface in a sector.
    Spectrum,
    /// Wall-crossing formula between two sides of a wall.
    VerifyWcf,
    /// Wall identities in the local models.
    VerifyWall,
    /// SVG plot of the truncated spectral network.
    NetworkSvg,
    /// Lamination from edge coordinates and back.
    Fg,
    /// Approximation of a generator by lamination lifts.
    Approx,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    if cli.truncation.is_some() {
        cfg.truncation = cli.truncation;
    }
    if cli.order.is_some() {
        cfg.order = cli.order;
    }
    if !matches!(cli.command, Command::VerifyWall) && cli.config.is_none() {
        return Err(CliError::Config("--config is required for this command".into()));
    }
    if cli.config.is_some() {
        cfg.validate()?;
    }
    Ok(cfg)
}

fn name(command: Command) -> &'static str {
    match command {
        Command::Spectrum => "spectrum",
        Command::VerifyWcf => "verify-wcf",
        Command::VerifyWall => "verify-wall",
        Command::NetworkSvg => "network-svg",
        Command::Fg => "fg",
        Command::Approx => "approx",
    }
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let cfg = load(cli)?;
    let svg_out = match cli.command {
        Command::NetworkSvg => cli.out.as_deref(),
        _ => None,
    };
    cli::run_command(name(cli.command), &cfg, svg_out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(report) => {
            let text = report.render();
            let target = match cli.command {
                Command::NetworkSvg => None,
                _ => cli.out.clone(),
            };
            match target {
                Some(p) => match std::fs::write(&p, text) {
                    Ok(()) => report.exit_code,
                    Err(e) => {
                        eprintln!("error: {}: {e}", p.display());
                        exit::IO
                    }
                },
                None => {
                    print!("{text}");
                    report.exit_code
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
