use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Parser, Subcommand};
use radshoot_cli::commands::{self, Context};
use radshoot_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "radshoot",
    version,
    about = "Shooting solver for radial Lane-Emden type equations"
)]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// JSON run config
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Multiplies every tolerance
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,

    /// Worker threads for sweeps
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Shoot and label each alpha
    Classify,
    /// Sweep alpha and locate type changes
    Scan,
    /// Evaluate the energy identities along shots
    Pohozaev,
    /// Check the weight hypotheses
    Hypotheses,
    /// Build and validate the constructed weight
    Construct,
    /// Compare against closed-form solutions
    Oracle,
}

fn run(args: &Args) -> anyhow::Result<String> {
    let config = match &args.config {
        Some(p) => Some(RunConfig::load(p).with_context(|| format!("loading {}", p.display()))?),
        None => None,
    };
    if !(args.tol_scale > 0.0 && args.tol_scale.is_finite()) {
        return Err(CliError::Config(format!(
            "--tol-scale must be positive, got {}",
            args.tol_scale
        ))
        .into());
    }
    let out = args
        .out
        .clone()
        .or_else(|| {
            config
                .as_ref()
                .and_then(|c| c.out.clone())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = Context {
        config,
        out,
        tol_scale: args.tol_scale,
        jobs: args.jobs,
    };
    let text = match args.command {
        Command::Classify => commands::classify(&ctx),
        Command::Scan => commands::scan(&ctx),
        Command::Pohozaev => commands::pohozaev(&ctx),
        Command::Hypotheses => commands::hypotheses(&ctx),
        Command::Construct => commands::construct(&ctx),
        Command::Oracle => commands::oracle(&ctx),
    }?;
    Ok(text)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            let (code, body) = match err.downcast_ref::<CliError>() {
                Some(e) => (e.exit_code(), e.to_json()),
                None => (
                    1,
                    serde_json::json!({ "error": "internal", "message": format!("{err:#}") }),
                ),
            };
            eprintln!("{body}");
            ExitCode::from(code)
        }
    }
}
