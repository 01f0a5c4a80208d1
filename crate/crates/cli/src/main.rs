//! camscout: discover live network cameras, classify them, and archive
//! snapshots on a schedule. Stages communicate only through the registry and
//! manifest files; logs go to stderr, data to files.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{ArgAction, Parser, Subcommand};

use crate::config::{resolve, ConfigFile};

#[derive(Debug, Parser)]
#[command(
    name = "camscout",
    version,
    about = "Discover live network cameras and archive snapshots from them"
)]
struct Cli {
    /// Flat key=value config file; keys mirror the flags, flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Increase log verbosity (-v debug, -vv trace).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,

    /// Only log errors.
    #[arg(short, long, global = true)]
    quiet: bool,

    /// User-Agent header sent with every request [default: camscout/<version>]
    #[arg(long, global = true)]
    user_agent: Option<String>,

    /// Per-request HTTP timeout in seconds [default: 10]
    #[arg(long, global = true)]
    request_timeout_secs: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Crawl seed pages and register camera-like candidate links
    Discover(commands::discover::DiscoverArgs),
    /// Sample registered candidates over time and write liveness verdicts
    Identify(commands::identify::IdentifyArgs),
    /// Periodically capture snapshots from every live camera
    Archive(commands::archive::ArchiveArgs),
    /// Serve a mock camera fleet with known ground truth
    Fleet(commands::fleet::FleetArgs),
    /// Summarize a registry and its archive manifest
    Stats(commands::stats::StatsArgs),
}

/// Settings shared by every subcommand.
pub struct Global {
    pub file: ConfigFile,
    pub user_agent: String,
    pub request_timeout: Duration,
}

fn init_tracing(verbose: u8, quiet: bool) {
    let level = if quiet {
        "error"
    } else {
        match verbose {
            0 => "info",
            1 => "debug",
            _ => "trace",
        }
    };
    let filter = tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| {
        tracing_subscriber::EnvFilter::new(format!("camscout={level},camscout_core={level}"))
    });
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    init_tracing(cli.verbose, cli.quiet);

    let file = match &cli.config {
        Some(path) => match ConfigFile::load(path) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("camscout: config error: {e:#}");
                return ExitCode::from(2);
            }
        },
        None => ConfigFile::empty(),
    };

    let global = match build_global(&cli, file) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("camscout: config error: {e:#}");
            return ExitCode::from(2);
        }
    };

    let (stage, result) = match cli.command {
        Command::Discover(args) => ("discover", commands::discover::run(args, &global).await),
        Command::Identify(args) => ("identify", commands::identify::run(args, &global).await),
        Command::Archive(args) => ("archive", commands::archive::run(args, &global).await),
        Command::Fleet(args) => ("fleet", commands::fleet::run(args, &global).await),
        Command::Stats(args) => ("stats", commands::stats::run(args, &global).await),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("camscout {stage}: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn build_global(cli: &Cli, file: ConfigFile) -> anyhow::Result<Global> {
    let user_agent = resolve(
        cli.user_agent.clone(),
        file.get_str("user_agent"),
        camscout_core::fetch::DEFAULT_USER_AGENT.to_string(),
    );
    let timeout_secs = resolve(
        cli.request_timeout_secs,
        file.get::<f64>("request_timeout_secs")?,
        10.0,
    );
    if timeout_secs <= 0.0 {
        anyhow::bail!("request_timeout_secs must be positive");
    }
    Ok(Global {
        file,
        user_agent,
        request_timeout: Duration::from_secs_f64(timeout_secs),
    })
}
