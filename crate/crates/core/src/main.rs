use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use ssn_policy_forge::api::{self, ApiConfig};
use ssn_policy_forge::monitor::Scenario;

#[derive(Parser)]
#[command(
    version,
    about = "Compose sensor-network policies from aggregated concepts and run them against a simulated mine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the HTTP API.
    Serve {
        /// JSON server config; shipped defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, env = "SPF_PORT")]
        port: Option<u16>,
        #[arg(long, env = "SPF_SEED")]
        seed: Option<u64>,
    },
    /// Run a scenario headless and print the trigger log as JSON lines.
    Run {
        #[arg(long)]
        ticks: u64,
        /// Scenario JSON; shipped mine with no policies when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Overrides the scenario's seed.
        #[arg(long, env = "SPF_SEED")]
        seed: Option<u64>,
    },
}

fn run(ticks: u64, scenario: Option<PathBuf>, seed: Option<u64>) -> anyhow::Result<()> {
    let scenario = match scenario {
        Some(path) => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            Scenario::from_json(&text)?
        }
        None => Scenario::default(),
    };
    let mut engine = scenario.build(seed)?;
    for _ in 0..ticks {
        for fault in engine.tick().faults {
            tracing::warn!(tick = fault.tick, policy = ?fault.policy, "{}", fault.message);
        }
    }
    print!("{}", engine.log_json_lines(0));
    Ok(())
}

fn serve(config: Option<PathBuf>, port: Option<u16>, seed: Option<u64>) -> anyhow::Result<()> {
    let mut config = match config {
        Some(path) => ApiConfig::load(&path)?,
        None => ApiConfig::default(),
    };
    if let Some(port) = port {
        config.port = port;
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    tokio::runtime::Runtime::new()?.block_on(api::serve(config))
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve { config, port, seed } => serve(config, port, seed),
        Command::Run { ticks, scenario, seed } => run(ticks, scenario, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
