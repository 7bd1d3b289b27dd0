use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use spectrum_service::{bind, ServiceConfig};
use tracing_subscriber::EnvFilter;

/// Spectrum lease ledger service.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// JSON configuration file.
    #[arg(long, env = "SPECTRUM_LEDGER_CONFIG")]
    config: PathBuf,
    /// Overrides the configured port. 0 picks a free port.
    #[arg(long)]
    port: Option<u16>,
    /// Overrides the configured data directory.
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();

    let args = Args::parse();
    let mut config = match ServiceConfig::load(&args.config) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    if let Some(port) = args.port {
        config.port = port;
    }
    if let Some(dir) = args.data_dir {
        config.data_dir = dir;
    }

    let (addr, server) = match bind(&config).await {
        Ok(bound) => bound,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    // Scripts that start the service with --port 0 read the address from here.
    println!("listening on {addr}");

    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
        tracing::info!("shutting down");
    };
    if let Err(e) = server.run(shutdown).await {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
