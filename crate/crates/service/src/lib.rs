//! HTTP/JSON front end for the spectrum lease ledger.
//!
//! Mutating requests are funneled through a single writer thread
//! ([`engine::Engine`]) that persists each command's events before the
//! response is sent. Reads go straight to the latest committed state.

use std::io;
use std::net::SocketAddr;

use spectrum_core::ReplayError;
use tokio::net::TcpListener;

pub mod config;
pub mod engine;
pub mod routes;
pub mod store;

pub use config::ServiceConfig;
pub use engine::{Engine, EngineError};

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("{code}: {0}", code = .0.code())]
    Replay(#[from] ReplayError),
}

/// Opens the data directory, rebuilds the ledger and binds the listener.
/// The service runs once the returned future is polled.
pub async fn bind(config: &ServiceConfig) -> Result<(SocketAddr, Server), StartupError> {
    config.validate()?;
    let engine = Engine::open(config)?;
    let listener = TcpListener::bind((config.bind, config.port)).await?;
    let addr = listener.local_addr()?;
    let router = routes::router(engine, config.ui_dir.as_deref());
    Ok((addr, Server { listener, router }))
}

pub struct Server {
    listener: TcpListener,
    router: axum::Router,
}

impl Server {
    pub async fn run(self, shutdown: impl std::future::Future<Output = ()> + Send + 'static) -> io::Result<()> {
        axum::serve(self.listener, self.router).with_graceful_shutdown(shutdown).await
    }
}
