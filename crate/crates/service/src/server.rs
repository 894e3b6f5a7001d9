//! Binding and running the HTTP server.

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::sync::Arc;

use thiserror::Error;
use tokio::net::TcpListener;

use crate::http::router;
use crate::service::TelemetryService;

#[derive(Debug, Error)]
pub enum StartError {
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: SocketAddr, source: io::Error },
}

impl StartError {
    pub fn code(&self) -> &'static str {
        match self {
            StartError::PortInUse(_) => "PORT_IN_USE",
            StartError::Bind { .. } => "BIND_FAILED",
        }
    }
}

pub async fn bind(addr: SocketAddr) -> Result<TcpListener, StartError> {
    TcpListener::bind(addr).await.map_err(|source| match source.kind() {
        io::ErrorKind::AddrInUse => StartError::PortInUse(addr.port()),
        _ => StartError::Bind { addr, source },
    })
}

/// Serves until `shutdown` resolves.
pub async fn run(
    listener: TcpListener,
    service: Arc<TelemetryService>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    axum::serve(listener, router(service))
        .with_graceful_shutdown(shutdown)
        .await
}
