#![allow(dead_code)]

use std::path::Path;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use spectrum_client::SpectrumClient;
use spectrum_core::fixtures;
use spectrum_service::{bind, routes, Engine, ServiceConfig};
use tokio::sync::oneshot;
use tokio::task::JoinHandle;
use tower::ServiceExt;

pub fn config(dir: &Path) -> ServiceConfig {
    let mut config = ServiceConfig::new(fixtures::genesis(), dir);
    config.port = 0;
    config
}

pub fn router(dir: &Path) -> Router {
    routes::router(Engine::open(&config(dir)).unwrap(), None)
}

/// Sends one request through the router; returns the status and the JSON body.
pub async fn send(router: &Router, method: &str, path: &str, caller: Option<&str>, body: Option<&str>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(path);
    if let Some(caller) = caller {
        req = req.header("X-Caller-Address", caller);
    }
    let req = match body {
        Some(body) => req.header("content-type", "application/json").body(Body::from(body.to_owned())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = router.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

/// An in-process service on an ephemeral port.
pub struct Running {
    pub base: String,
    stop: oneshot::Sender<()>,
    task: JoinHandle<std::io::Result<()>>,
}

impl Running {
    pub async fn start(config: &ServiceConfig) -> Running {
        let (addr, server) = bind(config).await.unwrap();
        let (stop, stopped) = oneshot::channel::<()>();
        let task = tokio::spawn(server.run(async {
            let _ = stopped.await;
        }));
        Running { base: format!("http://{addr}"), stop, task }
    }

    pub fn client(&self) -> SpectrumClient {
        SpectrumClient::new(&self.base).unwrap()
    }

    pub fn client_as(&self, caller: spectrum_core::Address) -> SpectrumClient {
        self.client().with_caller(caller)
    }

    pub async fn stop(self) {
        let _ = self.stop.send(());
        self.task.await.unwrap().unwrap();
    }
}
