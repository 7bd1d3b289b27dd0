use std::sync::{Arc, RwLock};
use std::thread;

use spectrum_core::{Applied, Command, CommandError, Ledger};
use tokio::sync::{mpsc, oneshot};
use tracing::{error, info, warn};

use crate::store::{FileStore, Persistence};
use crate::{ServiceConfig, StartupError};

const QUEUE_DEPTH: usize = 1024;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Command(#[from] CommandError),
    #[error("journal append failed: {0}")]
    Persistence(String),
    #[error("ledger writer is not running")]
    Unavailable,
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::Command(e) => e.code(),
            EngineError::Persistence(_) => "PersistenceFailure",
            EngineError::Unavailable => "Unavailable",
        }
    }
}

struct Job {
    command: Command,
    reply: oneshot::Sender<Result<Applied, EngineError>>,
}

/// Handle to a running ledger. Cheap to clone.
///
/// Commands queue up in arrival order and are applied one at a time on a
/// dedicated thread: stage, append to the journal, then commit. A command is
/// visible to readers only after its events are durable.
#[derive(Clone)]
pub struct Engine {
    ledger: Arc<RwLock<Ledger>>,
    queue: mpsc::Sender<Job>,
}

impl Engine {
    pub fn open(config: &ServiceConfig) -> Result<Engine, StartupError> {
        let (store, ledger) = FileStore::open(&config.data_dir, &config.genesis)?;
        info!(
            data_dir = %config.data_dir.display(),
            last_seq = ledger.state().last_seq(),
            state_hash = %ledger.state_hash(),
            "ledger loaded"
        );
        Ok(Engine::start(ledger, store, config.snapshot_every))
    }

    /// Runs `ledger` with an arbitrary persistence backend.
    pub fn start(ledger: Ledger, store: impl Persistence, snapshot_every: u64) -> Engine {
        assert!(snapshot_every > 0, "snapshot interval must be positive");
        let ledger = Arc::new(RwLock::new(ledger));
        let (queue, jobs) = mpsc::channel(QUEUE_DEPTH);
        let writer = Writer {
            bucket: ledger.read().expect("ledger lock").state().last_seq() / snapshot_every,
            ledger: Arc::clone(&ledger),
            store,
            snapshot_every,
        };
        thread::Builder::new()
            .name("ledger-writer".into())
            .spawn(move || writer.run(jobs))
            .expect("spawn ledger writer");
        Engine { ledger, queue }
    }

    pub async fn submit(&self, command: Command) -> Result<Applied, EngineError> {
        let (reply, response) = oneshot::channel();
        self.queue
            .send(Job { command, reply })
            .await
            .map_err(|_| EngineError::Unavailable)?;
        response.await.map_err(|_| EngineError::Unavailable)?
    }

    /// Runs `f` against the latest committed ledger.
    pub fn read<R>(&self, f: impl FnOnce(&Ledger) -> R) -> R {
        f(&self.ledger.read().expect("ledger lock poisoned"))
    }
}

struct Writer<P> {
    ledger: Arc<RwLock<Ledger>>,
    store: P,
    snapshot_every: u64,
    /// `last_seq / snapshot_every` at the last snapshot attempt.
    bucket: u64,
}

impl<P: Persistence> Writer<P> {
    fn run(mut self, mut jobs: mpsc::Receiver<Job>) {
        while let Some(job) = jobs.blocking_recv() {
            let result = self.apply(&job.command);
            // The requester may have gone away; the command stands regardless.
            let _ = job.reply.send(result);
        }
    }

    fn apply(&mut self, command: &Command) -> Result<Applied, EngineError> {
        let staged = self.ledger.read().expect("ledger lock poisoned").stage(command)?;
        if let Err(e) = self.store.append(staged.records()) {
            error!(error = %e, "journal append failed, command dropped");
            return Err(EngineError::Persistence(e.to_string()));
        }
        let (applied, snapshot) = {
            let mut ledger = self.ledger.write().expect("ledger lock poisoned");
            let applied = ledger.commit(staged);
            let bucket = applied.last_seq / self.snapshot_every;
            let snapshot = (bucket > self.bucket).then(|| {
                self.bucket = bucket;
                ledger.snapshot()
            });
            (applied, snapshot)
        };
        if let Some(snapshot) = snapshot {
            // The journal already holds these events, so a failed snapshot
            // costs only replay time. The next bucket retries.
            match self.store.write_snapshot(&snapshot) {
                Ok(()) => info!(seq = snapshot.last_seq, "snapshot written"),
                Err(e) => warn!(seq = snapshot.last_seq, error = %e, "snapshot write failed"),
            }
        }
        Ok(applied)
    }
}
