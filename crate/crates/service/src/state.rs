//! Registry ownership for the server. One writer thread applies mutations in
//! arrival order and writes each result through to the store before
//! publishing it; readers clone the latest published snapshot.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use deanery_core::store::save_registry;
use deanery_core::{Error, Registry, Result};
use tokio::sync::{mpsc, oneshot, watch};

type Job = Box<dyn FnOnce(&mut Writer) + Send>;

struct Writer {
    root: PathBuf,
    current: Arc<Registry>,
    publish: watch::Sender<Arc<Registry>>,
}

impl Writer {
    fn commit<T>(
        &mut self,
        f: impl FnOnce(&Registry, &Path) -> Result<(Registry, T)>,
    ) -> Result<T> {
        let (next, out) = f(&self.current, &self.root)?;
        save_registry(&next, &self.root)?;
        self.current = Arc::new(next);
        self.publish.send_replace(self.current.clone());
        Ok(out)
    }
}

#[derive(Clone)]
pub struct Shared {
    root: Arc<PathBuf>,
    snapshot: watch::Receiver<Arc<Registry>>,
    jobs: mpsc::Sender<Job>,
}

impl Shared {
    /// Starts the writer thread. It stops once every handle is dropped.
    pub fn start(root: PathBuf, registry: Registry) -> Self {
        let current = Arc::new(registry);
        let (publish, snapshot) = watch::channel(current.clone());
        let (jobs, mut rx) = mpsc::channel::<Job>(64);
        let mut writer = Writer {
            root: root.clone(),
            current,
            publish,
        };
        std::thread::Builder::new()
            .name("registry-writer".into())
            .spawn(move || {
                while let Some(job) = rx.blocking_recv() {
                    job(&mut writer);
                }
            })
            .expect("spawn writer thread");
        Self {
            root: Arc::new(root),
            snapshot,
            jobs,
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn snapshot(&self) -> Arc<Registry> {
        self.snapshot.borrow().clone()
    }

    /// Queues `f` behind earlier mutations. `f` sees the latest state and the
    /// data root; its registry is saved and published only if it succeeds.
    pub async fn mutate<T, F>(&self, f: F) -> Result<T>
    where
        T: Send + 'static,
        F: FnOnce(&Registry, &Path) -> Result<(Registry, T)> + Send + 'static,
    {
        let (tx, rx) = oneshot::channel();
        let job: Job = Box::new(move |w: &mut Writer| {
            let _ = tx.send(w.commit(f));
        });
        let gone = || Error::Invalid("registry writer has stopped".into());
        self.jobs.send(job).await.map_err(|_| gone())?;
        rx.await.map_err(|_| gone())?
    }
}
