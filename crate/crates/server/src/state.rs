use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use missq_core::{Analysis, GroundTruthManifest, IncompleteDataset};
use serde::Serialize;
use tokio::sync::watch;

use crate::error::ApiError;

#[derive(Debug, Clone)]
pub enum ComputeStatus {
    Pending,
    Ready(Arc<Analysis>),
    Failed(String),
}

impl ComputeStatus {
    pub fn label(&self) -> StatusLabel {
        match self {
            ComputeStatus::Pending => StatusLabel::Pending,
            ComputeStatus::Ready(_) => StatusLabel::Ready,
            ComputeStatus::Failed(_) => StatusLabel::Failed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StatusLabel {
    Pending,
    Ready,
    Failed,
}

/// One immutable version of a registered dataset. A reload replaces the
/// whole entry, so a computation still running for an older version can
/// never publish into the new one.
#[derive(Debug)]
pub struct DatasetEntry {
    pub id: String,
    pub version: u64,
    pub dataset: Arc<IncompleteDataset>,
    pub manifest: Option<GroundTruthManifest>,
    status: watch::Sender<ComputeStatus>,
}

impl DatasetEntry {
    pub fn status(&self) -> ComputeStatus {
        self.status.borrow().clone()
    }

    /// Resolves once the analysis is no longer pending.
    pub async fn wait(&self) -> ComputeStatus {
        let mut rx = self.status.subscribe();
        let status = rx
            .wait_for(|s| !matches!(s, ComputeStatus::Pending))
            .await
            .map(|s| s.clone());
        status.unwrap_or_else(|_| self.status())
    }
}

#[derive(Debug, Default)]
pub struct AppState {
    datasets: RwLock<BTreeMap<String, Arc<DatasetEntry>>>,
    next_id: AtomicU64,
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: &str) -> Result<Arc<DatasetEntry>, ApiError> {
        self.datasets
            .read()
            .expect("dataset registry poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::UnknownDataset(id.to_string()))
    }

    pub fn list(&self) -> Vec<Arc<DatasetEntry>> {
        self.datasets
            .read()
            .expect("dataset registry poisoned")
            .values()
            .cloned()
            .collect()
    }

    pub fn remove(&self, id: &str) -> Result<(), ApiError> {
        self.datasets
            .write()
            .expect("dataset registry poisoned")
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| ApiError::UnknownDataset(id.to_string()))
    }

    fn fresh_id(&self) -> String {
        format!("ds{}", self.next_id.fetch_add(1, Ordering::Relaxed) + 1)
    }

    /// Registers a new dataset under `id` (or a fresh one) and starts its
    /// analysis in the background.
    pub fn insert(
        &self,
        id: Option<String>,
        dataset: IncompleteDataset,
        manifest: Option<GroundTruthManifest>,
    ) -> Result<Arc<DatasetEntry>, ApiError> {
        let mut map = self.datasets.write().expect("dataset registry poisoned");
        let id = match id {
            Some(id) => {
                validate_id(&id)?;
                if map.contains_key(&id) {
                    return Err(ApiError::DatasetExists(id));
                }
                id
            }
            None => loop {
                let id = self.fresh_id();
                if !map.contains_key(&id) {
                    break id;
                }
            },
        };
        let entry = spawn_entry(id.clone(), 1, dataset, manifest);
        map.insert(id, entry.clone());
        Ok(entry)
    }

    /// Replaces the dataset behind `id` with a new version; cached results
    /// of the old version are dropped with it.
    pub fn reload(&self, id: &str, dataset: IncompleteDataset) -> Result<Arc<DatasetEntry>, ApiError> {
        let mut map = self.datasets.write().expect("dataset registry poisoned");
        let old = map.get(id).ok_or_else(|| ApiError::UnknownDataset(id.to_string()))?;
        let entry = spawn_entry(id.to_string(), old.version + 1, dataset, None);
        map.insert(id.to_string(), entry.clone());
        Ok(entry)
    }
}

fn validate_id(id: &str) -> Result<(), ApiError> {
    let ok = !id.is_empty()
        && id.len() <= 64
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(ApiError::BadRequest(format!(
            "dataset id `{id}` must be 1-64 characters of [A-Za-z0-9_.-]"
        )))
    }
}

fn spawn_entry(
    id: String,
    version: u64,
    dataset: IncompleteDataset,
    manifest: Option<GroundTruthManifest>,
) -> Arc<DatasetEntry> {
    let (tx, _) = watch::channel(ComputeStatus::Pending);
    let entry = Arc::new(DatasetEntry {
        id,
        version,
        dataset: Arc::new(dataset),
        manifest,
        status: tx,
    });
    let worker = entry.clone();
    tokio::task::spawn_blocking(move || {
        let status = match Analysis::compute(&worker.dataset) {
            Ok(a) => ComputeStatus::Ready(Arc::new(a)),
            Err(e) => ComputeStatus::Failed(e.to_string()),
        };
        worker.status.send_replace(status);
    });
    entry
}
