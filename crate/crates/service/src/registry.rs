//! In-memory, content-addressed dataset registry with LRU eviction.
//!
//! Entries are handed out as `Arc`s. An entry whose `Arc` is held outside the
//! registry belongs to a request in flight and is never evicted.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::SystemTime;

use sisx_core::store::{Dataset, IngestReport};

#[derive(Debug)]
pub struct Entry {
    pub id: String,
    pub dataset: Dataset,
    /// Present for uploads; derived datasets carry their parent instead.
    pub report: Option<IngestReport>,
    pub parent: Option<String>,
    pub created: SystemTime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegistryError {
    /// A single dataset larger than the registry's row cap.
    TooLarge { rows: usize, max_rows: usize },
    /// Capacity is held by datasets that are all in use.
    Busy,
}

#[derive(Debug)]
struct Slot {
    entry: Arc<Entry>,
    last_used: u64,
}

#[derive(Debug, Default)]
struct Inner {
    slots: HashMap<String, Slot>,
    clock: u64,
    rows: usize,
}

#[derive(Debug)]
pub struct Registry {
    inner: Mutex<Inner>,
    max_datasets: usize,
    max_rows: usize,
}

impl Registry {
    pub fn new(max_datasets: usize, max_rows: usize) -> Self {
        Self { inner: Mutex::new(Inner::default()), max_datasets, max_rows }
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        // a panic elsewhere cannot leave the map half-updated
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// The dataset's content id: the digest of its canonical CSV.
    pub fn id_for(dataset: &Dataset) -> String {
        dataset.canonical_digest()
    }

    /// Registers `dataset`, returning the entry and whether it was new.
    /// Identical content maps to the existing entry.
    pub fn insert(
        &self,
        dataset: Dataset,
        report: Option<IngestReport>,
        parent: Option<String>,
    ) -> Result<(Arc<Entry>, bool), RegistryError> {
        let id = Self::id_for(&dataset);
        let rows = dataset.row_count();
        let mut inner = self.lock();
        inner.clock += 1;
        let now = inner.clock;
        if let Some(slot) = inner.slots.get_mut(&id) {
            slot.last_used = now;
            return Ok((Arc::clone(&slot.entry), false));
        }
        if rows > self.max_rows {
            return Err(RegistryError::TooLarge { rows, max_rows: self.max_rows });
        }
        while inner.slots.len() + 1 > self.max_datasets || inner.rows + rows > self.max_rows {
            let victim = inner
                .slots
                .iter()
                .filter(|(_, s)| Arc::strong_count(&s.entry) == 1)
                .min_by_key(|(_, s)| s.last_used)
                .map(|(k, _)| k.clone());
            let Some(victim) = victim else {
                return Err(RegistryError::Busy);
            };
            if let Some(slot) = inner.slots.remove(&victim) {
                inner.rows -= slot.entry.dataset.row_count();
                tracing::debug!(id = %victim, "evicted dataset");
            }
        }
        let entry = Arc::new(Entry { id: id.clone(), dataset, report, parent, created: SystemTime::now() });
        inner.rows += rows;
        inner.slots.insert(id, Slot { entry: Arc::clone(&entry), last_used: now });
        Ok((entry, true))
    }

    pub fn get(&self, id: &str) -> Option<Arc<Entry>> {
        let mut inner = self.lock();
        inner.clock += 1;
        let now = inner.clock;
        inner.slots.get_mut(id).map(|slot| {
            slot.last_used = now;
            Arc::clone(&slot.entry)
        })
    }

    pub fn len(&self) -> usize {
        self.lock().slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn total_rows(&self) -> usize {
        self.lock().rows
    }
}
