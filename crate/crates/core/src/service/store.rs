//! File-backed patient store: one JSON document per patient plus an index,
//! every file replaced by write-temp-then-rename.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use tokio::sync::Mutex;
use uuid::Uuid;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("patient `{0}` not found")]
    NotFound(String),
    #[error("store io: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt store file {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

/// A stored patient. `record` keeps the submitted document byte for byte.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StoredPatient {
    pub id: String,
    pub record: Box<RawValue>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IndexEntry {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

pub struct Store {
    dir: PathBuf,
    /// Serializes writers; readers never take it because files are only
    /// ever replaced whole.
    write_lock: Mutex<()>,
}

const INDEX: &str = "index.json";

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().expect("store files live in a directory");
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Ids are uuids; anything else cannot name a stored patient (and cannot
/// escape the store directory).
fn parse_id(id: &str) -> Option<Uuid> {
    Uuid::parse_str(id).ok()
}

impl Store {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Store, StoreError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Store { dir, write_lock: Mutex::new(()) })
    }

    fn patient_path(&self, id: &Uuid) -> PathBuf {
        self.dir.join(format!("{}.json", id.hyphenated()))
    }

    fn read_index(&self) -> Result<BTreeMap<String, IndexEntry>, StoreError> {
        let path = self.dir.join(INDEX);
        match std::fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| StoreError::Corrupt { path, message: e.to_string() }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(BTreeMap::new()),
            Err(e) => Err(e.into()),
        }
    }

    fn write_index(&self, index: &BTreeMap<String, IndexEntry>) -> Result<(), StoreError> {
        let bytes = serde_json::to_vec_pretty(index).expect("index serializes");
        Ok(write_atomic(&self.dir.join(INDEX), &bytes)?)
    }

    pub fn list(&self) -> Result<Vec<IndexEntry>, StoreError> {
        Ok(self.read_index()?.into_values().collect())
    }

    pub fn get(&self, id: &str) -> Result<StoredPatient, StoreError> {
        let uuid = parse_id(id).ok_or_else(|| StoreError::NotFound(id.to_string()))?;
        let path = self.patient_path(&uuid);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.to_string())),
            Err(e) => return Err(e.into()),
        };
        serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt { path, message: e.to_string() })
    }

    fn put(&self, p: &StoredPatient) -> Result<(), StoreError> {
        let uuid = parse_id(&p.id).expect("store assigns uuid ids");
        let bytes = serde_json::to_vec(p).expect("patient serializes");
        write_atomic(&self.patient_path(&uuid), &bytes)?;
        let mut index = self.read_index()?;
        index.insert(
            p.id.clone(),
            IndexEntry { id: p.id.clone(), created_at: p.created_at, updated_at: p.updated_at },
        );
        self.write_index(&index)
    }

    /// Stores a new patient document (already validated by the caller).
    pub async fn create(&self, record: Box<RawValue>) -> Result<StoredPatient, StoreError> {
        let _guard = self.write_lock.lock().await;
        let now = Utc::now();
        let p = StoredPatient { id: Uuid::new_v4().hyphenated().to_string(), record, created_at: now, updated_at: now };
        self.put(&p)?;
        Ok(p)
    }

    pub async fn update(&self, id: &str, record: Box<RawValue>) -> Result<StoredPatient, StoreError> {
        let _guard = self.write_lock.lock().await;
        let old = self.get(id)?;
        let p = StoredPatient { record, updated_at: Utc::now().max(old.updated_at), ..old };
        self.put(&p)?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(s: &str) -> Box<RawValue> {
        RawValue::from_string(s.to_string()).unwrap()
    }

    #[tokio::test]
    async fn create_get_update() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let p = store.create(raw(r#"{"age": 78}"#)).await.unwrap();
        assert_eq!(store.get(&p.id).unwrap().record.get(), r#"{"age": 78}"#);
        let q = store.update(&p.id, raw(r#"{"age": 79}"#)).await.unwrap();
        assert_eq!(q.created_at, p.created_at);
        assert!(q.updated_at >= p.updated_at);
        assert_eq!(store.list().unwrap().len(), 1);
        // a fresh handle sees the same data
        let again = Store::open(dir.path()).unwrap();
        assert_eq!(again.get(&p.id).unwrap().record.get(), r#"{"age": 79}"#);
    }

    #[tokio::test]
    async fn bad_ids_are_not_found() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        assert!(matches!(store.get("../index"), Err(StoreError::NotFound(_))));
        assert!(matches!(store.update("nope", raw("{}")).await, Err(StoreError::NotFound(_))));
    }
}
