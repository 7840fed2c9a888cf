//! The content library: `content/<id>.mid` files plus `content/manifest.json`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use improvise_core::curriculum::ContentId;
use improvise_core::engine::ContentSource;
use improvise_core::midi::{parse_smf, MidiFile, SmfError};
use improvise_core::protocol::ContentEntry;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum ContentError {
    #[error(transparent)]
    Smf(#[from] SmfError),
    #[error("content {0} not found")]
    NotFound(ContentId),
    #[error("content id {0} is already taken by different bytes")]
    DuplicateId(ContentId),
    #[error("invalid content id {0:?}: use letters, digits, '-' and '_'")]
    BadId(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Manifest { path: PathBuf, source: serde_json::Error },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ContentError + '_ {
    move |source| ContentError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<ContentEntry>,
}

/// Metadata supplied at ingestion.
#[derive(Debug, Clone, Default)]
pub struct IngestMeta {
    pub title: String,
    pub lesson_tags: Vec<u32>,
    /// Use this id instead of the content hash (lets lessons refer to content by name).
    pub id: Option<String>,
}

#[derive(Debug)]
pub struct ContentLibrary {
    dir: PathBuf,
    manifest: Manifest,
}

/// Derived from the file bytes, so re-ingesting a file yields the same id.
pub fn content_hash_id(bytes: &[u8]) -> ContentId {
    let digest = Sha256::digest(bytes);
    ContentId::new(hex::encode(&digest[..8]))
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

/// Writes via a temporary file in the same directory and a rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ContentError> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io(&tmp))?;
    f.write_all(bytes).map_err(io(&tmp))?;
    f.sync_all().map_err(io(&tmp))?;
    drop(f);
    fs::rename(&tmp, path).map_err(io(path))
}

impl ContentLibrary {
    /// Opens (creating if needed) the library rooted at `dir`.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, ContentError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io(&dir))?;
        let path = dir.join(MANIFEST);
        let manifest = match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text).map_err(|source| ContentError::Manifest { path, source })?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Manifest::default(),
            Err(e) => return Err(io(&path)(e)),
        };
        Ok(ContentLibrary { dir, manifest })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entries(&self) -> &[ContentEntry] {
        &self.manifest.entries
    }

    pub fn get(&self, id: &ContentId) -> Option<&ContentEntry> {
        self.manifest.entries.iter().find(|e| &e.id == id)
    }

    fn file_path(&self, entry: &ContentEntry) -> PathBuf {
        self.dir.join(&entry.path)
    }

    /// Stores `bytes` if they parse as a Standard MIDI File. Nothing on disk
    /// changes when parsing fails.
    pub fn ingest(&mut self, bytes: &[u8], meta: IngestMeta) -> Result<ContentEntry, ContentError> {
        let file = parse_smf(bytes)?;
        let id = match meta.id {
            Some(id) if valid_id(&id) => ContentId::new(id),
            Some(id) => return Err(ContentError::BadId(id)),
            None => content_hash_id(bytes),
        };
        if let Some(existing) = self.get(&id).cloned() {
            let stored = fs::read(self.file_path(&existing)).map_err(io(&self.file_path(&existing)))?;
            if stored == bytes {
                return Ok(existing);
            }
            return Err(ContentError::DuplicateId(id));
        }
        let entry = ContentEntry {
            path: format!("{id}.mid"),
            title: meta.title,
            lesson_tags: meta.lesson_tags,
            ppq: file.ppq,
            duration_ticks: file.duration_ticks(),
            id,
        };
        write_atomic(&self.file_path(&entry), bytes)?;
        let mut next = self.manifest.clone();
        next.entries.push(entry.clone());
        let json = serde_json::to_vec_pretty(&next).expect("manifest serializes");
        write_atomic(&self.dir.join(MANIFEST), &json)?;
        self.manifest = next;
        Ok(entry)
    }

    pub fn read_bytes(&self, id: &ContentId) -> Result<Vec<u8>, ContentError> {
        let entry = self.get(id).ok_or_else(|| ContentError::NotFound(id.clone()))?;
        let path = self.file_path(entry);
        fs::read(&path).map_err(io(&path))
    }

    pub fn load_file(&self, id: &ContentId) -> Result<MidiFile, ContentError> {
        Ok(parse_smf(&self.read_bytes(id)?)?)
    }
}

impl ContentSource for ContentLibrary {
    fn load(&self, id: &ContentId) -> Result<MidiFile, String> {
        self.load_file(id).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_validated() {
        assert!(valid_id("lesson03-accompaniment"));
        assert!(!valid_id("../escape"));
        assert!(!valid_id(""));
        assert_eq!(content_hash_id(b"abc").as_str().len(), 16);
        assert_eq!(content_hash_id(b"abc"), content_hash_id(b"abc"));
    }
}
