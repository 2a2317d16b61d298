use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

/// Hex digits of the content hash used as the session id.
pub const ID_LEN: usize = 16;

/// Session files on disk, named by a prefix of their SHA-256.
#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

pub fn session_id(body: &[u8]) -> String {
    let digest = hex::encode(Sha256::digest(body));
    digest[..ID_LEN].to_string()
}

fn well_formed(id: &str) -> bool {
    id.len() == ID_LEN && id.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(SessionStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    /// Stores `body` and returns its id. Writes go to a temporary file in
    /// the same directory and are renamed into place.
    pub fn put(&self, body: &[u8]) -> io::Result<String> {
        let id = session_id(body);
        let target = self.path(&id);
        if target.exists() {
            return Ok(id);
        }
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(body)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&target).map_err(|e| e.error)?;
        Ok(id)
    }

    /// Raw bytes of a stored session; `None` for unknown or malformed ids.
    pub fn get(&self, id: &str) -> io::Result<Option<Vec<u8>>> {
        if !well_formed(id) {
            return Ok(None);
        }
        match fs::read(self.path(id)) {
            Ok(bytes) => Ok(Some(bytes)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_get_and_ids() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path().join("sessions")).unwrap();
        let id = store.put(b"{}").unwrap();
        assert_eq!(id.len(), ID_LEN);
        assert_eq!(store.put(b"{}").unwrap(), id);
        assert_eq!(store.get(&id).unwrap().unwrap(), b"{}");
        assert_eq!(store.get("0123456789abcdef").unwrap(), None);
        assert_eq!(store.get("../../etc/passwd").unwrap(), None);
        assert_eq!(store.get(&id.to_uppercase()).unwrap(), None);
        let names: Vec<_> = fs::read_dir(store.dir()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1, "no temporary files left behind");
    }
}
