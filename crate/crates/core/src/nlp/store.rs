//! `EMB1` binary embedding files with a `.ids` sidecar.
//!
//! Layout: magic `EMB1`, little-endian `u32` dim, `u64` count, then `count`
//! rows of `dim` little-endian `f32`. The sidecar (same path with `.ids`
//! appended) holds one message id per line, row-aligned.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::NlpError;

const MAGIC: &[u8; 4] = b"EMB1";
const HEADER_LEN: usize = 4 + 4 + 8;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    ids: Vec<String>,
    vectors: Vec<f32>,
    index: HashMap<String, usize>,
}

impl EmbeddingStore {
    pub fn new(dim: usize, ids: Vec<String>, vectors: Vec<f32>) -> Result<Self, NlpError> {
        if dim == 0 {
            return Err(NlpError::BadHeader("dimension must be positive".into()));
        }
        if vectors.len() != ids.len() * dim {
            return Err(NlpError::IdCountMismatch { rows: vectors.len() / dim, ids: ids.len() });
        }
        if let Some(pos) = vectors.iter().position(|x| !x.is_finite()) {
            return Err(NlpError::NonFinite { row: pos / dim });
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(NlpError::DuplicateId(id.clone()));
            }
        }
        Ok(Self { dim, ids, vectors, index })
    }

    /// Decode the binary payload and validate it against the sidecar ids.
    pub fn from_bytes(bytes: &[u8], ids: Vec<String>) -> Result<Self, NlpError> {
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(NlpError::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(NlpError::Truncated { expected: HEADER_LEN as u64, found: bytes.len() as u64 });
        }
        let dim = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
        let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
        if dim == 0 {
            return Err(NlpError::BadHeader("dimension must be positive".into()));
        }
        let payload = &bytes[HEADER_LEN..];
        let expected = count
            .checked_mul(dim as u64)
            .and_then(|x| x.checked_mul(4))
            .ok_or_else(|| NlpError::BadHeader("row count overflows".into()))?;
        let found = payload.len() as u64;
        if found < expected {
            return Err(NlpError::Truncated { expected, found });
        }
        if found > expected {
            return Err(NlpError::TrailingBytes(found - expected));
        }
        let count = count as usize;
        if ids.len() != count {
            return Err(NlpError::IdCountMismatch { rows: count, ids: ids.len() });
        }
        let vectors: Vec<f32> =
            payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
        Self::new(dim, ids, vectors)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.vectors.len() * 4);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.ids.len() as u64).to_le_bytes());
        for x in &self.vectors {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, id: &str) -> Option<&[f32]> {
        self.index.get(id).map(|&r| self.row_at(r))
    }

    pub fn row_at(&self, r: usize) -> &[f32] {
        &self.vectors[r * self.dim..(r + 1) * self.dim]
    }
}

pub fn ids_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".ids");
    PathBuf::from(s)
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingStore, NlpError> {
    let bytes = fs::read(path)?;
    let ids = fs::read_to_string(ids_path(path))?.lines().filter(|l| !l.is_empty()).map(str::to_string).collect();
    EmbeddingStore::from_bytes(&bytes, ids)
}

/// Write the binary file and its sidecar atomically.
pub fn write_embeddings(path: &Path, store: &EmbeddingStore) -> Result<(), NlpError> {
    crate::io::write_atomic(path, &store.to_bytes())?;
    let mut ids = store.ids.join("\n");
    if !ids.is_empty() {
        ids.push('\n');
    }
    crate::io::write_atomic(&ids_path(path), ids.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EmbeddingStore {
        EmbeddingStore::new(4, vec!["m1".into(), "m2".into()], vec![1.0, 2.0, 3.0, 4.0, -0.5, 0.0, 1e-8, 7.25]).unwrap()
    }

    #[test]
    fn header_layout() {
        let b = sample().to_bytes();
        assert_eq!(&b[..4], b"EMB1");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 4);
        assert_eq!(u64::from_le_bytes(b[8..16].try_into().unwrap()), 2);
        assert_eq!(b.len(), 16 + 2 * 4 * 4);
    }

    #[test]
    fn file_round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.bin");
        let s = sample();
        write_embeddings(&path, &s).unwrap();
        let back = load_embeddings(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back, s);
        assert_eq!(fs::read(&path).unwrap(), s.to_bytes());
        assert_eq!(fs::read_to_string(ids_path(&path)).unwrap(), "m1\nm2\n");
    }

    #[test]
    fn distinct_errors() {
        let good = sample().to_bytes();
        let ids = || vec!["m1".to_string(), "m2".to_string()];

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(EmbeddingStore::from_bytes(&bad_magic, ids()), Err(NlpError::BadMagic)));

        let short = &good[..good.len() - 3];
        assert!(matches!(EmbeddingStore::from_bytes(short, ids()), Err(NlpError::Truncated { .. })));

        let dup = vec!["m1".to_string(), "m1".to_string()];
        assert!(matches!(EmbeddingStore::from_bytes(&good, dup), Err(NlpError::DuplicateId(_))));

        let mut nan = good.clone();
        nan[16 + 4 * 5..16 + 4 * 6].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(EmbeddingStore::from_bytes(&nan, ids()), Err(NlpError::NonFinite { row: 1 })));

        let mut long = good.clone();
        long.push(0);
        assert!(matches!(EmbeddingStore::from_bytes(&long, ids()), Err(NlpError::TrailingBytes(1))));

        assert!(matches!(EmbeddingStore::from_bytes(&good, vec!["m1".into()]), Err(NlpError::IdCountMismatch { .. })));
    }
}
