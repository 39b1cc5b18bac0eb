//! Record persistence.
//!
//! Two backends behind one trait: an in-memory map for tests and services
//! with no durability needs, and an append-only on-disk log whose offset
//! index is rebuilt on open. Records are fixed-width (1056 bytes), so the log
//! needs no framing.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;

use parking_lot::Mutex;

use jager_core::hop::HOP_LEN;
use jager_core::record::{Index, INDEX_LEN};
use jager_crypto::groupsig::{GroupSignature, SIGNATURE_LEN};
use jager_crypto::wes::{WesCiphertext, CIPHERTEXT_LEN};

/// Fixed width of one stored record on disk.
pub const RECORD_LEN: usize = INDEX_LEN + CIPHERTEXT_LEN + HOP_LEN + SIGNATURE_LEN + 8;

/// One accepted record.
#[derive(Clone, Debug)]
pub struct StoredRecord {
    pub idx: Index,
    pub ct1: WesCiphertext,
    pub ct2: [u8; HOP_LEN],
    pub gsig: GroupSignature,
    /// Milliseconds since the Unix epoch at acceptance.
    pub received_at: u64,
}

impl StoredRecord {
    pub fn to_bytes(&self) -> [u8; RECORD_LEN] {
        let mut out = [0u8; RECORD_LEN];
        let mut pos = 0;
        for part in [
            &self.idx.as_bytes()[..],
            &self.ct1.to_bytes()[..],
            &self.ct2[..],
            &self.gsig.to_bytes()[..],
            &self.received_at.to_be_bytes()[..],
        ] {
            out[pos..pos + part.len()].copy_from_slice(part);
            pos += part.len();
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> std::io::Result<StoredRecord> {
        let bad = |what: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, what.to_string());
        if bytes.len() != RECORD_LEN {
            return Err(bad("record length"));
        }
        let mut pos = 0;
        let idx = Index::from_bytes(&bytes[..INDEX_LEN]).map_err(|_| bad("idx"))?;
        pos += INDEX_LEN;
        let ct1 = WesCiphertext::from_bytes(&bytes[pos..pos + CIPHERTEXT_LEN])
            .map_err(|_| bad("ct1"))?;
        pos += CIPHERTEXT_LEN;
        let mut ct2 = [0u8; HOP_LEN];
        ct2.copy_from_slice(&bytes[pos..pos + HOP_LEN]);
        pos += HOP_LEN;
        let gsig = GroupSignature::from_bytes(&bytes[pos..pos + SIGNATURE_LEN])
            .map_err(|_| bad("gsig"))?;
        pos += SIGNATURE_LEN;
        let received_at = u64::from_be_bytes(bytes[pos..].try_into().unwrap());
        Ok(StoredRecord { idx, ct1, ct2, gsig, received_at })
    }
}

/// Append-oriented record storage keyed by index. All appends are atomic;
/// retrievals observe every acknowledged append.
pub trait Storage: Send + Sync {
    fn append(&self, record: StoredRecord) -> std::io::Result<()>;
    fn get(&self, idx: &Index) -> std::io::Result<Vec<StoredRecord>>;
    fn len(&self) -> usize;
    /// Visit every stored record (test and audit hook).
    fn for_each(&self, f: &mut dyn FnMut(&StoredRecord)) -> std::io::Result<()>;
}

/// Heap-backed storage.
#[derive(Default)]
pub struct MemStorage {
    inner: Mutex<MemInner>,
}

#[derive(Default)]
struct MemInner {
    by_idx: HashMap<Index, Vec<StoredRecord>>,
    count: usize,
}

impl MemStorage {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Storage for MemStorage {
    fn append(&self, record: StoredRecord) -> std::io::Result<()> {
        let mut inner = self.inner.lock();
        inner.by_idx.entry(record.idx).or_default().push(record);
        inner.count += 1;
        Ok(())
    }

    fn get(&self, idx: &Index) -> std::io::Result<Vec<StoredRecord>> {
        Ok(self.inner.lock().by_idx.get(idx).cloned().unwrap_or_default())
    }

    fn len(&self) -> usize {
        self.inner.lock().count
    }

    fn for_each(&self, f: &mut dyn FnMut(&StoredRecord)) -> std::io::Result<()> {
        let inner = self.inner.lock();
        for records in inner.by_idx.values() {
            for r in records {
                f(r);
            }
        }
        Ok(())
    }
}

/// Append-only log file plus an in-memory offset index.
pub struct DiskLogStorage {
    inner: Mutex<DiskInner>,
}

struct DiskInner {
    file: File,
    offsets: HashMap<Index, Vec<u64>>,
    count: usize,
    end: u64,
}

impl DiskLogStorage {
    /// Open or create the log at `path`, scanning existing records to rebuild
    /// the index.
    pub fn open(path: &Path) -> std::io::Result<DiskLogStorage> {
        let mut file = OpenOptions::new().read(true).write(true).create(true).open(path)?;
        let mut offsets: HashMap<Index, Vec<u64>> = HashMap::new();
        let mut count = 0usize;
        let len = file.seek(SeekFrom::End(0))?;
        if len % RECORD_LEN as u64 != 0 {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "log length is not a whole number of records",
            ));
        }
        file.seek(SeekFrom::Start(0))?;
        let mut buf = [0u8; RECORD_LEN];
        let mut pos = 0u64;
        while pos < len {
            file.read_exact(&mut buf)?;
            let idx = Index::from_bytes(&buf[..INDEX_LEN])
                .map_err(|_| std::io::Error::new(std::io::ErrorKind::InvalidData, "bad idx"))?;
            offsets.entry(idx).or_default().push(pos);
            pos += RECORD_LEN as u64;
            count += 1;
        }
        Ok(DiskLogStorage { inner: Mutex::new(DiskInner { file, offsets, count, end: len }) })
    }
}

impl Storage for DiskLogStorage {
    fn append(&self, record: StoredRecord) -> std::io::Result<()> {
        let mut inner = self.inner.lock();
        let offset = inner.end;
        inner.file.seek(SeekFrom::Start(offset))?;
        inner.file.write_all(&record.to_bytes())?;
        inner.offsets.entry(record.idx).or_default().push(offset);
        inner.end = offset + RECORD_LEN as u64;
        inner.count += 1;
        Ok(())
    }

    fn get(&self, idx: &Index) -> std::io::Result<Vec<StoredRecord>> {
        let mut inner = self.inner.lock();
        let offsets = match inner.offsets.get(idx) {
            Some(o) => o.clone(),
            None => return Ok(Vec::new()),
        };
        let mut out = Vec::with_capacity(offsets.len());
        let mut buf = [0u8; RECORD_LEN];
        for off in offsets {
            inner.file.seek(SeekFrom::Start(off))?;
            inner.file.read_exact(&mut buf)?;
            out.push(StoredRecord::from_bytes(&buf)?);
        }
        Ok(out)
    }

    fn len(&self) -> usize {
        self.inner.lock().count
    }

    fn for_each(&self, f: &mut dyn FnMut(&StoredRecord)) -> std::io::Result<()> {
        let mut inner = self.inner.lock();
        let end = inner.end;
        inner.file.seek(SeekFrom::Start(0))?;
        let mut buf = [0u8; RECORD_LEN];
        let mut pos = 0u64;
        while pos < end {
            inner.file.read_exact(&mut buf)?;
            f(&StoredRecord::from_bytes(&buf)?);
            pos += RECORD_LEN as u64;
        }
        Ok(())
    }
}
