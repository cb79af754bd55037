//! Columnar dataset cache.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic      8 bytes  "EVOFSDS\0"
//! version    u32      1
//! n_rows     u64
//! n_features u64
//! n_classes  u64
//! names      n_features x (u32 length, UTF-8 bytes)
//! classes    n_classes  x (u32 length, UTF-8 bytes)
//! labels     n_rows x u32
//! columns    n_features x n_rows x f64   (column-major)
//! provenance u64 length, JSON bytes
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Dataset, Provenance};
use crate::error::{Error, Result};

pub const CACHE_MAGIC: &[u8; 8] = b"EVOFSDS\0";
pub const CACHE_VERSION: u32 = 1;

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

pub fn encode(ds: &Dataset) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(64 + ds.values().len() * 8 + ds.n_rows() * 4);
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&(ds.n_rows() as u64).to_le_bytes());
    out.extend_from_slice(&(ds.n_features() as u64).to_le_bytes());
    out.extend_from_slice(&(ds.n_classes() as u64).to_le_bytes());
    for n in ds.feature_names() {
        put_str(&mut out, n);
    }
    for n in ds.class_names() {
        put_str(&mut out, n);
    }
    for &l in ds.labels() {
        out.extend_from_slice(&(l as u32).to_le_bytes());
    }
    for j in 0..ds.n_features() {
        for i in 0..ds.n_rows() {
            out.extend_from_slice(&ds.value(i, j).to_le_bytes());
        }
    }
    let prov = serde_json::to_vec(&ds.provenance)?;
    out.extend_from_slice(&(prov.len() as u64).to_le_bytes());
    out.extend_from_slice(&prov);
    Ok(out)
}

struct Cursor<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .at
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Data("dataset cache is truncated".into()))?;
        let s = &self.buf[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Data("dataset cache holds invalid UTF-8".into()))
    }
}

pub fn decode(buf: &[u8]) -> Result<Dataset> {
    let mut c = Cursor { buf, at: 0 };
    if c.take(8)? != CACHE_MAGIC {
        return Err(Error::Data("not a dataset cache file".into()));
    }
    let version = c.u32()?;
    if version != CACHE_VERSION {
        return Err(Error::Data(format!("unsupported dataset cache version {version}")));
    }
    let n_rows = c.u64()? as usize;
    let n_features = c.u64()? as usize;
    let n_classes = c.u64()? as usize;
    let names = (0..n_features).map(|_| c.string()).collect::<Result<Vec<_>>>()?;
    let classes = (0..n_classes).map(|_| c.string()).collect::<Result<Vec<_>>>()?;
    let labels = (0..n_rows)
        .map(|_| c.u32().map(|l| l as usize))
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![0.0; n_rows * n_features];
    for j in 0..n_features {
        for i in 0..n_rows {
            values[i * n_features + j] = c.f64()?;
        }
    }
    let plen = c.u64()? as usize;
    let provenance: Provenance = serde_json::from_slice(c.take(plen)?)?;
    let mut ds = Dataset::new(values, labels, names, classes)?;
    ds.provenance = provenance;
    Ok(ds)
}

pub fn write_cache(ds: &Dataset, path: &Path) -> Result<()> {
    let bytes = encode(ds)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_cache(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut buf = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut buf)
        .map_err(|e| Error::io(path, e))?;
    decode(&buf)
}
