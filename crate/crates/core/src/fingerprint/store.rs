//! Binary fingerprint store, little-endian:
//! `"MFP1"`, u32 n_bits, u32 radius, u64 count, then per record
//! u32 id length, id bytes, n_bits/8 packed bytes.

use super::{Fingerprint, FingerprintError};
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"MFP1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FingerprintStore {
    pub n_bits: usize,
    pub radius: u32,
    pub records: Vec<(String, Fingerprint)>,
}

impl FingerprintStore {
    pub fn new(n_bits: usize, radius: u32) -> Self {
        FingerprintStore { n_bits, radius, records: Vec::new() }
    }

    pub fn push(&mut self, id: String, fp: Fingerprint) -> Result<(), FingerprintError> {
        if fp.n_bits() != self.n_bits {
            return Err(FingerprintError::WidthMismatch(self.n_bits, fp.n_bits()));
        }
        self.records.push((id, fp));
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), FingerprintError> {
        if self.n_bits == 0 || self.n_bits % 8 != 0 {
            return Err(FingerprintError::BadWidth(self.n_bits));
        }
        w.write_all(MAGIC)?;
        w.write_all(&(self.n_bits as u32).to_le_bytes())?;
        w.write_all(&self.radius.to_le_bytes())?;
        w.write_all(&(self.records.len() as u64).to_le_bytes())?;
        for (id, fp) in &self.records {
            w.write_all(&(id.len() as u32).to_le_bytes())?;
            w.write_all(id.as_bytes())?;
            w.write_all(&fp.to_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, FingerprintError> {
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(FingerprintError::Format("bad magic".into()));
        }
        let n_bits = read_u32(&mut r)? as usize;
        let radius = read_u32(&mut r)?;
        let count = read_u64(&mut r)?;
        if n_bits == 0 || n_bits % 8 != 0 {
            return Err(FingerprintError::BadWidth(n_bits));
        }
        let mut store = FingerprintStore::new(n_bits, radius);
        let mut packed = vec![0u8; n_bits / 8];
        for _ in 0..count {
            let len = read_u32(&mut r)? as usize;
            let mut id = vec![0u8; len];
            read_exact(&mut r, &mut id)?;
            let id = String::from_utf8(id).map_err(|_| FingerprintError::Format("id is not UTF-8".into()))?;
            read_exact(&mut r, &mut packed)?;
            store.records.push((id, Fingerprint::from_bytes(n_bits, radius, &packed)?));
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(FingerprintError::Format("trailing bytes".into()));
        }
        Ok(store)
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<(), FingerprintError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => FingerprintError::Format("truncated file".into()),
        _ => FingerprintError::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, FingerprintError> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, FingerprintError> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}
