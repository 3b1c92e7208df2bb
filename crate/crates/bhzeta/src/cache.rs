//! On-disk cache of `Gamma_p` tables.
//!
//! Layout, little endian:
//! `"BHZC" | version u32 | p u64 | N u32 | k_max u64 | count u64 | count x (precision u32, len u32, residue bytes) | sha256`
//! where the checksum covers every preceding byte.

use crate::error::{Error, Result};
use bhzeta_core::padic::{required_k_max, GammaTable, PadicNumber};
use num_bigint::BigUint;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const MAGIC: &[u8; 4] = b"BHZC";
pub const VERSION: u32 = 1;
pub const ENV_DIR: &str = "BHZETA_CACHE_DIR";

pub fn file_name(p: u64, n: u32) -> String {
    format!("gamma-p{p}-n{n}.bhzc")
}

pub fn encode(t: &GammaTable) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&t.prime.to_le_bytes());
    out.extend_from_slice(&t.precision.to_le_bytes());
    out.extend_from_slice(&required_k_max(t.prime, t.precision).to_le_bytes());
    out.extend_from_slice(&(t.values.len() as u64).to_le_bytes());
    for v in &t.values {
        let bytes = v.residue.to_bytes_le();
        out.extend_from_slice(&v.precision.to_le_bytes());
        out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
        out.extend_from_slice(&bytes);
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Option<&'a [u8]> {
        let s = self.buf.get(self.at..self.at + k)?;
        self.at += k;
        Some(s)
    }
    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }
    fn u64(&mut self) -> Option<u64> {
        Some(u64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
}

/// Checks magic, version, checksum and the `(p, N)` header.
pub fn decode(bytes: &[u8], p: u64, n: u32) -> std::result::Result<GammaTable, String> {
    if bytes.len() < 4 + 32 || &bytes[..4] != MAGIC {
        return Err("bad magic".into());
    }
    let (body, sum) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != sum {
        return Err("checksum mismatch".into());
    }
    let mut r = Reader { buf: body, at: 4 };
    let short = || "truncated".to_string();
    let version = r.u32().ok_or_else(short)?;
    if version != VERSION {
        return Err(format!("version {version}, expected {VERSION}"));
    }
    let (fp, fnn, k_max) = (r.u64().ok_or_else(short)?, r.u32().ok_or_else(short)?, r.u64().ok_or_else(short)?);
    if (fp, fnn) != (p, n) {
        return Err(format!("header (p, N) = ({fp}, {fnn}), expected ({p}, {n})"));
    }
    if k_max < required_k_max(p, n) {
        return Err(format!("k_max {k_max} below {}", required_k_max(p, n)));
    }
    let count = r.u64().ok_or_else(short)? as usize;
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let prec = r.u32().ok_or_else(short)?;
        let len = r.u32().ok_or_else(short)? as usize;
        let residue = BigUint::from_bytes_le(r.take(len).ok_or_else(short)?);
        values.push(PadicNumber::new(p, prec, residue));
    }
    if r.at != body.len() || count as u64 != p {
        return Err("payload length".into());
    }
    Ok(GammaTable { prime: p, precision: n, values })
}

pub fn dir_from_env() -> Option<PathBuf> {
    std::env::var_os(ENV_DIR).filter(|s| !s.is_empty()).map(PathBuf::from)
}

/// Loads the table from `dir`, or builds and stores it. A damaged file is an error,
/// not a silent rebuild.
pub fn gamma_table(p: u64, n: u32, dir: Option<&Path>) -> Result<GammaTable> {
    let Some(dir) = dir else {
        return Ok(GammaTable::build(p, n)?);
    };
    let path = dir.join(file_name(p, n));
    if path.exists() {
        let bytes = std::fs::read(&path)?;
        return decode(&bytes, p, n).map_err(|detail| Error::Cache { path: path.display().to_string(), detail });
    }
    let t = GammaTable::build(p, n)?;
    std::fs::create_dir_all(dir)?;
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, encode(&t))?;
    std::fs::rename(&tmp, &path)?;
    Ok(t)
}
