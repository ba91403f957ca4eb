//! Binary checkpoint cache for [`SumsReport`]s.
//!
//! Layout, all little-endian:
//!
//! ```text
//! header   "PMSM" | version u16 | model hash u64 | grid length u16
//! per row  n u64 | s1 u64
//!          s2, s3, f1, f2, r, m, u    as (value f64, compensation f64)
//!          prime_part, n_log_g        as (value f64, compensation f64)
//!          err_bound f64
//! trailer  FNV-1a 64 checksum of every preceding byte
//! ```
//!
//! A missing `u` is stored as a pair of NaNs. The model hash is FNV-1a 64
//! of [`PrimeModel::fingerprint`]. Files are named
//! `<model hash>-<grid hash>.pmsm`, so a cache entry is keyed by
//! (model, grid); bumping [`VERSION`] invalidates everything.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{sums_stream, CheckpointGrid, CheckpointSums, StreamOptions, SumsReport};
use crate::accum::Compensated;
use crate::error::{Error, Result};
use crate::multfunc::PrimeModel;

pub const MAGIC: &[u8; 4] = b"PMSM";
pub const VERSION: u16 = 1;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

pub fn model_hash(model: &PrimeModel) -> u64 {
    fnv1a64(model.fingerprint().as_bytes())
}

pub fn grid_hash(grid: &CheckpointGrid) -> u64 {
    let bytes: Vec<u8> = grid.points().iter().flat_map(|n| n.to_le_bytes()).collect();
    fnv1a64(&bytes)
}

fn put_pair(buf: &mut Vec<u8>, c: Compensated) {
    buf.extend_from_slice(&c.value.to_le_bytes());
    buf.extend_from_slice(&c.compensation.to_le_bytes());
}

/// Serialize a report. Deterministic: equal reports give equal bytes.
pub fn encode(report: &SumsReport, model_hash: u64) -> Result<Vec<u8>> {
    let len = u16::try_from(report.rows.len())
        .map_err(|_| Error::Cache("too many checkpoints for the cache format".into()))?;
    let mut buf = Vec::with_capacity(16 + report.rows.len() * 168 + 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&model_hash.to_le_bytes());
    buf.extend_from_slice(&len.to_le_bytes());
    let missing = Compensated {
        value: f64::NAN,
        compensation: f64::NAN,
    };
    for r in &report.rows {
        buf.extend_from_slice(&r.n.to_le_bytes());
        buf.extend_from_slice(&r.s1.to_le_bytes());
        for c in [r.s2, r.s3, r.f1, r.f2, r.r_sum, r.m_of_x, r.u_of_x.unwrap_or(missing)] {
            put_pair(&mut buf, c);
        }
        put_pair(&mut buf, r.prime_part);
        put_pair(&mut buf, r.n_log_g);
        buf.extend_from_slice(&r.err_bound.to_le_bytes());
    }
    let sum = fnv1a64(&buf);
    buf.extend_from_slice(&sum.to_le_bytes());
    Ok(buf)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Cache("truncated file".into()))?;
        self.pos = end;
        Ok(slice.try_into().expect("slice length checked"))
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
    fn pair(&mut self) -> Result<Compensated> {
        Ok(Compensated {
            value: self.f64()?,
            compensation: self.f64()?,
        })
    }
}

/// Parse and verify a cache file's bytes. The model name and fingerprint
/// are not stored, so the caller supplies them.
pub fn decode(bytes: &[u8], model: &PrimeModel) -> Result<SumsReport> {
    if bytes.len() < 8 {
        return Err(Error::Cache("truncated file".into()));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().expect("8 bytes"));
    if fnv1a64(body) != stored {
        return Err(Error::Cache("checksum mismatch".into()));
    }
    let mut r = Reader { bytes: body, pos: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::Cache(format!("version {version}, expected {VERSION}")));
    }
    if r.u64()? != model_hash(model) {
        return Err(Error::Cache("model hash mismatch".into()));
    }
    let len = r.u16()? as usize;
    let mut rows = Vec::with_capacity(len);
    for _ in 0..len {
        let n = r.u64()?;
        let s1 = r.u64()?;
        let s2 = r.pair()?;
        let s3 = r.pair()?;
        let f1 = r.pair()?;
        let f2 = r.pair()?;
        let r_sum = r.pair()?;
        let m_of_x = r.pair()?;
        let u = r.pair()?;
        let prime_part = r.pair()?;
        let n_log_g = r.pair()?;
        let err_bound = r.f64()?;
        rows.push(CheckpointSums {
            n,
            s1,
            s2,
            s3,
            f1,
            f2,
            r_sum,
            m_of_x,
            u_of_x: (!u.value.is_nan()).then_some(u),
            prime_part,
            n_log_g,
            err_bound,
        });
    }
    if r.pos != body.len() {
        return Err(Error::Cache("trailing bytes".into()));
    }
    Ok(SumsReport {
        model: model.name.clone(),
        fingerprint: model.fingerprint(),
        rows,
    })
}

pub fn write_report(path: &Path, report: &SumsReport, model: &PrimeModel) -> Result<()> {
    let bytes = encode(report, model_hash(model))?;
    let tmp = path.with_extension("pmsm.tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_report(path: &Path, model: &PrimeModel) -> Result<SumsReport> {
    decode(&fs::read(path)?, model)
}

/// Directory of cached reports.
#[derive(Debug, Clone)]
pub struct ReportCache {
    dir: PathBuf,
}

impl ReportCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Cache rooted at `$PRIMEMEAN_CACHE`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os("PRIMEMEAN_CACHE")
            .filter(|v| !v.is_empty())
            .map(Self::new)
    }

    pub fn path_for(&self, model: &PrimeModel, grid: &CheckpointGrid) -> PathBuf {
        self.dir
            .join(format!("{:016x}-{:016x}.pmsm", model_hash(model), grid_hash(grid)))
    }

    /// Return the cached report when present, valid and matching the grid
    /// (and carrying `U` if asked for); otherwise compute and store it.
    /// Writers hold an exclusive advisory lock on `<dir>/.lock`.
    pub fn load_or_compute(
        &self,
        model: &PrimeModel,
        grid: &CheckpointGrid,
        opts: &StreamOptions,
    ) -> Result<SumsReport> {
        let path = self.path_for(model, grid);
        if let Ok(report) = read_report(&path, model) {
            let grid_ok = report.rows.iter().map(|r| r.n).eq(grid.points().iter().copied());
            let u_ok = !opts.with_u || report.rows.iter().all(|r| r.u_of_x.is_some());
            if grid_ok && u_ok {
                return Ok(report);
            }
        }
        let report = sums_stream(model, grid, opts)?;
        fs::create_dir_all(&self.dir)?;
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(self.dir.join(".lock"))?;
        lock.lock()?;
        let written = write_report(&path, &report, model);
        lock.unlock()?;
        written?;
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multfunc::builtin;

    fn sample() -> (PrimeModel, CheckpointGrid, SumsReport) {
        let m = builtin("euler_phi").unwrap();
        let g = CheckpointGrid::new(vec![10, 100, 1000]).unwrap();
        let r = sums_stream(&m, &g, &StreamOptions::default()).unwrap();
        (m, g, r)
    }

    #[test]
    fn encode_decode_round_trip() {
        let (m, _, r) = sample();
        let bytes = encode(&r, model_hash(&m)).unwrap();
        assert_eq!(&bytes[..4], b"PMSM");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), VERSION);
        assert_eq!(u16::from_le_bytes([bytes[14], bytes[15]]), 3);
        assert_eq!(decode(&bytes, &m).unwrap(), r);
    }

    #[test]
    fn rejects_corruption_and_wrong_model() {
        let (m, _, r) = sample();
        let mut bytes = encode(&r, model_hash(&m)).unwrap();
        assert!(decode(&bytes, &builtin("sigma").unwrap()).is_err());
        bytes[40] ^= 1;
        assert!(matches!(decode(&bytes, &m), Err(Error::Cache(_))));
        assert!(decode(&bytes[..10], &m).is_err());
    }

    #[test]
    fn cache_directory_reuses_entries() {
        let (m, g, r) = sample();
        let dir = tempfile::tempdir().unwrap();
        let cache = ReportCache::new(dir.path());
        let first = cache.load_or_compute(&m, &g, &StreamOptions::default()).unwrap();
        assert_eq!(first, r);
        let path = cache.path_for(&m, &g);
        let bytes = fs::read(&path).unwrap();
        let second = cache.load_or_compute(&m, &g, &StreamOptions::default()).unwrap();
        assert_eq!(second, r);
        assert_eq!(fs::read(&path).unwrap(), bytes);
    }
}
