//! Binary on-disk form of a [`KernelGrid`].
//!
//! Layout, all little-endian: magic `WKFBMGRD`, format version (`u32`),
//! `H` (`f64`), `n` (`u64`), `tol` (`f64`), base Gauss order (`u64`), highest
//! doubling level used (`u32`), grading ratio (`f64`), grading pieces (`u64`),
//! coefficient count (`u64`), then `b` row by row (`f64` each). `d` is not
//! stored; it is recomputed by the same differencing on load, so a round trip
//! is bit-exact.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use super::grid::{build_grid, KernelGrid, QuadProfile};
use super::HurstParam;
use crate::error::{Error, Result};

pub const CACHE_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"WKFBMGRD";

pub fn save_grid(grid: &KernelGrid, path: &Path) -> Result<()> {
    let p = grid.profile();
    let raw = grid.raw_b();
    let mut buf = Vec::with_capacity(80 + 8 * raw.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CACHE_FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&grid.hurst().value().to_le_bytes());
    buf.extend_from_slice(&(grid.n() as u64).to_le_bytes());
    buf.extend_from_slice(&p.tol.to_le_bytes());
    buf.extend_from_slice(&(p.base_order as u64).to_le_bytes());
    buf.extend_from_slice(&p.max_level_used.to_le_bytes());
    buf.extend_from_slice(&p.grading_ratio.to_le_bytes());
    buf.extend_from_slice(&(p.grading_pieces as u64).to_le_bytes());
    buf.extend_from_slice(&(raw.len() as u64).to_le_bytes());
    for v in raw {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    // Write then rename so a concurrent reader never sees a partial file.
    static WRITES: AtomicU64 = AtomicU64::new(0);
    let tag = WRITES.fetch_add(1, Ordering::Relaxed);
    let tmp = path.with_extension(format!("tmp{}-{tag}", std::process::id()));
    fs::File::create(&tmp)?.write_all(&buf)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let slice = self.bytes.get(self.pos..end).ok_or_else(|| Error::CacheFormat {
            path: self.path.to_path_buf(),
            reason: "truncated file".into(),
        })?;
        self.pos = end;
        Ok(slice.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn load_grid(path: &Path) -> Result<KernelGrid> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let bad = |reason: &str| Error::CacheFormat {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut r = Reader {
        bytes: &bytes,
        pos: 0,
        path,
    };
    if &r.take::<8>()? != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = r.u32()?;
    if version != CACHE_FORMAT_VERSION {
        return Err(bad(&format!("unsupported format version {version}")));
    }
    let hurst = HurstParam::new(r.f64()?)?;
    let n = r.u64()? as usize;
    let profile = QuadProfile {
        tol: r.f64()?,
        base_order: r.u64()? as usize,
        max_level_used: r.u32()?,
        grading_ratio: r.f64()?,
        grading_pieces: r.u64()? as usize,
    };
    let count = r.u64()? as usize;
    if count != n * (n + 1) / 2 {
        return Err(bad("coefficient count does not match n"));
    }
    let mut b = Vec::with_capacity(count);
    for _ in 0..count {
        b.push(r.f64()?);
    }
    if r.pos != bytes.len() {
        return Err(bad("trailing bytes"));
    }
    Ok(KernelGrid::from_b(hurst, n, b, profile))
}

/// Directory of cached grids keyed by the exact bits of `(H, n, tol)`.
#[derive(Debug, Clone)]
pub struct GridCache {
    dir: PathBuf,
}

impl GridCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path_for(&self, hurst: HurstParam, n: usize, tol: f64) -> PathBuf {
        self.dir.join(format!(
            "grid-h{:016x}-n{n}-tol{:016x}.bin",
            hurst.value().to_bits(),
            tol.to_bits()
        ))
    }

    /// Loads a cached grid, or builds and stores it. Unreadable cache files are
    /// rebuilt rather than trusted.
    pub fn get_or_build(&self, hurst: HurstParam, n: usize, tol: f64) -> Result<KernelGrid> {
        let path = self.path_for(hurst, n, tol);
        if path.exists() {
            if let Ok(grid) = load_grid(&path) {
                if grid.hurst() == hurst && grid.n() == n && grid.profile().tol == tol {
                    return Ok(grid);
                }
            }
        }
        let grid = build_grid(hurst, n, tol)?;
        save_grid(&grid, &path)?;
        Ok(grid)
    }
}
