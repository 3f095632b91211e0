//! Raw field snapshot format (`.gpwf`).
//!
//! Layout: a 64-byte little-endian header followed by the node values in
//! C-order, interleaved `(re, im)` as 64-bit floats.
//!
//! Header bytes:
//! ```text
//!  0..4   magic "GPWF"
//!  4..8   u32 format version (1)
//!  8..12  u32 dim
//! 12..16  u32 points per axis
//! 16..24  f64 box length
//! 24..32  i64 unix timestamp (seconds; informational only)
//! 32..64  zero padding
//! ```

use crate::field::SpectralField;
use crate::grid::{make_grid, TorusGrid};
use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

pub const MAGIC: &[u8; 4] = b"GPWF";
pub const HEADER_LEN: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic (not a GPWF snapshot)")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    BadVersion(u32),
    #[error("snapshot payload truncated")]
    Truncated,
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

pub fn write_gpwf(path: &Path, field: &mut SpectralField) -> Result<(), SnapshotError> {
    let grid = field.grid().clone();
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(MAGIC);
    header[4..8].copy_from_slice(&1u32.to_le_bytes());
    header[8..12].copy_from_slice(&(grid.dim() as u32).to_le_bytes());
    header[12..16].copy_from_slice(&(grid.n() as u32).to_le_bytes());
    header[16..24].copy_from_slice(&grid.box_length().to_le_bytes());
    let ts = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0);
    header[24..32].copy_from_slice(&ts.to_le_bytes());

    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(&header)?;
    for v in field.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_gpwf(path: &Path) -> Result<(Arc<TorusGrid>, SpectralField), SnapshotError> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header).map_err(|_| SnapshotError::Truncated)?;
    if &header[0..4] != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != 1 {
        return Err(SnapshotError::BadVersion(version));
    }
    let dim = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let n = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    let l = f64::from_le_bytes(header[16..24].try_into().unwrap());
    let grid = make_grid(dim, n, l)?;
    let mut vals = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut buf = [0u8; 16];
    for v in vals.iter_mut() {
        r.read_exact(&mut buf).map_err(|_| SnapshotError::Truncated)?;
        v.re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
        v.im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
    }
    Ok((grid.clone(), SpectralField::from_values(&grid, vals)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let grid = make_grid(2, 16, 3.5).unwrap();
        let mut f = SpectralField::from_fn(&grid, |x| Complex64::new(x[0], x[1] * 2.0));
        let dir = std::env::temp_dir().join("gpwave-snapshot-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.gpwf");
        write_gpwf(&path, &mut f).unwrap();
        let (g2, mut f2) = read_gpwf(&path).unwrap();
        assert_eq!(g2.dim(), 2);
        assert_eq!(g2.n(), 16);
        assert_eq!(g2.box_length(), 3.5);
        for (a, b) in f.values().iter().zip(f2.values()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = std::env::temp_dir().join("gpwave-snapshot-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("junk.gpwf");
        std::fs::write(&path, vec![0u8; 128]).unwrap();
        assert!(matches!(read_gpwf(&path), Err(SnapshotError::BadMagic)));
    }
}
