//! Binary field checkpoints.
//!
//! Layout, little-endian throughout:
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 4     | magic `YMF1`                              |
//! | 1     | endianness flag, `1` = little-endian      |
//! | 1     | group kind: `0` U(1), `1` SU(N), `2` U(N) |
//! | 4     | matrix dimension `N` (u32)                |
//! | 4     | cutoff (u32)                              |
//! | 4     | algebra dimension `d_𝔤` (u32)             |
//!
//! followed by `d_𝔤 · 3 · (2·cutoff+1)³` complex numbers, each stored as
//! two f64 (real, imaginary), in `(a, j, n)` order with `n` lexicographic
//! and `n1` outermost.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::modes;
use super::spectral::SpectralConnection;
use crate::algebra::GroupSpec;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"YMF1";
const LITTLE_ENDIAN: u8 = 1;

pub fn write_field<W: Write>(a: &SpectralConnection, mut w: W) -> Result<()> {
    let group = a.group();
    w.write_all(MAGIC)?;
    w.write_all(&[LITTLE_ENDIAN, group.kind_tag()])?;
    w.write_all(&(group.n as u32).to_le_bytes())?;
    w.write_all(&(a.cutoff() as u32).to_le_bytes())?;
    w.write_all(&(group.algebra_dim() as u32).to_le_bytes())?;
    for z in a.coeffs() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| Error::Format("truncated header".into()))?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_field<R: Read>(mut r: R) -> Result<SpectralConnection> {
    let mut head = [0u8; 6];
    r.read_exact(&mut head).map_err(|_| Error::Format("truncated header".into()))?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("bad magic bytes".into()));
    }
    if head[4] != LITTLE_ENDIAN {
        return Err(Error::Format(format!("unsupported endianness flag {}", head[4])));
    }
    let n = read_u32(&mut r)? as usize;
    let group = GroupSpec::from_tag(head[5], n).map_err(|e| Error::Format(e.to_string()))?;
    let cutoff = read_u32(&mut r)? as usize;
    let d = read_u32(&mut r)? as usize;
    if d != group.algebra_dim() {
        return Err(Error::Format(format!(
            "algebra dimension {d} does not match {group}"
        )));
    }
    let count = d * 3 * modes::mode_count(cutoff);
    let mut bytes = vec![0u8; count * 16];
    r.read_exact(&mut bytes)
        .map_err(|_| Error::Format(format!("expected {count} coefficients, file is truncated")))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after coefficients".into()));
    }
    let coeffs = bytes
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    SpectralConnection::from_coeffs(group, cutoff, coeffs)
}

pub fn save_field(a: &SpectralConnection, path: &Path) -> Result<()> {
    write_field(a, BufWriter::new(File::create(path)?))
}

pub fn load_field(path: &Path) -> Result<SpectralConnection> {
    read_field(BufReader::new(File::open(path)?))
}
