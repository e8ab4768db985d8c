//! Binary matrix dumps.
//!
//! Layout, all little-endian: the bytes `BENT`, a `u32` format version, `u32`
//! rows, `u32` cols, then `rows * cols` complex entries in row-major order,
//! each as two `f64` (real, imaginary).

use std::io::{Read, Write};
use std::path::Path;

use bent_core::fock::CMatrix;
use num_complex::Complex64;

use crate::error::CliError;

pub const MAGIC: &[u8; 4] = b"BENT";
pub const VERSION: u32 = 1;

pub fn write_matrix<W: Write>(mut w: W, m: &CMatrix) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(m.nrows() as u32).to_le_bytes())?;
    w.write_all(&(m.ncols() as u32).to_le_bytes())?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush()
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, CliError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|e| CliError::Dump(e.to_string()))?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64, CliError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|e| CliError::Dump(e.to_string()))?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<CMatrix, CliError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| CliError::Dump(e.to_string()))?;
    if &magic != MAGIC {
        return Err(CliError::Dump("bad magic bytes".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(CliError::Dump(format!("unsupported version {version}")));
    }
    let rows = read_u32(&mut r)? as usize;
    let cols = read_u32(&mut r)? as usize;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        data.push(Complex64::new(re, im));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing).map_err(|e| CliError::Dump(e.to_string()))? != 0 {
        return Err(CliError::Dump("trailing bytes after matrix data".into()));
    }
    Ok(CMatrix::from_row_slice(rows, cols, &data))
}

pub fn write_file(path: &Path, m: &CMatrix) -> Result<(), CliError> {
    let f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_matrix(std::io::BufWriter::new(f), m).map_err(|e| CliError::io(path, e))
}

pub fn read_file(path: &Path) -> Result<CMatrix, CliError> {
    let f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_matrix(std::io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_exact() {
        let m = CMatrix::from_row_slice(1, 2, &[Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.0)]);
        let mut bytes = Vec::new();
        write_matrix(&mut bytes, &m).unwrap();
        assert_eq!(&bytes[..4], b"BENT");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..12], &[1, 0, 0, 0]);
        assert_eq!(&bytes[12..16], &[2, 0, 0, 0]);
        assert_eq!(&bytes[16..24], &1.0f64.to_le_bytes());
        assert_eq!(&bytes[24..32], &(-2.0f64).to_le_bytes());
        assert_eq!(&bytes[32..40], &0.5f64.to_le_bytes());
        assert_eq!(bytes.len(), 16 + 2 * 16);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = CMatrix::from_fn(3, 4, |r, c| Complex64::new(r as f64 / 3.0, -(c as f64).sqrt() * 1e-300));
        let mut bytes = Vec::new();
        write_matrix(&mut bytes, &m).unwrap();
        let back = read_matrix(bytes.as_slice()).unwrap();
        assert!(m
            .iter()
            .zip(back.iter())
            .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
        assert_eq!(back.shape(), (3, 4));
    }

    #[test]
    fn rejects_corrupt_input() {
        let mut bytes = Vec::new();
        write_matrix(&mut bytes, &CMatrix::identity(2, 2)).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_matrix(bad.as_slice()).is_err());
        assert!(read_matrix(&bytes[..bytes.len() - 1]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(read_matrix(long.as_slice()).is_err());
        let mut v2 = bytes;
        v2[4] = 2;
        assert!(read_matrix(v2.as_slice()).is_err());
    }
}
