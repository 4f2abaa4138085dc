use std::fs;
use std::path::Path;

use crate::{Error, Result};

pub(crate) const MATRIX_MAGIC: &[u8; 8] = b"POEMAT01";

/// Dense row-major f64 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Matrix {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Matrix {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix { rows: rows.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Writes `POEMAT01`, u64 rows, u64 cols (little-endian), then the
    /// row-major f64 payload.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(24 + self.data.len() * 8);
        bytes.extend_from_slice(MATRIX_MAGIC);
        bytes.extend_from_slice(&(self.rows as u64).to_le_bytes());
        bytes.extend_from_slice(&(self.cols as u64).to_le_bytes());
        for v in &self.data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    /// Reads a matrix back, rejecting bad magic, truncated or oversized
    /// payloads, and non-finite values.
    pub fn load(path: &Path) -> Result<Matrix> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() < 24 {
            return Err(Error::format(path, format!("file too short for header: {} bytes", bytes.len())));
        }
        if &bytes[..8] != MATRIX_MAGIC {
            return Err(Error::format(path, "bad magic at offset 0, expected POEMAT01"));
        }
        let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
        let count = rows
            .checked_mul(cols)
            .filter(|&n| n <= usize::MAX as u64 / 8)
            .ok_or_else(|| Error::format(path, format!("implausible dimensions {rows}x{cols}")))?;
        let expected = 24 + count as usize * 8;
        if bytes.len() != expected {
            return Err(Error::format(
                path,
                format!(
                    "payload length mismatch at offset 24: expected {expected} bytes total, found {}",
                    bytes.len()
                ),
            ));
        }
        let mut data = Vec::with_capacity(count as usize);
        for i in 0..count as usize {
            let at = 24 + i * 8;
            let v = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
            if !v.is_finite() {
                return Err(Error::format(path, format!("non-finite value at element {i}")));
            }
            data.push(v);
        }
        Ok(Matrix { rows: rows as usize, cols: cols as usize, data })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        let m = Matrix::from_rows(&[vec![1.0, 2.5], vec![-3.0, 0.125]]);
        m.save(&path).unwrap();
        assert_eq!(Matrix::load(&path).unwrap(), m);
    }

    #[test]
    fn truncated_payload_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        let m = Matrix::zeros(4, 3);
        m.save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        match Matrix::load(&path) {
            Err(Error::Format { detail, .. }) => assert!(detail.contains("length mismatch")),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn oversized_payload_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        Matrix::zeros(2, 2).save(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.extend_from_slice(&[0u8; 8]);
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(Matrix::load(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn wrong_magic_is_a_format_error_with_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        let mut bytes = b"NOTMAGIC".to_vec();
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&1u64.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 16]);
        std::fs::write(&path, bytes).unwrap();
        match Matrix::load(&path) {
            Err(Error::Format { detail, .. }) => assert!(detail.contains("offset 0")),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        Matrix::from_vec(1, 2, vec![1.0, f64::NAN]).save(&path).unwrap();
        match Matrix::load(&path) {
            Err(Error::Format { detail, .. }) => assert!(detail.contains("non-finite")),
            other => panic!("expected format error, got {other:?}"),
        }
    }
}
