use std::fs;
use std::path::Path;

use crate::{Error, Result};

pub(crate) const LABELS_MAGIC: &[u8; 8] = b"POELBL01";

/// Sentinel stored for rows without a label.
pub const MISSING_LABEL: u32 = u32::MAX;

/// Writes `POELBL01`, u64 count, then one u32 per row (little-endian);
/// unlabeled rows are stored as [`MISSING_LABEL`].
pub fn save_labels(path: &Path, labels: &[Option<u32>]) -> Result<()> {
    let mut bytes = Vec::with_capacity(16 + labels.len() * 4);
    bytes.extend_from_slice(LABELS_MAGIC);
    bytes.extend_from_slice(&(labels.len() as u64).to_le_bytes());
    for l in labels {
        let raw = match l {
            Some(v) => {
                assert!(*v != MISSING_LABEL, "class index collides with the missing-label sentinel");
                *v
            }
            None => MISSING_LABEL,
        };
        bytes.extend_from_slice(&raw.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_labels(path: &Path) -> Result<Vec<Option<u32>>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 16 {
        return Err(Error::format(path, format!("file too short for header: {} bytes", bytes.len())));
    }
    if &bytes[..8] != LABELS_MAGIC {
        return Err(Error::format(path, "bad magic at offset 0, expected POELBL01"));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let expected = 16 + count * 4;
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            format!("payload length mismatch at offset 16: expected {expected} bytes total, found {}", bytes.len()),
        ));
    }
    let labels = (0..count)
        .map(|i| {
            let at = 16 + i * 4;
            let raw = u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
            (raw != MISSING_LABEL).then_some(raw)
        })
        .collect();
    Ok(labels)
}
