use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

use super::Dataset;

/// Converts a seeded uniform choice of `⌊missing_fraction × |seen rows|⌋`
/// paired seen-class rows into auxiliary unlabeled rows: they lose label
/// and attribute pairing, join `aud_rows` with no pseudo-attribute target,
/// and unseen-class rows are left untouched.
pub fn apply_limited_supervision(ds: &Dataset, missing_fraction: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&missing_fraction) {
        return Err(Error::InvalidConfig(format!(
            "missing_fraction must lie in [0, 1], got {missing_fraction}"
        )));
    }
    let seen_rows = ds.seen_labeled_rows();
    let convert = (missing_fraction * seen_rows.len() as f64).floor() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, seen_rows.len(), convert);

    let mut out = ds.clone();
    for i in picks.iter() {
        let row = seen_rows[i];
        out.labels[row] = None;
        out.aud_rows.push(row);
    }
    out.aud_rows.sort_unstable();
    out.validate()?;
    Ok(out)
}
