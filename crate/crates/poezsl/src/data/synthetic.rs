use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::{Dataset, Matrix};

/// Configuration of the synthetic GZSL benchmark.
///
/// The defaults are the desk-scale reference setup: 10 seen, 5 unseen and
/// 10 auxiliary classes with 50 samples each.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct SyntheticConfig {
    pub num_seen: usize,
    pub num_unseen: usize,
    pub num_aud_classes: usize,
    pub samples_per_class: usize,
    pub attr_dim: usize,
    pub feature_dim: usize,
    pub feature_noise_sigma: f64,
    pub pseudo_attr_noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            num_seen: 10,
            num_unseen: 5,
            num_aud_classes: 10,
            samples_per_class: 50,
            attr_dim: 16,
            feature_dim: 32,
            feature_noise_sigma: 0.1,
            pseudo_attr_noise_sigma: 0.1,
            seed: 1,
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        let counts = [
            ("num_seen", self.num_seen),
            ("num_unseen", self.num_unseen),
            ("num_aud_classes", self.num_aud_classes),
            ("samples_per_class", self.samples_per_class),
            ("attr_dim", self.attr_dim),
            ("feature_dim", self.feature_dim),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if self.feature_noise_sigma < 0.0 || self.pseudo_attr_noise_sigma < 0.0 {
            return Err(Error::InvalidConfig("noise sigmas must be non-negative".into()));
        }
        Ok(())
    }
}

/// Sum of per-token embedding vectors, the aggregation used to build a
/// pseudo-attribute from tag or caption word vectors.
pub fn aggregate_pseudo_attribute(token_vectors: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = token_vectors
        .first()
        .ok_or_else(|| Error::Validation("no token vectors to aggregate".into()))?;
    let mut sum = vec![0.0; first.len()];
    for v in token_vectors {
        if v.len() != first.len() {
            return Err(Error::Validation(format!(
                "token vector length {} does not match {}",
                v.len(),
                first.len()
            )));
        }
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    Ok(sum)
}

/// Generates the synthetic benchmark.
///
/// Every class (seen, unseen, auxiliary) gets a standard-normal attribute
/// prototype; image features are a fixed random linear map of the class
/// prototype plus isotropic noise. Auxiliary rows come from their own
/// disjoint prototype classes, carry no label, and get a pseudo-attribute
/// target equal to their class prototype plus noise. Deterministic per
/// seed.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };

    let num_labeled_classes = config.num_seen + config.num_unseen;
    let total_classes = num_labeled_classes + config.num_aud_classes;
    let prototypes: Vec<Vec<f64>> = (0..total_classes)
        .map(|_| (0..config.attr_dim).map(|_| normal(&mut rng)).collect())
        .collect();

    // Fixed ground-truth map from attribute space to feature space.
    let scale = 1.0 / (config.attr_dim as f64).sqrt();
    let map: Vec<f64> = (0..config.feature_dim * config.attr_dim)
        .map(|_| normal(&mut rng) * scale)
        .collect();
    let project = |proto: &[f64]| -> Vec<f64> {
        (0..config.feature_dim)
            .map(|o| {
                let row = &map[o * config.attr_dim..(o + 1) * config.attr_dim];
                row.iter().zip(proto).map(|(w, a)| w * a).sum()
            })
            .collect()
    };

    let rows_total = total_classes * config.samples_per_class;
    let mut features = Matrix::zeros(rows_total, config.feature_dim);
    let mut labels = Vec::with_capacity(rows_total);
    let mut aud_rows = Vec::new();
    let mut pseudo_attributes = BTreeMap::new();

    let mut row = 0;
    for class in 0..total_classes {
        let center = project(&prototypes[class]);
        for _ in 0..config.samples_per_class {
            let dst = features.row_mut(row);
            for (d, c) in dst.iter_mut().zip(&center) {
                // Noise is drawn even at sigma 0 so datasets that differ
                // only in sigma share every other draw.
                *d = c + config.feature_noise_sigma * normal(&mut rng);
            }
            if class < num_labeled_classes {
                labels.push(Some(class as u32));
            } else {
                labels.push(None);
                aud_rows.push(row);
                let pseudo: Vec<f64> = prototypes[class]
                    .iter()
                    .map(|a| a + config.pseudo_attr_noise_sigma * normal(&mut rng))
                    .collect();
                pseudo_attributes.insert(row, pseudo);
            }
            row += 1;
        }
    }

    let class_attributes = Matrix::from_rows(&prototypes[..num_labeled_classes]);
    let ds = Dataset {
        features,
        class_attributes,
        labels,
        seen_classes: (0..config.num_seen as u32).collect(),
        unseen_classes: (config.num_seen as u32..num_labeled_classes as u32).collect(),
        aud_rows,
        pseudo_attributes,
    };
    ds.validate()?;
    Ok(ds)
}
