//! Datasets, file formats, the synthetic benchmark, and data transforms.
//!
//! A [`Dataset`] holds image-feature rows, one attribute vector per class,
//! per-row labels, the seen/unseen class split, and the set of auxiliary
//! unlabeled rows (optionally with pseudo-attribute targets). Class ids are
//! contiguous indices into the class-attribute matrix; seen and unseen
//! partition them. Unseen-class rows exist only for evaluation — no
//! training iterator ever yields them.
//!
//! On disk a dataset is a JSON manifest referencing binary matrix
//! (`POEMAT01`) and label (`POELBL01`) files, all paths relative to the
//! manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

mod labels;
mod matrix;
mod synthetic;
mod transform;

pub use labels::{load_labels, save_labels, MISSING_LABEL};
pub use matrix::Matrix;
pub use synthetic::{aggregate_pseudo_attribute, generate_synthetic, SyntheticConfig};
pub use transform::apply_limited_supervision;

/// One GZSL dataset; immutable after construction (transforms return new
/// values).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// One image-feature vector per row.
    pub features: Matrix,
    /// One attribute vector per class, indexed by class id.
    pub class_attributes: Matrix,
    /// Per-row class, `None` for auxiliary unlabeled rows.
    pub labels: Vec<Option<u32>>,
    pub seen_classes: Vec<u32>,
    pub unseen_classes: Vec<u32>,
    /// Rows that train without label or attribute pairing.
    pub aud_rows: Vec<usize>,
    /// Pseudo-attribute targets for a subset of `aud_rows`.
    pub pseudo_attributes: BTreeMap<usize, Vec<f64>>,
}

impl Dataset {
    pub fn num_rows(&self) -> usize {
        self.features.rows()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn attr_dim(&self) -> usize {
        self.class_attributes.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.class_attributes.rows()
    }

    pub fn is_seen(&self, class: u32) -> bool {
        self.seen_classes.contains(&class)
    }

    /// Structural checks: label/row alignment, the seen/unseen partition,
    /// and the auxiliary-row bookkeeping. Loaders call this before handing
    /// a dataset out.
    pub fn validate(&self) -> Result<()> {
        if self.labels.len() != self.num_rows() {
            return Err(Error::Validation(format!(
                "{} labels for {} feature rows",
                self.labels.len(),
                self.num_rows()
            )));
        }
        if !self.features.all_finite() || !self.class_attributes.all_finite() {
            return Err(Error::Validation("non-finite values in feature or attribute matrices".into()));
        }
        if self.seen_classes.is_empty() || self.unseen_classes.is_empty() {
            return Err(Error::Validation("seen and unseen class sets must be nonempty".into()));
        }

        let mut all: Vec<u32> = self.seen_classes.iter().chain(&self.unseen_classes).copied().collect();
        all.sort_unstable();
        let expect: Vec<u32> = (0..self.num_classes() as u32).collect();
        if all != expect {
            return Err(Error::Validation(
                "seen and unseen classes must partition the class-attribute rows".into(),
            ));
        }

        for (row, label) in self.labels.iter().enumerate() {
            if let Some(c) = label {
                if *c >= self.num_classes() as u32 {
                    return Err(Error::Validation(format!("row {row} labeled with unknown class {c}")));
                }
            }
        }

        let mut seen_rows = BTreeSet::new();
        for &row in &self.aud_rows {
            if row >= self.num_rows() {
                return Err(Error::Validation(format!("dangling aud_rows index {row}")));
            }
            if !seen_rows.insert(row) {
                return Err(Error::Validation(format!("duplicate aud_rows index {row}")));
            }
            if let Some(c) = self.labels[row] {
                return Err(Error::Validation(format!(
                    "aud_rows index {row} references a row labeled with class {c}"
                )));
            }
        }
        for (row, label) in self.labels.iter().enumerate() {
            if label.is_none() && !seen_rows.contains(&row) {
                return Err(Error::Validation(format!("unlabeled row {row} missing from aud_rows")));
            }
        }

        for (&row, vec) in &self.pseudo_attributes {
            if !seen_rows.contains(&row) {
                return Err(Error::Validation(format!("pseudo-attribute for non-aud row {row}")));
            }
            if vec.len() != self.attr_dim() {
                return Err(Error::Validation(format!(
                    "pseudo-attribute for row {row} has length {}, expected {}",
                    vec.len(),
                    self.attr_dim()
                )));
            }
            if !vec.iter().all(|v| v.is_finite()) {
                return Err(Error::Validation(format!("non-finite pseudo-attribute for row {row}")));
            }
        }
        Ok(())
    }

    /// Rows labeled with any seen class, ascending.
    pub fn seen_labeled_rows(&self) -> Vec<usize> {
        let seen: BTreeSet<u32> = self.seen_classes.iter().copied().collect();
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(r, l)| l.filter(|c| seen.contains(c)).map(|_| r))
            .collect()
    }

    /// Saves the dataset into `dir` and returns the manifest path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.features.save(&dir.join("features.bin"))?;
        self.class_attributes.save(&dir.join("class_attributes.bin"))?;
        save_labels(&dir.join("labels.bin"), &self.labels)?;

        let (pseudo_path, pseudo_rows) = if self.pseudo_attributes.is_empty() {
            (None, None)
        } else {
            let rows: Vec<Vec<f64>> = self.pseudo_attributes.values().cloned().collect();
            Matrix::from_rows(&rows).save(&dir.join("pseudo_attributes.bin"))?;
            let keys: Vec<u64> = self.pseudo_attributes.keys().map(|&r| r as u64).collect();
            let aligned = keys.len() == self.aud_rows.len()
                && self.aud_rows.iter().zip(&keys).all(|(&a, &k)| a as u64 == k);
            // pseudo_rows is only needed when some aud rows lack a target.
            (Some("pseudo_attributes.bin".to_string()), (!aligned).then_some(keys))
        };

        let manifest = Manifest {
            features: "features.bin".into(),
            class_attributes: "class_attributes.bin".into(),
            labels: "labels.bin".into(),
            seen_classes: self.seen_classes.clone(),
            unseen_classes: self.unseen_classes.clone(),
            aud_rows: self.aud_rows.iter().map(|&r| r as u64).collect(),
            pseudo_attributes: pseudo_path,
            pseudo_rows,
        };
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Loads and validates a dataset from its manifest.
    pub fn load(manifest_path: &Path) -> Result<Dataset> {
        let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| Error::Json { path: manifest_path.into(), detail: e.to_string() })?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));

        let features = Matrix::load(&base.join(&manifest.features))?;
        let class_attributes = Matrix::load(&base.join(&manifest.class_attributes))?;
        let labels = load_labels(&base.join(&manifest.labels))?;
        let aud_rows: Vec<usize> = manifest.aud_rows.iter().map(|&r| r as usize).collect();

        let mut pseudo_attributes = BTreeMap::new();
        if let Some(rel) = &manifest.pseudo_attributes {
            let m = Matrix::load(&base.join(rel))?;
            let keys: Vec<usize> = match &manifest.pseudo_rows {
                Some(rows) => rows.iter().map(|&r| r as usize).collect(),
                None => aud_rows.clone(),
            };
            if keys.len() != m.rows() {
                return Err(Error::Validation(format!(
                    "pseudo-attribute matrix has {} rows for {} target rows",
                    m.rows(),
                    keys.len()
                )));
            }
            for (i, row) in keys.iter().enumerate() {
                pseudo_attributes.insert(*row, m.row(i).to_vec());
            }
        }

        let ds = Dataset {
            features,
            class_attributes,
            labels,
            seen_classes: manifest.seen_classes,
            unseen_classes: manifest.unseen_classes,
            aud_rows,
            pseudo_attributes,
        };
        ds.validate()?;
        Ok(ds)
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    features: String,
    class_attributes: String,
    labels: String,
    seen_classes: Vec<u32>,
    unseen_classes: Vec<u32>,
    aud_rows: Vec<u64>,
    pseudo_attributes: Option<String>,
    /// Absolute row indices covered by the pseudo-attribute matrix, when
    /// it does not span every aud row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pseudo_rows: Option<Vec<u64>>,
}

/// Deterministic row split used by training and evaluation.
///
/// Per seen class, the first 4/5 of its labeled rows (ascending row index)
/// train the VAE and the classifier; the rest are held out as seen test
/// rows. Per unseen class, the first half forms the pool that k-shot
/// evaluation may draw support examples from, and the second half is the
/// unseen test set, fixed across k.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSplit {
    pub seen_train: Vec<usize>,
    pub seen_test: Vec<usize>,
    pub unseen_pool: Vec<usize>,
    pub unseen_test: Vec<usize>,
}

pub fn protocol_split(ds: &Dataset) -> ProtocolSplit {
    let mut split = ProtocolSplit {
        seen_train: Vec::new(),
        seen_test: Vec::new(),
        unseen_pool: Vec::new(),
        unseen_test: Vec::new(),
    };
    let rows_of = |class: u32| -> Vec<usize> {
        ds.labels
            .iter()
            .enumerate()
            .filter_map(|(r, l)| (*l == Some(class)).then_some(r))
            .collect()
    };
    let mut seen = ds.seen_classes.clone();
    seen.sort_unstable();
    for class in seen {
        let rows = rows_of(class);
        let n = rows.len();
        let train = if n < 2 { n } else { (n * 4 / 5).clamp(1, n - 1) };
        split.seen_train.extend_from_slice(&rows[..train]);
        split.seen_test.extend_from_slice(&rows[train..]);
    }
    let mut unseen = ds.unseen_classes.clone();
    unseen.sort_unstable();
    for class in unseen {
        let rows = rows_of(class);
        let pool = rows.len().div_ceil(2);
        split.unseen_pool.extend_from_slice(&rows[..pool]);
        split.unseen_test.extend_from_slice(&rows[pool..]);
    }
    split
}

/// One example as the training loop consumes it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub image: Vec<f64>,
    /// Present exactly when the sample is paired.
    pub attribute: Option<Vec<f64>>,
    /// The 𝟙_α indicator: true for paired samples.
    pub paired: bool,
    /// Target for the pseudo-attribute decoder, when known.
    pub pseudo_attribute: Option<Vec<f64>>,
    pub label: Option<u32>,
}

impl TrainingSample {
    pub fn paired(image: Vec<f64>, attribute: Vec<f64>, label: u32) -> TrainingSample {
        TrainingSample {
            image,
            attribute: Some(attribute),
            paired: true,
            pseudo_attribute: None,
            label: Some(label),
        }
    }

    pub fn unlabeled(image: Vec<f64>, pseudo_attribute: Option<Vec<f64>>) -> TrainingSample {
        TrainingSample { image, attribute: None, paired: false, pseudo_attribute, label: None }
    }
}

/// Materializes the training set: paired samples from the seen-train rows,
/// plus (when `use_aud`) every auxiliary unlabeled row. Unseen-class rows
/// never appear here.
pub fn training_samples(ds: &Dataset, split: &ProtocolSplit, use_aud: bool) -> Vec<TrainingSample> {
    let mut out = Vec::with_capacity(split.seen_train.len() + ds.aud_rows.len());
    for &row in &split.seen_train {
        let label = ds.labels[row].expect("seen-train rows are labeled");
        out.push(TrainingSample::paired(
            ds.features.row(row).to_vec(),
            ds.class_attributes.row(label as usize).to_vec(),
            label,
        ));
    }
    if use_aud {
        for &row in &ds.aud_rows {
            out.push(TrainingSample::unlabeled(
                ds.features.row(row).to_vec(),
                ds.pseudo_attributes.get(&row).cloned(),
            ));
        }
    }
    out
}
