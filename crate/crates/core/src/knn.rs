//! k-nearest-neighbor identification baseline, latent feature files and the
//! evaluation report shared with external classifiers.

use std::collections::BTreeMap;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetManifest, Split};
use crate::error::{Error, Result};
use crate::radar::sidecar_path;
use crate::render::{image_features, read_png};

/// Row-major `n × d` single-precision features.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub n: usize,
    pub d: usize,
    pub data: Vec<f32>,
}

impl Features {
    pub fn new(n: usize, d: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != n * d {
            return Err(Error::Config(format!(
                "{n}x{d} features need {} values, got {}",
                n * d,
                data.len()
            )));
        }
        Ok(Self { n, d, data })
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn select(&self, rows: &[usize]) -> Features {
        let mut data = Vec::with_capacity(rows.len() * self.d);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        Features {
            n: rows.len(),
            d: self.d,
            data,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatentSidecar {
    pub format: String,
    pub n: usize,
    pub d: usize,
    pub manifest_hash: String,
}

/// Flat little-endian f32 rows plus a `<path>.json` sidecar `{n, d,
/// manifest_hash}`. Row order follows the manifest records.
pub fn write_latents(path: &Path, features: &Features, manifest_hash: &str) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
    let mut w = BufWriter::new(f);
    for v in &features.data {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    let side = LatentSidecar {
        format: "f32_le".into(),
        n: features.n,
        d: features.d,
        manifest_hash: manifest_hash.to_string(),
    };
    let sp = sidecar_path(path);
    std::fs::write(&sp, serde_json::to_string_pretty(&side)?).map_err(|e| Error::file(&sp, e))
}

pub fn read_latents(path: &Path) -> Result<(Features, LatentSidecar)> {
    let sp = sidecar_path(path);
    let side: LatentSidecar =
        serde_json::from_str(&std::fs::read_to_string(&sp).map_err(|e| Error::file(&sp, e))?)?;
    if side.format != "f32_le" {
        return Err(Error::Config(format!("unsupported latent format '{}'", side.format)));
    }
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .map_err(|e| Error::file(path, e))?
        .read_to_end(&mut bytes)?;
    if bytes.len() != side.n * side.d * 4 {
        return Err(Error::InsufficientData(format!(
            "{}: sidecar declares {}x{} floats, file holds {} bytes",
            path.display(),
            side.n,
            side.d,
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    Ok((Features::new(side.n, side.d, data)?, side))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureSource {
    /// Decoded image log-power averaged over `block`×`block` tiles.
    Images { block: usize },
    /// Latent file whose rows follow the manifest records.
    Latents { path: PathBuf },
}

impl Default for FeatureSource {
    fn default() -> Self {
        FeatureSource::Images { block: 4 }
    }
}

/// Image features for every manifest record, in record order.
pub fn image_feature_matrix(manifest: &DatasetManifest, root: &Path, block: usize) -> Result<Features> {
    let cmap = manifest.config.render.colormap;
    let rows: Vec<Vec<f32>> = manifest
        .records
        .par_iter()
        .map(|r| {
            let (w, h, px) = read_png(&root.join(&r.path))?;
            Ok(image_features(w, h, &px, cmap, block))
        })
        .collect::<Result<_>>()?;
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::Config("images in the manifest differ in size".into()));
    }
    Features::new(rows.len(), d, rows.concat())
}

fn load_features(manifest: &DatasetManifest, root: &Path, source: &FeatureSource) -> Result<Features> {
    match source {
        FeatureSource::Images { block } => image_feature_matrix(manifest, root, *block),
        FeatureSource::Latents { path } => {
            let (f, side) = read_latents(path)?;
            let hash = manifest.hash()?;
            if side.manifest_hash != hash {
                return Err(Error::Config(format!(
                    "latents were exported for manifest {}, not {hash}",
                    side.manifest_hash
                )));
            }
            if f.n != manifest.records.len() {
                return Err(Error::Config(format!(
                    "{} latent rows for {} manifest records",
                    f.n,
                    manifest.records.len()
                )));
            }
            Ok(f)
        }
    }
}

fn squared_distance(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0.0f32; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let tail: f32 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            let d = x[i] - y[i];
            acc[i] += d * d;
        }
    }
    acc.iter().sum::<f32>() + tail
}

/// Majority vote among the `k` nearest training rows. Ties go to the class
/// with the smallest mean neighbor distance, then to the lowest class index.
pub fn knn_predict(train: &Features, labels: &[usize], test: &Features, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > train.n {
        return Err(Error::Config(format!(
            "k = {k} must lie in [1, {}] (training set size)",
            train.n
        )));
    }
    if train.d != test.d {
        return Err(Error::Config(format!(
            "train features have {} dims, test features {}",
            train.d, test.d
        )));
    }
    const BLOCK: usize = 32;
    let blocks: Vec<Vec<usize>> = (0..test.n)
        .collect::<Vec<_>>()
        .par_chunks(BLOCK)
        .map(|rows| {
            let mut dist = vec![vec![0.0f32; train.n]; rows.len()];
            for j in 0..train.n {
                let b = train.row(j);
                for (r, &i) in rows.iter().enumerate() {
                    dist[r][j] = squared_distance(test.row(i), b);
                }
            }
            dist.iter().map(|d| vote(d, labels, k)).collect()
        })
        .collect();
    Ok(blocks.concat())
}

fn vote(dist: &[f32], labels: &[usize], k: usize) -> usize {
    let mut idx: Vec<usize> = (0..dist.len()).collect();
    let by_dist = |&a: &usize, &b: &usize| dist[a].total_cmp(&dist[b]).then(a.cmp(&b));
    idx.select_nth_unstable_by(k - 1, by_dist);
    let nearest = &mut idx[..k];
    nearest.sort_by(by_dist);
    let mut tally: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for &j in nearest.iter() {
        let e = tally.entry(labels[j]).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += f64::from(dist[j]).sqrt();
    }
    tally
        .into_iter()
        .min_by(|(ca, (na, sa)), (cb, (nb, sb))| {
            nb.cmp(na)
                .then((sa / *na as f64).total_cmp(&(sb / *nb as f64)))
                .then(ca.cmp(cb))
        })
        .map(|(c, _)| c)
        .unwrap()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassInfo {
    pub subject_id: u32,
    pub bmi: f64,
}

/// Identification results. Rows of the confusion matrices are target
/// classes, columns predicted classes, both ordered as in `classes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model: String,
    pub feature: String,
    pub n_train: usize,
    pub n_test: usize,
    pub accuracy: f64,
    pub classes: Vec<ClassInfo>,
    pub confusion: Vec<Vec<u64>>,
    pub confusion_normalized: Vec<Vec<f64>>,
    pub per_class_recall: Vec<f64>,
}

impl EvaluationReport {
    pub fn from_predictions(
        model: &str,
        feature: &str,
        classes: Vec<ClassInfo>,
        n_train: usize,
        truth: &[usize],
        predicted: &[usize],
    ) -> Self {
        let c = classes.len();
        let mut confusion = vec![vec![0u64; c]; c];
        for (&t, &p) in truth.iter().zip(predicted) {
            confusion[t][p] += 1;
        }
        let correct: u64 = (0..c).map(|i| confusion[i][i]).sum();
        let confusion_normalized: Vec<Vec<f64>> = confusion
            .iter()
            .map(|row| {
                let total: u64 = row.iter().sum();
                row.iter()
                    .map(|&v| if total > 0 { v as f64 / total as f64 } else { 0.0 })
                    .collect()
            })
            .collect();
        let per_class_recall = (0..c).map(|i| confusion_normalized[i][i]).collect();
        Self {
            model: model.to_string(),
            feature: feature.to_string(),
            n_train,
            n_test: truth.len(),
            accuracy: if truth.is_empty() {
                0.0
            } else {
                correct as f64 / truth.len() as f64
            },
            classes,
            confusion,
            confusion_normalized,
            per_class_recall,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n").map_err(|e| Error::file(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(
            &std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?,
        )?)
    }
}

/// Classes of a manifest: its cohort's subjects in id order.
pub fn manifest_classes(manifest: &DatasetManifest) -> Vec<ClassInfo> {
    let mut subjects: Vec<_> = manifest.cohort.subjects.iter().collect();
    subjects.sort_by_key(|s| s.id);
    subjects
        .iter()
        .map(|s| ClassInfo {
            subject_id: s.id,
            bmi: s.bmi(),
        })
        .collect()
}

/// Trains on the `train` split, evaluates on `test`.
pub fn knn_baseline(manifest: &DatasetManifest, root: &Path, k: usize, source: &FeatureSource) -> Result<EvaluationReport> {
    let train_idx = manifest.indices(Split::Train);
    let test_idx = manifest.indices(Split::Test);
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(Error::InsufficientData(format!(
            "need non-empty splits, have {} train and {} test images",
            train_idx.len(),
            test_idx.len()
        )));
    }
    if k > train_idx.len() {
        return Err(Error::Config(format!(
            "k = {k} exceeds the {} training images",
            train_idx.len()
        )));
    }
    let classes = manifest_classes(manifest);
    let class_of: BTreeMap<u32, usize> = classes.iter().enumerate().map(|(i, c)| (c.subject_id, i)).collect();
    let label = |i: usize| -> Result<usize> {
        let id = manifest.records[i].subject_id;
        class_of
            .get(&id)
            .copied()
            .ok_or_else(|| Error::Config(format!("record subject {id} is not in the cohort")))
    };
    let train_labels = train_idx.iter().map(|&i| label(i)).collect::<Result<Vec<_>>>()?;
    let truth = test_idx.iter().map(|&i| label(i)).collect::<Result<Vec<_>>>()?;

    let features = load_features(manifest, root, source)?;
    let train = features.select(&train_idx);
    let test = features.select(&test_idx);
    let predicted = knn_predict(&train, &train_labels, &test, k)?;
    let feature = match source {
        FeatureSource::Images { block } => format!("image_log_power_{block}x{block}_blocks"),
        FeatureSource::Latents { .. } => "latents".to_string(),
    };
    Ok(EvaluationReport::from_predictions(
        &format!("knn_k{k}"),
        &feature,
        classes,
        train.n,
        &truth,
        &predicted,
    ))
}
