//! Exact t-SNE.
//!
//! Input affinities use per-point Gaussian bandwidths calibrated to a target
//! perplexity; the map uses a Student-t kernel with one degree of freedom.
//! Every pairwise sum is accumulated in a fixed order, so results do not
//! depend on the number of threads.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segment::SwingSide;

/// Lower bound applied to every entry of Q.
pub const Q_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PointMeta {
    pub subject_id: Option<u32>,
    pub bmi: Option<f64>,
    pub bmi_group: Option<usize>,
    pub swing_side: Option<SwingSide>,
}

/// `n` points of dimension `d`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub n: usize,
    pub d: usize,
    pub data: Vec<f64>,
    pub meta: Vec<PointMeta>,
}

impl FeatureMatrix {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * d {
            return Err(Error::Config(format!(
                "feature matrix {n}x{d} needs {} values, got {}",
                n * d,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite feature at row {}, column {}",
                i / d.max(1),
                i % d.max(1)
            )));
        }
        Ok(Self {
            n,
            d,
            data,
            meta: vec![PointMeta::default(); n],
        })
    }

    pub fn with_meta(mut self, meta: Vec<PointMeta>) -> Result<Self> {
        if meta.len() != self.n {
            return Err(Error::Config(format!(
                "{} metadata records for {} points",
                meta.len(),
                self.n
            )));
        }
        self.meta = meta;
        Ok(self)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    /// Squared Euclidean distances, row-major `n × n`.
    pub fn squared_distances(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let a = self.row(i);
            for (j, slot) in row.iter_mut().enumerate() {
                if j != i {
                    *slot = a
                        .iter()
                        .zip(self.row(j))
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum();
                }
            }
        });
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub early_exaggeration: f64,
    pub exaggeration_iterations: usize,
    pub learning_rate: f64,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    pub momentum_switch: usize,
    pub min_gain: f64,
    pub init_std: f64,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            learning_rate: 200.0,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            momentum_switch: 250,
            min_gain: 0.01,
            init_std: 1e-4,
            seed: 0,
        }
    }
}

impl TsneConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if n < 4 {
            return Err(Error::InsufficientData(format!("t-SNE needs at least 4 points, got {n}")));
        }
        if !(self.perplexity > 1.0 && 3.0 * self.perplexity < n as f64) {
            return Err(Error::Config(format!(
                "perplexity {} must lie in (1, n/3) for n = {n}",
                self.perplexity
            )));
        }
        if self.iterations < 250 {
            return Err(Error::Config(format!(
                "at least 250 iterations required, got {}",
                self.iterations
            )));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Joint input affinities with the calibrated per-row precisions.
#[derive(Debug, Clone, PartialEq)]
pub struct Affinities {
    pub n: usize,
    /// Symmetric, zero diagonal, sums to 1.
    pub p: Vec<f64>,
    /// `1 / (2 sigma_i^2)` per row.
    pub beta: Vec<f64>,
    /// `exp(H)` of each conditional row after calibration.
    pub row_perplexity: Vec<f64>,
}

/// Conditional row distribution for precision `beta`; returns its entropy in
/// nats.
fn conditional_row(d2: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    let dmin = d2
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for (j, (o, &d)) in out.iter_mut().zip(d2).enumerate() {
        *o = if j == i { 0.0 } else { (-beta * (d - dmin)).exp() };
        sum += *o;
    }
    let mut weighted = 0.0;
    for (o, &d) in out.iter_mut().zip(d2) {
        *o /= sum;
        weighted += *o * (d - dmin);
    }
    sum.ln() + beta * weighted
}

/// Bisection on the precision so the row entropy equals `ln(perplexity)`.
fn calibrate_row(d2: &[f64], i: usize, perplexity: f64, out: &mut [f64]) -> (f64, f64) {
    let target = perplexity.ln();
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut beta = 1.0;
    let mut h = conditional_row(d2, i, beta, out);
    for _ in 0..500 {
        if (h - target).abs() < 1e-12 {
            break;
        }
        if h > target {
            lo = beta;
            beta = if hi.is_finite() { 0.5 * (beta + hi) } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = 0.5 * (beta + lo);
        }
        // duplicate points: entropy cannot drop further, keep the last bandwidth
        if beta > 1e300 {
            beta = 1e300;
            h = conditional_row(d2, i, beta, out);
            break;
        }
        h = conditional_row(d2, i, beta, out);
    }
    (beta, h.exp())
}

pub fn input_affinities(x: &FeatureMatrix, perplexity: f64) -> Result<Affinities> {
    let n = x.n;
    if n < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 points, got {n}")));
    }
    if !(perplexity > 1.0 && perplexity <= (n - 1) as f64) {
        return Err(Error::Config(format!(
            "perplexity {perplexity} outside (1, {}]",
            n - 1
        )));
    }
    let d2 = x.squared_distances();
    let mut cond = vec![0.0; n * n];
    let calib: Vec<(f64, f64)> = cond
        .par_chunks_mut(n)
        .enumerate()
        .map(|(i, row)| calibrate_row(&d2[i * n..(i + 1) * n], i, perplexity, row))
        .collect();
    let mut p = vec![0.0; n * n];
    let scale = 1.0 / (2.0 * n as f64);
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = (cond[i * n + j] + cond[j * n + i]) * scale;
        }
    }
    Ok(Affinities {
        n,
        p,
        beta: calib.iter().map(|c| c.0).collect(),
        row_perplexity: calib.iter().map(|c| c.1).collect(),
    })
}

/// `Σ p ln(p / q)` over entries with `p > 0`; `q` is floored at [`Q_FLOOR`].
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi / qi.max(Q_FLOOR)).ln())
        .sum()
}

/// Student-t joint distribution of a 2-D map, row-major `n × n`.
pub fn low_dim_affinities(y: &[[f64; 2]]) -> Vec<f64> {
    let n = y.len();
    let mut w = kernel(y);
    let z: f64 = w.chunks(n).map(|r| r.iter().sum::<f64>()).sum();
    for v in &mut w {
        *v = (*v / z).max(Q_FLOOR);
    }
    w
}

fn kernel(y: &[[f64; 2]]) -> Vec<f64> {
    let n = y.len();
    let mut w = vec![0.0; n * n];
    w.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, slot) in row.iter_mut().enumerate() {
            if j != i {
                let dx = y[i][0] - y[j][0];
                let dy = y[i][1] - y[j][1];
                *slot = 1.0 / (1.0 + dx * dx + dy * dy);
            }
        }
    });
    w
}

/// KL(P ‖ Q) of the map `y` and the gradient of the objective with P scaled
/// by `exaggeration`.
pub fn kl_gradient(p: &[f64], y: &[[f64; 2]], exaggeration: f64) -> (f64, Vec<[f64; 2]>) {
    let n = y.len();
    let w = kernel(y);
    let z: f64 = w.chunks(n).map(|r| r.iter().sum::<f64>()).sum();
    let grad: Vec<[f64; 2]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut g = [0.0; 2];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let wij = w[i * n + j];
                let q = (wij / z).max(Q_FLOOR);
                let m = 4.0 * (exaggeration * p[i * n + j] - q) * wij;
                g[0] += m * (y[i][0] - y[j][0]);
                g[1] += m * (y[i][1] - y[j][1]);
            }
            g
        })
        .collect();
    let kl: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = 0.0;
            for j in 0..n {
                let pij = p[i * n + j];
                if j != i && pij > 0.0 {
                    s += pij * (pij / (w[i * n + j] / z).max(Q_FLOOR)).ln();
                }
            }
            s
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    (kl, grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingPoint {
    pub x: f64,
    pub y: f64,
    #[serde(flatten)]
    pub meta: PointMeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub points: Vec<EmbeddingPoint>,
    /// KL(P ‖ Q) after each iteration.
    pub kl_trace: Vec<f64>,
    pub affinities: Affinities,
}

impl Embedding {
    pub fn coords(&self) -> Vec<[f64; 2]> {
        self.points.iter().map(|p| [p.x, p.y]).collect()
    }

    /// `id,x,y,subject,bmi,swing_side`; missing metadata is left empty.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        writeln!(w, "id,x,y,subject,bmi,swing_side")?;
        for (i, p) in self.points.iter().enumerate() {
            let subject = p.meta.subject_id.map(|s| s.to_string()).unwrap_or_default();
            let bmi = p.meta.bmi.map(|b| format!("{b:.2}")).unwrap_or_default();
            let side = p.meta.swing_side.map(|s| s.to_string()).unwrap_or_default();
            writeln!(w, "{i},{},{},{subject},{bmi},{side}", p.x, p.y)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn tsne(x: &FeatureMatrix, cfg: &TsneConfig) -> Result<Embedding> {
    cfg.validate(x.n)?;
    let aff = input_affinities(x, cfg.perplexity)?;
    let n = x.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = Normal::new(0.0, cfg.init_std)
        .map_err(|e| Error::Config(format!("initial spread: {e}")))?;
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| [init.sample(&mut rng), init.sample(&mut rng)])
        .collect();
    let mut update = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut trace = Vec::with_capacity(cfg.iterations);

    for it in 0..cfg.iterations {
        let exaggeration = if it < cfg.exaggeration_iterations {
            cfg.early_exaggeration
        } else {
            1.0
        };
        let momentum = if it < cfg.momentum_switch {
            cfg.initial_momentum
        } else {
            cfg.final_momentum
        };
        let (kl, grad) = kl_gradient(&aff.p, &y, exaggeration);
        let mut max_abs = 0.0f64;
        let mut finite = true;
        for g in &grad {
            for v in g {
                if v.is_finite() {
                    max_abs = max_abs.max(v.abs());
                } else {
                    finite = false;
                }
            }
        }
        if !finite {
            return Err(Error::NonFiniteGradient {
                iteration: it,
                max_gradient: max_abs,
            });
        }
        for i in 0..n {
            for c in 0..2 {
                let g = grad[i][c];
                gains[i][c] = if (g > 0.0) != (update[i][c] > 0.0) {
                    gains[i][c] + 0.2
                } else {
                    (gains[i][c] * 0.8).max(cfg.min_gain)
                };
                update[i][c] = momentum * update[i][c] - cfg.learning_rate * gains[i][c] * g;
                y[i][c] += update[i][c];
            }
        }
        let mean = y.iter().fold([0.0; 2], |a, p| [a[0] + p[0], a[1] + p[1]]);
        for p in &mut y {
            p[0] -= mean[0] / n as f64;
            p[1] -= mean[1] / n as f64;
        }
        trace.push(kl);
    }
    // trace entries are evaluated before each step; append the final state
    let (kl, _) = kl_gradient(&aff.p, &y, 1.0);
    trace.push(kl);
    trace.remove(0);

    let points = y
        .iter()
        .zip(&x.meta)
        .map(|(p, m)| EmbeddingPoint {
            x: p[0],
            y: p[1],
            meta: m.clone(),
        })
        .collect();
    Ok(Embedding {
        points,
        kl_trace: trace,
        affinities: aff,
    })
}

/// Mean silhouette coefficient of `points` under `labels` (Euclidean).
pub fn silhouette(points: &[[f64; 2]], labels: &[usize]) -> f64 {
    let n = points.len();
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut count = vec![0usize; k];
    for &l in labels {
        count[l] += 1;
    }
    let total: f64 = (0..n)
        .map(|i| {
            let mut sums = vec![0.0; k];
            for j in 0..n {
                if j != i {
                    let dx = points[i][0] - points[j][0];
                    let dy = points[i][1] - points[j][1];
                    sums[labels[j]] += (dx * dx + dy * dy).sqrt();
                }
            }
            let own = labels[i];
            if count[own] <= 1 {
                return 0.0;
            }
            let a = sums[own] / (count[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && count[c] > 0)
                .map(|c| sums[c] / count[c] as f64)
                .fold(f64::INFINITY, f64::min);
            if !b.is_finite() {
                return 0.0;
            }
            (b - a) / a.max(b)
        })
        .sum();
    total / n as f64
}

/// `k` isotropic Gaussian clusters of `per` points in `d` dimensions with unit
/// variance, centers `separation` apart along distinct axes (scaled by
/// `1/sqrt(2)` so pairwise center distances equal `separation`).
pub fn gaussian_blobs(k: usize, per: usize, d: usize, separation: f64, seed: u64) -> (FeatureMatrix, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut data = Vec::with_capacity(k * per * d);
    let mut labels = Vec::with_capacity(k * per);
    for c in 0..k {
        for _ in 0..per {
            for j in 0..d {
                let center = if j == c % d { separation / 2f64.sqrt() } else { 0.0 };
                data.push(center + normal.sample(&mut rng));
            }
            labels.push(c);
        }
    }
    (FeatureMatrix::new(k * per, d, data).expect("consistent shape"), labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn equidistant_triangle_is_uniform() {
        let s = 3f64.sqrt() / 2.0;
        let x = FeatureMatrix::new(3, 2, vec![0.0, 0.0, 1.0, 0.0, 0.5, s]).unwrap();
        let a = input_affinities(&x, 2.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.0 } else { 1.0 / 6.0 };
                assert_relative_eq!(a.p[i * 3 + j], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn kl_hand_value() {
        let v = kl_divergence(&[0.5, 0.5], &[0.9, 0.1]);
        let want = 0.5 * (0.5f64 / 0.9).ln() + 0.5 * (0.5f64 / 0.1).ln();
        assert_relative_eq!(v, want, epsilon = 1e-15);
        assert_relative_eq!(v, 0.5108, epsilon = 1e-4);
        assert_eq!(kl_divergence(&[0.2, 0.8], &[0.2, 0.8]), 0.0);
    }

    #[test]
    fn duplicate_points_do_not_fail() {
        let x = FeatureMatrix::new(5, 1, vec![1.0; 5]).unwrap();
        let a = input_affinities(&x, 2.0).unwrap();
        assert!(a.p.iter().all(|v| v.is_finite()));
        assert_relative_eq!(a.p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn config_validation() {
        let x = gaussian_blobs(2, 5, 3, 4.0, 1).0;
        assert!(matches!(tsne(&x, &TsneConfig::default()), Err(Error::Config(_))));
        let cfg = TsneConfig {
            perplexity: 2.0,
            iterations: 100,
            ..Default::default()
        };
        assert!(matches!(tsne(&x, &cfg), Err(Error::Config(_))));
        let tiny = FeatureMatrix::new(3, 1, vec![0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(tsne(&tiny, &cfg), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn rejects_non_finite_features() {
        assert!(matches!(
            FeatureMatrix::new(2, 1, vec![0.0, f64::NAN]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn silhouette_of_separated_pairs() {
        let pts = [[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]];
        let s = silhouette(&pts, &[0, 0, 1, 1]);
        assert!(s > 0.85);
        let mixed = silhouette(&pts, &[0, 1, 0, 1]);
        assert!(mixed < 0.0);
    }
}
