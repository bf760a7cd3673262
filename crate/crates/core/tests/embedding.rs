use approx::assert_relative_eq;
use microdoppler::error::Error;
use microdoppler::tsne::{input_affinities, kl_divergence, kl_gradient, low_dim_affinities, tsne, FeatureMatrix, TsneConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn gaussian(n: usize, d: usize, std: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, std).unwrap();
    (0..n * d).map(|_| normal.sample(&mut rng)).collect()
}

fn as_points(v: &[f64]) -> Vec<[f64; 2]> {
    v.chunks(2).map(|c| [c[0], c[1]]).collect()
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    for seed in 0..5 {
        let x = FeatureMatrix::new(10, 5, gaussian(10, 5, 1.0, seed)).unwrap();
        let p = input_affinities(&x, 3.0).unwrap().p;
        let mut y = as_points(&gaussian(10, 2, 1.0, 100 + seed));
        let (_, grad) = kl_gradient(&p, &y, 1.0);
        let h = 1e-5;
        let mut worst = 0.0f64;
        for i in 0..10 {
            for c in 0..2 {
                let orig = y[i][c];
                y[i][c] = orig + h;
                let up = kl_divergence(&p, &low_dim_affinities(&y));
                y[i][c] = orig - h;
                let down = kl_divergence(&p, &low_dim_affinities(&y));
                y[i][c] = orig;
                let fd = (up - down) / (2.0 * h);
                let g = grad[i][c];
                let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-8);
                worst = worst.max(rel);
            }
        }
        assert!(worst < 1e-4, "seed {seed}: {worst}");
    }
}

#[test]
fn kl_reported_with_gradient_matches_direct_kl() {
    let x = FeatureMatrix::new(12, 4, gaussian(12, 4, 1.0, 8)).unwrap();
    let p = input_affinities(&x, 4.0).unwrap().p;
    let y = as_points(&gaussian(12, 2, 0.5, 9));
    let (kl, _) = kl_gradient(&p, &y, 1.0);
    assert_relative_eq!(kl, kl_divergence(&p, &low_dim_affinities(&y)), max_relative = 1e-12);
}

#[test]
fn row_perplexity_is_calibrated() {
    let (n, d) = (80, 6);
    let data = gaussian(n, d, 1.0, 21);
    let x = FeatureMatrix::new(n, d, data.clone()).unwrap();
    for perp in [5.0, 15.0, 25.0] {
        let a = input_affinities(&x, perp).unwrap();
        for i in 0..n {
            // direct evaluation of the conditional row and its base-2 entropy
            let d2: Vec<f64> = (0..n)
                .map(|j| (0..d).map(|c| (data[i * d + c] - data[j * d + c]).powi(2)).sum())
                .collect();
            let w: Vec<f64> = (0..n).map(|j| if j == i { 0.0 } else { (-a.beta[i] * d2[j]).exp() }).collect();
            let z: f64 = w.iter().sum();
            let h2: f64 = w.iter().filter(|&&v| v > 0.0).map(|&v| -(v / z) * (v / z).log2()).sum();
            let got = 2f64.powf(h2);
            assert!((got - perp).abs() < 1e-4, "perp {perp} row {i}: {got}");
        }
    }
}

#[test]
fn kl_examples() {
    let half = [0.5, 0.5];
    assert_eq!(kl_divergence(&half, &half), 0.0);
    let expected = 0.5 * (0.5f64 / 0.9).ln() + 0.5 * (0.5f64 / 0.1).ln();
    assert_relative_eq!(kl_divergence(&half, &[0.9, 0.1]), expected, max_relative = 1e-12);
    assert_relative_eq!(expected, 0.5108, epsilon = 1e-4);
}

fn silhouette_oracle(y: &[[f64; 2]], labels: &[usize]) -> f64 {
    let n = y.len();
    let dist = |a: usize, b: usize| ((y[a][0] - y[b][0]).powi(2) + (y[a][1] - y[b][1]).powi(2)).sqrt();
    let mut total = 0.0;
    for i in 0..n {
        let mean_to = |c: usize| {
            let js: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == c).collect();
            js.iter().map(|&j| dist(i, j)).sum::<f64>() / js.len() as f64
        };
        let a = mean_to(labels[i]);
        let b = (0..3).filter(|&c| c != labels[i]).map(mean_to).fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / n as f64
}

#[test]
fn separated_blobs_embed_as_clusters() {
    let (per, d) = (20, 50);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for c in 0..3 {
        for _ in 0..per {
            for j in 0..d {
                // centers on distinct axes, 10 sigma apart pairwise
                let center = if j == c { 10.0 / 2f64.sqrt() } else { 0.0 };
                data.push(center + unit.sample(&mut rng));
            }
            labels.push(c);
        }
    }
    let x = FeatureMatrix::new(3 * per, d, data).unwrap();
    let cfg = TsneConfig {
        perplexity: 10.0,
        ..Default::default()
    };
    let emb = tsne(&x, &cfg).unwrap();
    let s = silhouette_oracle(&emb.coords(), &labels);
    assert!(s > 0.6, "silhouette {s}");
}

#[test]
fn embedding_is_deterministic_and_translation_invariant() {
    let (n, d) = (40, 8);
    // dyadic values keep the translated coordinates and distances exact
    let data: Vec<f64> = gaussian(n, d, 1.0, 3).iter().map(|v| (v * 1024.0).round() / 1024.0).collect();
    let cfg = TsneConfig {
        perplexity: 8.0,
        iterations: 300,
        seed: 77,
        ..Default::default()
    };
    let x = FeatureMatrix::new(n, d, data.clone()).unwrap();
    let a = tsne(&x, &cfg).unwrap();
    let b = tsne(&x, &cfg).unwrap();
    assert_eq!(a.coords(), b.coords());
    assert_eq!(a.kl_trace, b.kl_trace);

    let shifted: Vec<f64> = data.iter().enumerate().map(|(i, v)| v + 3.0 + (i % d) as f64).collect();
    let c = tsne(&FeatureMatrix::new(n, d, shifted).unwrap(), &cfg).unwrap();
    assert_eq!(a.affinities.p, c.affinities.p);
    assert_eq!(a.kl_trace, c.kl_trace);
}

#[test]
fn kl_decreases_after_exaggeration() {
    let x = FeatureMatrix::new(50, 10, gaussian(50, 10, 1.0, 12)).unwrap();
    let cfg = TsneConfig {
        perplexity: 12.0,
        iterations: 500,
        ..Default::default()
    };
    let emb = tsne(&x, &cfg).unwrap();
    assert_eq!(emb.kl_trace.len(), 500);
    let start = emb.kl_trace[cfg.exaggeration_iterations];
    let end = *emb.kl_trace.last().unwrap();
    assert!(end < start, "{start} -> {end}");
}

#[test]
fn invalid_configurations_rejected() {
    let x = FeatureMatrix::new(30, 3, gaussian(30, 3, 1.0, 1)).unwrap();
    let bad_perp = TsneConfig {
        perplexity: 10.0,
        ..Default::default()
    };
    assert!(matches!(tsne(&x, &bad_perp), Err(Error::Config(_))));
    let few_iter = TsneConfig {
        perplexity: 5.0,
        iterations: 100,
        ..Default::default()
    };
    assert!(matches!(tsne(&x, &few_iter), Err(Error::Config(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn affinities_are_symmetric_normalized(seed in any::<u64>(), n in 5usize..40, perp in 1.5f64..4.0) {
        let x = FeatureMatrix::new(n, 3, gaussian(n, 3, 2.0, seed)).unwrap();
        let a = input_affinities(&x, perp).unwrap();
        let total: f64 = a.p.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for i in 0..n {
            prop_assert_eq!(a.p[i * n + i], 0.0);
            for j in 0..n {
                prop_assert!((a.p[i * n + j] - a.p[j * n + i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kl_is_non_negative(seed in any::<u64>(), n in 3usize..20) {
        let x = FeatureMatrix::new(n, 2, gaussian(n, 2, 1.0, seed)).unwrap();
        let p = input_affinities(&x, 2.0).unwrap().p;
        let q = low_dim_affinities(&as_points(&gaussian(n, 2, 1.0, seed ^ 1)));
        prop_assert!(kl_divergence(&p, &q) >= -1e-12);
    }
}
