//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

use std::path::Path;
use std::time::{Duration, Instant};

use microdoppler::body::{RcsModel, SegmentKind};
use microdoppler::cohort::{Cohort, Gender, SubjectProfile};
use microdoppler::dataset::{
    generate_dataset, mix_seed, simulate_record, split_dataset, subject_style, Condition, DatasetConfig,
    DatasetManifest, SplitPolicy,
};
use microdoppler::gait::{gait_parameters, simulate_trajectories, GaitStyle, ScattererTrack, SimulationSetup};
use microdoppler::knn::{knn_baseline, FeatureSource};
use microdoppler::radar::{apply_snr, measured_snr_db, synthesize, RadarConfig};
use microdoppler::render::{render_image, RenderConfig};
use microdoppler::segment::{boundary_rms_error, segment, slice_half_gaits, SegmentConfig, SwingSide};
use microdoppler::spectrogram::{spectrogram, stft_samples, StftConfig};
use microdoppler::tsne::{
    input_affinities, kl_divergence, kl_gradient, low_dim_affinities, silhouette, tsne, FeatureMatrix, TsneConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex64;
use sha2::{Digest, Sha256};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn reference_subject(bmi: f64) -> SubjectProfile {
    SubjectProfile::new(0, 1.8, bmi * 1.8 * 1.8, Gender::Male).unwrap()
}

fn velocity_calibration() -> Outcome {
    let t0 = Instant::now();
    let p = reference_subject(24.0);
    let params = gait_parameters(&p, 1.6).unwrap();
    let setup = SimulationSetup {
        duration_s: 2.0,
        ..Default::default()
    };
    let mut traj = simulate_trajectories(&p, &params, &setup).unwrap();
    let n = traj.len();
    traj.tracks = vec![ScattererTrack {
        kind: SegmentKind::Torso,
        range_m: (0..n).map(|i| 3.0 + 2.0 * i as f64 / traj.sample_rate_hz).collect(),
        radial_velocity: vec![2.0; n],
    }];
    let cfg = RadarConfig::default();
    let sig = synthesize(&traj, &p.segments(&RcsModel::default()), &cfg).unwrap();
    let spec = spectrogram(&sig, &StftConfig::default(), &cfg).unwrap();
    let worst = (0..spec.n_frames)
        .map(|m| {
            let row = spec.frame(m);
            let k = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
            (spec.velocity_axis[k] + 2.0).abs()
        })
        .fold(0.0, f64::max);
    let el = t0.elapsed();
    outcome(
        worst <= 0.024 && el < Duration::from_secs(1),
        format!("max |v_peak + 2.00| = {worst:.4} m/s over {} frames, {:.3} s", spec.n_frames, secs(el)),
    )
}

fn table_arithmetic() -> Outcome {
    let cfg = RadarConfig::default();
    let vmax = cfg.max_velocity();
    let bin = cfg.velocity_resolution(StftConfig::default().window_size);
    outcome(
        (vmax - 6.0).abs() < 5e-3 && (bin - 0.0234).abs() <= 1e-4,
        format!("max velocity {vmax:.4} m/s (6.0 to two significant figures), bin width {bin:.5} m/s"),
    )
}

fn range_snr() -> Outcome {
    let cfg = RadarConfig::default();
    let clean = RadarConfig {
        reference_snr_db: None,
        ..cfg
    };
    let p = reference_subject(24.0);
    let params = gait_parameters(&p, 1.6).unwrap();
    let traj = simulate_trajectories(&p, &params, &SimulationSetup::default()).unwrap();
    let sig = synthesize(&traj, &p.segments(&RcsModel::default()), &cfg).unwrap();
    let snr = |r: f64| {
        let s = apply_snr(&sig, r, &clean, 0).unwrap();
        let n = apply_snr(&sig, r, &cfg, 11).unwrap();
        measured_snr_db(&s.samples, &n.samples)
    };
    let (a, b) = (snr(3.0), snr(10.0));
    outcome(
        ((a - b) - 20.9).abs() <= 0.5,
        format!("{a:.2} dB at 3 m, {b:.2} dB at 10 m, drop {:.2} dB over {} s", a - b, traj.duration_s),
    )
}

fn segmentation() -> Outcome {
    let cohort = Cohort::standard(7);
    let cfg = DatasetConfig::default();
    let cond = Condition::high_snr();
    let mut worst_rms = 0.0f64;
    let mut worst_time = Duration::ZERO;
    let mut count_ok = true;
    let mut reference_count = 0;
    let mut notes = Vec::new();
    // the reference stature walks half gaits of 0.5 s at 1.6 m/s
    let mut subjects: Vec<SubjectProfile> = vec![reference_subject(24.0)];
    subjects.extend(cohort.subjects.iter().cloned());
    for (i, p) in subjects.iter().enumerate() {
        let t0 = Instant::now();
        let style = if i == 0 { GaitStyle::neutral() } else { subject_style(&cohort, p.id, cfg.style_spread) };
        let rec = simulate_record(p, &cohort.rcs, &cond, &cfg, &style, 0.37, mix_seed(1, &[u64::from(p.id)])).unwrap();
        let seg = segment(&rec.spectrogram, &cfg.segment).unwrap();
        let slices = slice_half_gaits(&seg, Some(&rec.clock));
        let el = t0.elapsed();
        let rms = boundary_rms_error(&rec.spectrogram, &seg, &rec.clock);
        let expected = cond.duration_s / (rec.clock.cycle_duration / 2.0);
        if i == 0 {
            reference_count = slices.len();
            count_ok &= (slices.len() as i64 - 360).abs() <= 2;
        } else if (slices.len() as f64 - expected).abs() > 2.0 + 1.0 {
            count_ok = false;
            notes.push(format!("subject {} {} vs {expected:.1}", p.id, slices.len()));
        }
        worst_rms = worst_rms.max(rms);
        worst_time = worst_time.max(el);
    }
    outcome(
        count_ok && worst_rms <= 2.0 && worst_time < Duration::from_secs(10),
        format!(
            "{reference_count} slices for the 1.8 m walker over 180 s; cohort slice counts track 180 s / period{}; worst boundary RMS {worst_rms:.2} frames; slowest subject {:.2} s",
            if notes.is_empty() { String::new() } else { format!(" except {}", notes.join(", ")) },
            secs(worst_time)
        ),
    )
}

fn tree_digest(root: &Path, m: &DatasetManifest) -> String {
    let mut h = Sha256::new();
    h.update(m.to_json().unwrap().as_bytes());
    for r in &m.records {
        h.update(std::fs::read(root.join(&r.path)).unwrap());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn dataset_scale() -> Outcome {
    let cohort = Cohort::standard(7);
    let cfg = DatasetConfig::preset("paper-highsnr").unwrap();
    let mut digests = Vec::new();
    let mut count = 0;
    let mut took = Duration::ZERO;
    let mut valid = true;
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let t0 = Instant::now();
        let m = generate_dataset(&cohort, &cfg, 7, "paper-highsnr-seed7", dir.path()).unwrap();
        took = took.max(t0.elapsed());
        valid &= m.validate(dir.path()).is_ok();
        count = m.records.len();
        digests.push(tree_digest(dir.path(), &m));
    }
    let same = digests[0] == digests[1];
    outcome(
        (count as i64 - 7920).abs() <= 110 && took < Duration::from_secs(900) && valid && same,
        format!(
            "{count} images, manifest valid: {valid}, {:.1} s per run, identical digests across two runs: {same}",
            secs(took)
        ),
    )
}

fn gaussian(n: usize, d: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    (0..n * d).map(|_| normal.sample(&mut rng)).collect()
}

fn tsne_correctness() -> Outcome {
    // gradient vs central differences, n = 10, d = 5
    let x = FeatureMatrix::new(10, 5, gaussian(10, 5, 1)).unwrap();
    let p = input_affinities(&x, 3.0).unwrap().p;
    let mut y: Vec<[f64; 2]> = gaussian(10, 2, 2).chunks(2).map(|c| [c[0], c[1]]).collect();
    let (_, g) = kl_gradient(&p, &y, 1.0);
    let h = 1e-5;
    let mut grad_err = 0.0f64;
    for i in 0..10 {
        for c in 0..2 {
            let o = y[i][c];
            y[i][c] = o + h;
            let up = kl_divergence(&p, &low_dim_affinities(&y));
            y[i][c] = o - h;
            let dn = kl_divergence(&p, &low_dim_affinities(&y));
            y[i][c] = o;
            let fd = (up - dn) / (2.0 * h);
            grad_err = grad_err.max((g[i][c] - fd).abs() / g[i][c].abs().max(fd.abs()).max(1e-8));
        }
    }

    // three blobs, 20 points each, d = 50, centers 10 sigma apart
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for c in 0..3 {
        for _ in 0..20 {
            for j in 0..50 {
                data.push(if j == c { 10.0 / 2f64.sqrt() } else { 0.0 } + unit.sample(&mut rng));
            }
            labels.push(c);
        }
    }
    let emb = tsne(
        &FeatureMatrix::new(60, 50, data).unwrap(),
        &TsneConfig {
            perplexity: 10.0,
            ..Default::default()
        },
    )
    .unwrap();
    let sil = silhouette(&emb.coords(), &labels);

    // perplexity calibration by direct entropy evaluation
    let (n, d) = (100, 8);
    let raw = gaussian(n, d, 9);
    let a = input_affinities(&FeatureMatrix::new(n, d, raw.clone()).unwrap(), 20.0).unwrap();
    let mut perp_err = 0.0f64;
    for i in 0..n {
        let w: Vec<f64> = (0..n)
            .map(|j| {
                if j == i {
                    return 0.0;
                }
                let d2: f64 = (0..d).map(|c| (raw[i * d + c] - raw[j * d + c]).powi(2)).sum();
                (-a.beta[i] * d2).exp()
            })
            .collect();
        let z: f64 = w.iter().sum();
        let h2: f64 = w.iter().filter(|&&v| v > 0.0).map(|&v| -(v / z) * (v / z).log2()).sum();
        perp_err = perp_err.max((2f64.powf(h2) - 20.0).abs());
    }
    outcome(
        grad_err < 1e-4 && sil > 0.6 && perp_err < 1e-4,
        format!("gradient max rel err {grad_err:.2e}, blob silhouette {sil:.3}, perplexity err {perp_err:.2e}"),
    )
}

fn separability() -> Outcome {
    let cohort = Cohort::standard(7);
    let mut acc = Vec::new();
    for preset in ["paper-highsnr", "paper-mixed"] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = DatasetConfig::preset(preset).unwrap().with_duration(60.0);
        let m = generate_dataset(&cohort, &cfg, 1, preset, dir.path()).unwrap();
        let m = split_dataset(&m, SplitPolicy::FreshSession, 2, dir.path()).unwrap();
        acc.push(knn_baseline(&m, dir.path(), 5, &FeatureSource::default()).unwrap().accuracy);
    }
    outcome(
        acc[0] >= 0.80 && acc[1] < acc[0],
        format!(
            "k-NN (k = 5) on a fresh test session, 60 s records: high SNR {:.4}, mixed SNR {:.4}, chance {:.4}",
            acc[0],
            acc[1],
            1.0 / 22.0
        ),
    )
}

fn invariants() -> Outcome {
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };

    // linearity of the STFT
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sig = |n: usize| -> Vec<Complex64> {
        (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    };
    let (x, y) = (sig(2048), sig(2048));
    let (a, b) = (Complex64::new(0.7, -1.2), Complex64::new(-2.0, 0.4));
    let z: Vec<Complex64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
    let cfg = StftConfig::default();
    let (gx, gy, gz) = (
        stft_samples(&x, 2000.0, &cfg).unwrap(),
        stft_samples(&y, 2000.0, &cfg).unwrap(),
        stft_samples(&z, 2000.0, &cfg).unwrap(),
    );
    let lin = (0..gz.n_frames()).all(|m| {
        (0..512).all(|k| {
            let e = a * gx.frames[m][k] + b * gy.frames[m][k];
            (gz.frames[m][k] - e).norm() <= 1e-9 * e.norm().max(1.0)
        })
    });
    check("stft linearity", lin);

    // superposition of scatterer returns
    let p = reference_subject(24.0);
    let params = gait_parameters(&p, 1.6).unwrap();
    let traj = simulate_trajectories(&p, &params, &SimulationSetup { duration_s: 1.0, ..Default::default() }).unwrap();
    let rcfg = RadarConfig::default();
    let segs = p.segments(&RcsModel::default());
    let full = synthesize(&traj, &segs, &rcfg).unwrap();
    let mut parts = vec![Complex64::new(0.0, 0.0); full.len()];
    for track in &traj.tracks {
        let mut one = traj.clone();
        one.tracks = vec![track.clone()];
        for (acc, s) in parts.iter_mut().zip(synthesize(&one, &segs, &rcfg).unwrap().samples) {
            *acc += s;
        }
    }
    check(
        "superposition",
        parts.iter().zip(&full.samples).all(|(u, v)| (u - v).norm() <= 1e-12 * v.norm().max(1.0)),
    );

    // half-cycle mirror symmetry
    let shifted = simulate_trajectories(
        &p,
        &params,
        &SimulationSetup {
            duration_s: 1.0,
            start_phase: 0.5,
            ..Default::default()
        },
    )
    .unwrap();
    let mirror = SegmentKind::ALL.iter().all(|&k| {
        traj.track(k)
            .range_m
            .iter()
            .zip(&shifted.track(k.mirrored()).range_m)
            .all(|(u, v)| (u - v).abs() < 1e-6)
    });
    check("mirror symmetry", mirror);

    // affinity normalization and symmetry
    let aff = input_affinities(&FeatureMatrix::new(30, 4, gaussian(30, 4, 4)).unwrap(), 5.0).unwrap();
    let total: f64 = aff.p.iter().sum();
    let sym = (0..30).all(|i| aff.p[i * 30 + i] == 0.0 && (0..30).all(|j| (aff.p[i * 30 + j] - aff.p[j * 30 + i]).abs() < 1e-12));
    check("affinity normalization", (total - 1.0).abs() < 1e-12 && sym);

    // determinism of records, renders and embeddings
    let cohort = Cohort::standard(2);
    let dcfg = DatasetConfig::default();
    let cond = Condition::high_snr().with_duration(5.0);
    let style = subject_style(&cohort, 4, dcfg.style_spread);
    let s4 = cohort.subject(4).unwrap();
    let r1 = simulate_record(s4, &cohort.rcs, &cond, &dcfg, &style, 0.2, 99).unwrap();
    let r2 = simulate_record(s4, &cohort.rcs, &cond, &dcfg, &style, 0.2, 99).unwrap();
    check("record determinism", r1.signal == r2.signal && r1.spectrogram == r2.spectrogram);
    let seg = segment(&r1.spectrogram, &SegmentConfig::default()).unwrap();
    let spans = slice_half_gaits(&seg, Some(&r1.clock));
    let i1 = render_image(&r1.spectrogram, spans[1].span, &RenderConfig::default()).unwrap();
    let i2 = render_image(&r2.spectrogram, spans[1].span, &RenderConfig::default()).unwrap();
    check("render determinism", i1 == i2);
    check("alternation", spans.windows(2).all(|w| w[1].side == w[0].side.opposite() && w[0].side != SwingSide::Unknown));
    let fx = FeatureMatrix::new(25, 3, gaussian(25, 3, 8)).unwrap();
    let tc = TsneConfig {
        perplexity: 5.0,
        iterations: 250,
        ..Default::default()
    };
    check("embedding determinism", tsne(&fx, &tc).unwrap().coords() == tsne(&fx, &tc).unwrap().coords());

    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "linearity, superposition, mirror symmetry, normalization, determinism and alternation spot checks hold; full suites are the other test targets".to_string()
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("velocity-axis calibration", velocity_calibration),
        ("velocity table arithmetic", table_arithmetic),
        ("range-SNR law", range_snr),
        ("half-gait segmentation", segmentation),
        ("dataset scale and determinism", dataset_scale),
        ("t-SNE correctness", tsne_correctness),
        ("identity separability", separability),
        ("module invariants", invariants),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|s| name.contains(s.as_str())) {
            continue;
        }
        let o = f();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
