//! CW radar slow-time baseband synthesis and range-dependent noise.
//!
//! Doppler sign convention, used throughout the crate: a scatterer whose range
//! increases (receding) produces a negative Doppler frequency, because the
//! return phase is `-4 pi R / lambda`.

use std::f64::consts::PI;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::body::{BodySegmentSet, RcsModel};
use crate::cohort::SubjectProfile;
use crate::error::{Error, Result};
use crate::gait::TrajectorySet;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadarConfig {
    pub carrier_frequency_hz: f64,
    pub slow_time_rate_hz: f64,
    pub reference_range_m: f64,
    /// SNR of the reference subject at the reference range; `None` disables
    /// noise.
    pub reference_snr_db: Option<f64>,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            carrier_frequency_hz: 25e9,
            slow_time_rate_hz: 2000.0,
            reference_range_m: 3.0,
            reference_snr_db: Some(30.0),
        }
    }
}

impl RadarConfig {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency_hz
    }

    /// Radial speed mapped to a Doppler shift of `f` Hz.
    pub fn doppler_to_velocity(&self, f: f64) -> f64 {
        f * self.wavelength() / 2.0
    }

    /// Half-width of the unambiguous velocity span.
    pub fn max_velocity(&self) -> f64 {
        self.doppler_to_velocity(self.slow_time_rate_hz / 2.0)
    }

    pub fn velocity_resolution(&self, window_size: usize) -> f64 {
        self.doppler_to_velocity(self.slow_time_rate_hz / window_size as f64)
    }

    /// Amplitude factor giving the reference subject unit nominal power at
    /// the reference range (incoherent sum over segments).
    pub fn amplitude_scale(&self) -> f64 {
        let reference = SubjectProfile::reference().segments(&RcsModel::default());
        self.reference_range_m.powi(2) / reference.total_rcs().sqrt()
    }

    pub fn noise_power(&self) -> Option<f64> {
        self.reference_snr_db.map(|snr| 10f64.powf(-snr / 10.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
    /// `None` for a noiseless record.
    pub snr_db: Option<f64>,
    pub subject_id: Option<u32>,
    pub range_m: f64,
    pub seed: Option<u64>,
}

impl BasebandSignal {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }

    pub fn with_subject(mut self, id: u32) -> Self {
        self.subject_id = Some(id);
        self
    }
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|c| c.norm_sqr()).sum::<f64>() / x.len() as f64
}

/// SNR of `noisy` given its noiseless counterpart, in dB.
pub fn measured_snr_db(clean: &[Complex64], noisy: &[Complex64]) -> f64 {
    let noise: f64 = clean
        .iter()
        .zip(noisy)
        .map(|(c, n)| (n - c).norm_sqr())
        .sum::<f64>()
        / clean.len() as f64;
    10.0 * (mean_power(clean) / noise).log10()
}

/// Point-scatterer superposition of all segment returns.
pub fn synthesize(
    trajectories: &TrajectorySet,
    segments: &BodySegmentSet,
    cfg: &RadarConfig,
) -> Result<BasebandSignal> {
    if (trajectories.sample_rate_hz - cfg.slow_time_rate_hz).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "trajectory sample rate {} Hz does not match slow-time rate {} Hz",
            trajectories.sample_rate_hz, cfg.slow_time_rate_hz
        )));
    }
    let k = 4.0 * PI / cfg.wavelength();
    let scale = cfg.amplitude_scale();
    let mut samples = vec![Complex64::new(0.0, 0.0); trajectories.len()];
    for track in &trajectories.tracks {
        let amp = segments.get(track.kind).rcs_m2.sqrt() * scale;
        for (s, &r) in samples.iter_mut().zip(&track.range_m) {
            *s += Complex64::from_polar(amp / (r * r), -k * r);
        }
    }
    Ok(BasebandSignal {
        samples,
        sample_rate_hz: trajectories.sample_rate_hz,
        snr_db: None,
        subject_id: None,
        range_m: trajectories.radar_pose.standoff_m,
        seed: None,
    })
}

/// Moves the record to `target_range` (R⁻⁴ power law relative to the range it
/// was simulated at) and adds complex white Gaussian noise whose power is
/// fixed by the reference SNR.
pub fn apply_snr(
    signal: &BasebandSignal,
    target_range: f64,
    cfg: &RadarConfig,
    seed: u64,
) -> Result<BasebandSignal> {
    if !(target_range > 0.0) {
        return Err(Error::Domain(format!(
            "target range must be positive, got {target_range}"
        )));
    }
    if signal.snr_db.is_some() {
        return Err(Error::Config("signal already contains noise".into()));
    }
    let gain = (signal.range_m / target_range).powi(2);
    let mut samples: Vec<Complex64> = signal.samples.iter().map(|s| s * gain).collect();
    let snr_db = match cfg.noise_power() {
        None => None,
        Some(n0) => {
            let snr = 10.0 * (mean_power(&samples) / n0).log10();
            let normal = Normal::new(0.0, (n0 / 2.0).sqrt()).expect("finite noise power");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for s in &mut samples {
                let re = normal.sample(&mut rng);
                let im = normal.sample(&mut rng);
                *s += Complex64::new(re, im);
            }
            Some(snr)
        }
    };
    Ok(BasebandSignal {
        samples,
        sample_rate_hz: signal.sample_rate_hz,
        snr_db,
        subject_id: signal.subject_id,
        range_m: target_range,
        seed: snr_db.map(|_| seed),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqSidecar {
    pub format: String,
    pub n_samples: usize,
    pub sample_rate_hz: f64,
    pub seed: Option<u64>,
    pub subject_id: Option<u32>,
    pub range_m: f64,
    pub snr_db: Option<f64>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Little-endian interleaved f32 I/Q plus a `<path>.json` sidecar.
pub fn write_iq(signal: &BasebandSignal, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
    let mut w = BufWriter::new(f);
    for s in &signal.samples {
        w.write_all(&(s.re as f32).to_le_bytes())?;
        w.write_all(&(s.im as f32).to_le_bytes())?;
    }
    w.flush()?;
    let meta = IqSidecar {
        format: "cf32_le".into(),
        n_samples: signal.len(),
        sample_rate_hz: signal.sample_rate_hz,
        seed: signal.seed,
        subject_id: signal.subject_id,
        range_m: signal.range_m,
        snr_db: signal.snr_db,
    };
    let side = sidecar_path(path);
    std::fs::write(&side, serde_json::to_string_pretty(&meta)?).map_err(|e| Error::file(&side, e))
}

pub fn read_iq(path: &Path) -> Result<BasebandSignal> {
    let side = sidecar_path(path);
    let meta: IqSidecar = serde_json::from_str(
        &std::fs::read_to_string(&side).map_err(|e| Error::file(&side, e))?,
    )?;
    if meta.format != "cf32_le" {
        return Err(Error::Config(format!("unsupported I/Q format '{}'", meta.format)));
    }
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .map_err(|e| Error::file(path, e))?
        .read_to_end(&mut bytes)?;
    if bytes.len() != meta.n_samples * 8 {
        return Err(Error::InsufficientData(format!(
            "{}: expected {} samples, found {} bytes",
            path.display(),
            meta.n_samples,
            bytes.len()
        )));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re.into(), im.into())
        })
        .collect();
    Ok(BasebandSignal {
        samples,
        sample_rate_hz: meta.sample_rate_hz,
        snr_db: meta.snr_db,
        subject_id: meta.subject_id,
        range_m: meta.range_m,
        seed: meta.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{Segment, SegmentKind};
    use crate::gait::{GaitClock, GaitParameters, RadarPose, ScattererTrack, WalkMode};
    use approx::assert_relative_eq;
    use rustfft::FftPlanner;

    fn params() -> GaitParameters {
        GaitParameters {
            walking_speed: 1.0,
            thigh_height: 1.0,
            relative_velocity: 1.0,
            cycle_duration: 1.0,
            cycle_length: 1.0,
            stance_fraction: 0.6,
            swing_fraction: 0.4,
            cadence: 2.0,
        }
    }

    fn trajectories(ranges: Vec<Vec<f64>>, fs: f64) -> TrajectorySet {
        let n = ranges[0].len();
        TrajectorySet {
            sample_rate_hz: fs,
            duration_s: n as f64 / fs,
            mode: WalkMode::Treadmill,
            params: params(),
            radar_pose: RadarPose::default(),
            clock: GaitClock {
                cycle_duration: 1.0,
                swing_fraction: 0.4,
                start_phase: 0.0,
            },
            tracks: ranges
                .into_iter()
                .zip(SegmentKind::ALL)
                .map(|(r, kind)| ScattererTrack {
                    kind,
                    radial_velocity: vec![0.0; r.len()],
                    range_m: r,
                })
                .collect(),
        }
    }

    fn unit_segments() -> BodySegmentSet {
        BodySegmentSet {
            height_m: 1.8,
            segments: SegmentKind::ALL
                .iter()
                .map(|&kind| Segment {
                    kind,
                    length_m: 0.1,
                    rcs_m2: 1.0,
                    attachment: [0.0; 3],
                })
                .collect(),
        }
    }

    #[test]
    fn default_wavelength_and_velocity_span() {
        let cfg = RadarConfig::default();
        assert_relative_eq!(cfg.wavelength(), 0.011_991_698, epsilon = 1e-8);
        assert!((cfg.max_velocity() - 6.0).abs() < 0.005);
        assert!((cfg.velocity_resolution(512) - 0.0234).abs() < 1e-4);
    }

    #[test]
    fn static_scatterer_is_constant() {
        let t = trajectories(vec![vec![3.0; 500]], 2000.0);
        let s = synthesize(&t, &unit_segments(), &RadarConfig::default()).unwrap();
        for x in &s.samples {
            assert!((x - s.samples[0]).norm() < 1e-15);
        }
    }

    #[test]
    fn receding_scatterer_has_negative_doppler() {
        let fs = 2000.0;
        let n = 4000;
        let r: Vec<f64> = (0..n).map(|i| 3.0 + 2.0 * i as f64 / fs).collect();
        let cfg = RadarConfig::default();
        let s = synthesize(&trajectories(vec![r], fs), &unit_segments(), &cfg).unwrap();
        // divide out the 1/R^2 envelope, then locate the FFT peak
        let mut buf: Vec<Complex64> = s.samples.iter().map(|x| x / x.norm()).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let k = (0..n).max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm())).unwrap();
        let f = if k >= n / 2 { k as f64 - n as f64 } else { k as f64 } * fs / n as f64;
        let expected = -2.0 * 2.0 / cfg.wavelength();
        assert!((expected + 333.56).abs() < 0.01);
        assert!((f - expected).abs() <= fs / n as f64, "{f} vs {expected}");
    }

    #[test]
    fn superposition_is_exact() {
        let fs = 2000.0;
        let a: Vec<f64> = (0..300).map(|i| 3.0 + 0.001 * i as f64).collect();
        let b: Vec<f64> = (0..300).map(|i| 3.2 - 0.0007 * i as f64).collect();
        let cfg = RadarConfig::default();
        let seg = unit_segments();
        let both = synthesize(&trajectories(vec![a.clone(), b.clone()], fs), &seg, &cfg).unwrap();
        let sa = synthesize(&trajectories(vec![a], fs), &seg, &cfg).unwrap();
        // the second track is the Head, also unit RCS
        let mut tb = trajectories(vec![vec![0.0; 300], b], fs);
        tb.tracks.remove(0);
        let sb = synthesize(&tb, &seg, &cfg).unwrap();
        for i in 0..300 {
            assert_eq!(both.samples[i], sa.samples[i] + sb.samples[i]);
        }
    }

    #[test]
    fn mismatched_rate_is_config_error() {
        let t = trajectories(vec![vec![3.0; 10]], 1000.0);
        assert!(matches!(
            synthesize(&t, &unit_segments(), &RadarConfig::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn noiseless_identity() {
        let t = trajectories(vec![(0..100).map(|i| 3.0 + 0.01 * i as f64).collect()], 2000.0);
        let cfg = RadarConfig {
            reference_snr_db: None,
            ..Default::default()
        };
        let s = synthesize(&t, &unit_segments(), &cfg).unwrap();
        let out = apply_snr(&s, 3.0, &cfg, 1).unwrap();
        assert_eq!(out.samples, s.samples);
        assert_eq!(out.snr_db, None);
    }

    #[test]
    fn rejects_bad_range_and_double_noise() {
        let t = trajectories(vec![vec![3.0; 100]], 2000.0);
        let cfg = RadarConfig::default();
        let s = synthesize(&t, &unit_segments(), &cfg).unwrap();
        assert!(matches!(apply_snr(&s, 0.0, &cfg, 1), Err(Error::Domain(_))));
        let noisy = apply_snr(&s, 3.0, &cfg, 1).unwrap();
        assert!(apply_snr(&noisy, 3.0, &cfg, 1).is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let t = trajectories(vec![vec![3.0; 1000]], 2000.0);
        let cfg = RadarConfig::default();
        let s = synthesize(&t, &unit_segments(), &cfg).unwrap();
        let a = apply_snr(&s, 10.0, &cfg, 5).unwrap();
        let b = apply_snr(&s, 10.0, &cfg, 5).unwrap();
        let c = apply_snr(&s, 10.0, &cfg, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn iq_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.iq");
        let t = trajectories(vec![(0..64).map(|i| 3.0 + 0.003 * i as f64).collect()], 2000.0);
        let cfg = RadarConfig::default();
        let s = apply_snr(&synthesize(&t, &unit_segments(), &cfg).unwrap(), 3.0, &cfg, 9)
            .unwrap()
            .with_subject(4);
        write_iq(&s, &path).unwrap();
        let back = read_iq(&path).unwrap();
        assert_eq!(back.subject_id, Some(4));
        assert_eq!(back.seed, Some(9));
        assert_eq!(back.snr_db, s.snr_db);
        for (a, b) in s.samples.iter().zip(&back.samples) {
            assert!((a - b).norm() < 1e-5 * (1.0 + a.norm()));
        }
    }
}
