//! Short-time Fourier transform and log-power micro-Doppler maps.
//!
//! Each STFT column is the DFT of one windowed frame with the frame's first
//! sample as phase origin, so delaying the input by one hop shifts the grid by
//! exactly one column.

use std::f64::consts::PI;
use std::io::{BufWriter, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radar::{sidecar_path, BasebandSignal, RadarConfig};

/// Floor added to `|Y|^2` before the logarithm, relative to the grid peak.
pub const POWER_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Hann,
    Rectangular,
}

impl WindowKind {
    /// Periodic window of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            WindowKind::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
            WindowKind::Rectangular => vec![1.0; n],
        }
    }

    /// Highest sidelobe relative to the main lobe, in dB.
    pub fn peak_sidelobe_db(self) -> f64 {
        match self {
            WindowKind::Hann => -31.5,
            WindowKind::Rectangular => -13.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StftConfig {
    pub window_size: usize,
    pub overlap: f64,
    pub window: WindowKind,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            window_size: 512,
            overlap: 0.75,
            window: WindowKind::Hann,
        }
    }
}

impl StftConfig {
    pub fn hop(&self) -> usize {
        ((self.window_size as f64 * (1.0 - self.overlap)).round() as usize).max(1)
    }

    pub fn frame_count(&self, n_samples: usize) -> usize {
        if n_samples < self.window_size {
            0
        } else {
            (n_samples - self.window_size) / self.hop() + 1
        }
    }

    fn validate(&self) -> Result<()> {
        if self.window_size < 2 {
            return Err(Error::Config(format!(
                "window size must be at least 2, got {}",
                self.window_size
            )));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::Config(format!(
                "overlap must lie in [0, 1), got {}",
                self.overlap
            )));
        }
        Ok(())
    }
}

/// Complex STFT in natural FFT bin order, one column per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct StftGrid {
    pub frames: Vec<Vec<Complex64>>,
    pub window_size: usize,
    pub hop: usize,
    pub window: WindowKind,
    pub sample_rate_hz: f64,
}

impl StftGrid {
    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }
}

pub fn stft(signal: &BasebandSignal, cfg: &StftConfig) -> Result<StftGrid> {
    stft_samples(&signal.samples, signal.sample_rate_hz, cfg)
}

pub fn stft_samples(x: &[Complex64], sample_rate_hz: f64, cfg: &StftConfig) -> Result<StftGrid> {
    cfg.validate()?;
    let w = cfg.window_size;
    if x.len() < w {
        return Err(Error::InsufficientData(format!(
            "signal has {} samples, window needs {w}",
            x.len()
        )));
    }
    let hop = cfg.hop();
    let window = cfg.window.coefficients(w);
    let fft = FftPlanner::new().plan_fft_forward(w);
    let frames = (0..cfg.frame_count(x.len()))
        .map(|m| {
            let start = m * hop;
            let mut buf: Vec<Complex64> = x[start..start + w]
                .iter()
                .zip(&window)
                .map(|(s, c)| s * c)
                .collect();
            fft.process(&mut buf);
            buf
        })
        .collect();
    Ok(StftGrid {
        frames,
        window_size: w,
        hop,
        window: cfg.window,
        sample_rate_hz,
    })
}

/// Log-power time-velocity map. Row `m` is frame `m`; column `k` is velocity
/// bin `k` in ascending order with zero velocity at index `n_bins / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    pub values: Vec<f64>,
    pub n_frames: usize,
    pub n_bins: usize,
    /// Frame centers, seconds.
    pub time_axis: Vec<f64>,
    /// Bin velocities, m/s.
    pub velocity_axis: Vec<f64>,
    pub window_size: usize,
    pub hop: usize,
    pub window: WindowKind,
    pub sample_rate_hz: f64,
}

impl Spectrogram {
    pub fn frame(&self, m: usize) -> &[f64] {
        &self.values[m * self.n_bins..(m + 1) * self.n_bins]
    }

    pub fn value(&self, m: usize, k: usize) -> f64 {
        self.values[m * self.n_bins + k]
    }

    pub fn frame_duration(&self) -> f64 {
        self.hop as f64 / self.sample_rate_hz
    }

    /// Center time of fractional frame index `m`.
    pub fn frame_time(&self, m: f64) -> f64 {
        (m * self.hop as f64 + 0.5 * self.window_size as f64) / self.sample_rate_hz
    }

    /// Inverse of [`Spectrogram::frame_time`].
    pub fn time_to_frame(&self, t: f64) -> f64 {
        (t * self.sample_rate_hz - 0.5 * self.window_size as f64) / self.hop as f64
    }

    pub fn duration_s(&self) -> f64 {
        match (self.time_axis.first(), self.time_axis.last()) {
            (Some(a), Some(b)) => b - a + self.frame_duration(),
            _ => 0.0,
        }
    }

    pub fn peak_db(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Frames `[start, end)` as a new spectrogram.
    pub fn frames(&self, start: usize, end: usize) -> Spectrogram {
        let end = end.min(self.n_frames);
        let start = start.min(end);
        Spectrogram {
            values: self.values[start * self.n_bins..end * self.n_bins].to_vec(),
            n_frames: end - start,
            time_axis: self.time_axis[start..end].to_vec(),
            ..self.clone_header()
        }
    }

    fn clone_header(&self) -> Spectrogram {
        Spectrogram {
            values: Vec::new(),
            n_frames: 0,
            n_bins: self.n_bins,
            time_axis: Vec::new(),
            velocity_axis: self.velocity_axis.clone(),
            window_size: self.window_size,
            hop: self.hop,
            window: self.window,
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    /// Flat little-endian f32 values (frame-major) plus a `<path>.json`
    /// sidecar with the axes.
    pub fn dump(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
        let mut w = BufWriter::new(f);
        for v in &self.values {
            w.write_all(&(*v as f32).to_le_bytes())?;
        }
        w.flush()?;
        let meta = SpectrogramSidecar {
            format: "f32_le".into(),
            n_frames: self.n_frames,
            n_bins: self.n_bins,
            time_axis: self.time_axis.clone(),
            velocity_axis: self.velocity_axis.clone(),
            window_size: self.window_size,
            hop: self.hop,
            window: self.window,
            sample_rate_hz: self.sample_rate_hz,
        };
        let side = sidecar_path(path);
        std::fs::write(&side, serde_json::to_string_pretty(&meta)?)
            .map_err(|e| Error::file(&side, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramSidecar {
    pub format: String,
    pub n_frames: usize,
    pub n_bins: usize,
    pub time_axis: Vec<f64>,
    pub velocity_axis: Vec<f64>,
    pub window_size: usize,
    pub hop: usize,
    pub window: WindowKind,
    pub sample_rate_hz: f64,
}

/// Velocity of DC-centered bin `i` for an `n`-point transform.
pub fn velocity_axis(n: usize, cfg: &RadarConfig) -> Vec<f64> {
    let df = cfg.slow_time_rate_hz / n as f64;
    (0..n)
        .map(|i| cfg.doppler_to_velocity((i as f64 - (n / 2) as f64) * df))
        .collect()
}

pub fn to_micro_doppler(grid: &StftGrid, cfg: &RadarConfig) -> Spectrogram {
    let n = grid.window_size;
    let peak = grid
        .frames
        .iter()
        .flatten()
        .map(|c| c.norm_sqr())
        .fold(0.0, f64::max);
    let eps = if peak > 0.0 {
        POWER_FLOOR * peak
    } else {
        f64::MIN_POSITIVE
    };
    let half = n / 2;
    let mut values = Vec::with_capacity(grid.n_frames() * n);
    for frame in &grid.frames {
        for i in 0..n {
            let k = (i + n - half) % n;
            values.push(10.0 * (frame[k].norm_sqr() + eps).log10());
        }
    }
    let fs = grid.sample_rate_hz;
    Spectrogram {
        values,
        n_frames: grid.n_frames(),
        n_bins: n,
        time_axis: (0..grid.n_frames())
            .map(|m| (m * grid.hop) as f64 / fs + 0.5 * n as f64 / fs)
            .collect(),
        velocity_axis: velocity_axis(n, cfg),
        window_size: n,
        hop: grid.hop,
        window: grid.window,
        sample_rate_hz: fs,
    }
}

/// `stft` followed by `to_micro_doppler`.
pub fn spectrogram(signal: &BasebandSignal, stft_cfg: &StftConfig, cfg: &RadarConfig) -> Result<Spectrogram> {
    Ok(to_micro_doppler(&stft(signal, stft_cfg)?, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(n: usize, f: f64, fs: f64) -> Vec<Complex64> {
        (0..n)
            .map(|i| Complex64::from_polar(1.0, 2.0 * PI * f * i as f64 / fs))
            .collect()
    }

    #[test]
    fn frame_count_formula() {
        let cfg = StftConfig::default();
        assert_eq!(cfg.hop(), 128);
        assert_eq!(cfg.frame_count(2048), 13);
        let g = stft_samples(&vec![Complex64::new(0.0, 0.0); 2048], 2000.0, &cfg).unwrap();
        assert_eq!(g.n_frames(), 13);
        assert!(g.frames.iter().flatten().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn short_signal_is_insufficient() {
        let e = stft_samples(&vec![Complex64::new(1.0, 0.0); 511], 2000.0, &StftConfig::default());
        assert!(matches!(e, Err(Error::InsufficientData(_))));
    }

    #[test]
    fn bad_overlap_rejected() {
        let cfg = StftConfig {
            overlap: 1.0,
            ..Default::default()
        };
        assert!(matches!(
            stft_samples(&vec![Complex64::new(1.0, 0.0); 2048], 2000.0, &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn column_matches_direct_dft() {
        let fs = 2000.0;
        let x: Vec<Complex64> = (0..1024)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let cfg = StftConfig::default();
        let g = stft_samples(&x, fs, &cfg).unwrap();
        let w = WindowKind::Hann.coefficients(512);
        let m = 3;
        for k in [0, 1, 100, 511] {
            let direct: Complex64 = (0..512)
                .map(|n| {
                    x[m * 128 + n] * w[n] * Complex64::from_polar(1.0, -2.0 * PI * (k * n) as f64 / 512.0)
                })
                .sum();
            assert!((direct - g.frames[m][k]).norm() < 1e-9);
        }
    }

    #[test]
    fn bin_centered_tone_has_one_dominant_bin() {
        let fs = 2000.0;
        let k0 = 37;
        let x = tone(4096, k0 as f64 * fs / 512.0, fs);
        let g = stft_samples(&x, fs, &StftConfig::default()).unwrap();
        for frame in &g.frames {
            let peak = frame[k0].norm_sqr();
            for (k, c) in frame.iter().enumerate() {
                if k != k0 && k.abs_diff(k0) > 1 {
                    assert!(10.0 * (c.norm_sqr() / peak).log10() < WindowKind::Hann.peak_sidelobe_db());
                }
            }
        }
    }

    #[test]
    fn velocity_axis_calibration() {
        let cfg = RadarConfig::default();
        let v = velocity_axis(512, &cfg);
        assert_eq!(v[256], 0.0);
        assert!((v[0] + cfg.max_velocity()).abs() < 1e-12);
        for i in 1..512 {
            assert!((v[i] + v[512 - i]).abs() < 1e-12);
        }
        assert!((v[1] - v[0] - 0.0234).abs() < 1e-4);
    }

    #[test]
    fn doubling_amplitude_adds_six_db() {
        let fs = 2000.0;
        let x = tone(2048, 150.0, fs);
        let x2: Vec<Complex64> = x.iter().map(|c| c * 2.0).collect();
        let cfg = RadarConfig::default();
        let a = to_micro_doppler(&stft_samples(&x, fs, &StftConfig::default()).unwrap(), &cfg);
        let b = to_micro_doppler(&stft_samples(&x2, fs, &StftConfig::default()).unwrap(), &cfg);
        for (p, q) in a.values.iter().zip(&b.values) {
            assert!((q - p - 20.0 * 2f64.log10()).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_signal_gives_finite_map() {
        let g = stft_samples(&vec![Complex64::new(0.0, 0.0); 1024], 2000.0, &StftConfig::default()).unwrap();
        let s = to_micro_doppler(&g, &RadarConfig::default());
        assert!(s.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn frame_time_round_trip() {
        let g = stft_samples(&tone(4096, 10.0, 2000.0), 2000.0, &StftConfig::default()).unwrap();
        let s = to_micro_doppler(&g, &RadarConfig::default());
        assert!((s.time_axis[0] - 0.128).abs() < 1e-12);
        assert!((s.time_to_frame(s.frame_time(4.25)) - 4.25).abs() < 1e-12);
        let sub = s.frames(2, 5);
        assert_eq!(sub.n_frames, 3);
        assert_eq!(sub.frame(0), s.frame(2));
    }
}
