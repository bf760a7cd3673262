//! Half-gait period estimation and slicing.
//!
//! The per-frame envelope is the power-weighted standard deviation of
//! velocity. It widens while a foot swings and narrows at double support, so
//! its autocorrelation peaks at the half-gait period and its minima mark the
//! half-gait boundaries.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::body::Side;
use crate::error::{Error, Result};
use crate::gait::GaitClock;
use crate::render::TimeSpan;
use crate::spectrogram::Spectrogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwingSide {
    Left,
    Right,
    Unknown,
}

impl SwingSide {
    pub fn opposite(self) -> Self {
        match self {
            SwingSide::Left => SwingSide::Right,
            SwingSide::Right => SwingSide::Left,
            SwingSide::Unknown => SwingSide::Unknown,
        }
    }
}

impl From<Option<Side>> for SwingSide {
    fn from(s: Option<Side>) -> Self {
        match s {
            Some(Side::Left) => SwingSide::Left,
            Some(Side::Right) => SwingSide::Right,
            _ => SwingSide::Unknown,
        }
    }
}

impl fmt::Display for SwingSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SwingSide::Left => "left",
            SwingSide::Right => "right",
            SwingSide::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    /// Swing side read from the simulator's gait clock.
    GroundTruth,
    /// Alternating labels with an arbitrary starting side.
    Alternation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentConfig {
    pub confidence_threshold: f64,
    pub min_period_s: f64,
    pub max_period_s: f64,
    pub min_record_s: f64,
    /// Bins below `factor × median` power of a frame count as noise.
    pub noise_floor_factor: f64,
    /// Passes of a `[1, 2, 1] / 4` smoother over the envelope.
    pub smoothing_passes: usize,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            confidence_threshold: 0.3,
            min_period_s: 0.25,
            max_period_s: 1.5,
            min_record_s: 2.0,
            noise_floor_factor: 3.0,
            smoothing_passes: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitSegmentation {
    pub half_gait_period_s: f64,
    pub confidence: f64,
    /// Frame indices of the envelope minima, strictly increasing.
    pub boundaries: Vec<usize>,
    /// Sub-frame boundary times, seconds.
    pub boundary_times_s: Vec<f64>,
    /// Centers of the first and last frames, seconds.
    pub record_span: TimeSpan,
    pub n_frames: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfGaitSpan {
    pub index: usize,
    pub start_frame: usize,
    pub end_frame: usize,
    pub span: TimeSpan,
    pub side: SwingSide,
    /// `false` for a half gait cut by the start or end of the record.
    pub complete: bool,
}

pub fn envelope(spec: &Spectrogram, cfg: &SegmentConfig) -> Vec<f64> {
    let v = &spec.velocity_axis;
    let mut power = vec![0.0; spec.n_bins];
    let mut sorted = vec![0.0; spec.n_bins];
    let mut e: Vec<f64> = (0..spec.n_frames)
        .map(|m| {
            for (p, db) in power.iter_mut().zip(spec.frame(m)) {
                *p = 10f64.powf(db / 10.0);
            }
            sorted.copy_from_slice(&power);
            sorted.sort_by(f64::total_cmp);
            let floor = cfg.noise_floor_factor * sorted[sorted.len() / 2];
            let (mut w, mut s1, mut s2) = (0.0, 0.0, 0.0);
            for (p, vk) in power.iter().zip(v) {
                let q = (p - floor).max(0.0);
                w += q;
                s1 += q * vk;
                s2 += q * vk * vk;
            }
            if w > 0.0 {
                let mean = s1 / w;
                (s2 / w - mean * mean).max(0.0).sqrt()
            } else {
                0.0
            }
        })
        .collect();
    for _ in 0..cfg.smoothing_passes {
        e = smooth(&e);
    }
    e
}

fn smooth(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let a = x[i.saturating_sub(1)];
            let c = x[(i + 1).min(n - 1)];
            0.25 * a + 0.5 * x[i] + 0.25 * c
        })
        .collect()
}

/// Normalized autocorrelation `r(l) / r(0)` of the mean-removed sequence for
/// lags `0..=max_lag`, each lag averaged over its overlap.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let r0 = d.iter().map(|v| v * v).sum::<f64>() / n as f64;
    (0..=max_lag.min(n - 1))
        .map(|l| {
            if r0 <= 0.0 {
                return 0.0;
            }
            let s: f64 = d[..n - l].iter().zip(&d[l..]).map(|(a, b)| a * b).sum();
            s / (n - l) as f64 / r0
        })
        .collect()
}

/// Vertex offset in `[-0.5, 0.5]` of the parabola through three samples.
fn parabolic_offset(a: f64, b: f64, c: f64) -> f64 {
    let den = a - 2.0 * b + c;
    if den.abs() < 1e-300 {
        0.0
    } else {
        (0.5 * (a - c) / den).clamp(-0.5, 0.5)
    }
}

/// Half-gait period in seconds and its periodicity confidence.
pub fn estimate_cadence(spec: &Spectrogram, cfg: &SegmentConfig) -> Result<(f64, f64)> {
    let (period_frames, confidence) = period_from_envelope(spec, &envelope(spec, cfg), cfg)?;
    Ok((period_frames * spec.frame_duration(), confidence))
}

fn period_from_envelope(spec: &Spectrogram, e: &[f64], cfg: &SegmentConfig) -> Result<(f64, f64)> {
    let duration = spec.duration_s();
    if duration < cfg.min_record_s {
        return Err(Error::InsufficientData(format!(
            "record spans {duration:.3} s, need at least {} s",
            cfg.min_record_s
        )));
    }
    let dt = spec.frame_duration();
    let lag_min = ((cfg.min_period_s / dt).ceil() as usize).max(1);
    let lag_max = ((cfg.max_period_s / dt).floor() as usize).min(e.len() / 2);
    if lag_max <= lag_min {
        return Err(Error::InsufficientData(format!(
            "frame spacing {dt:.4} s leaves no lags in [{}, {}] s",
            cfg.min_period_s, cfg.max_period_s
        )));
    }
    let r = autocorrelation(e, lag_max + 1);
    let best = r[lag_min..=lag_max].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let peak = (lag_min..=lag_max)
        .find(|&l| r[l] >= r[l - 1] && r[l] > r[l + 1] && r[l] >= 0.5 * best);
    let Some(l) = peak else {
        return Err(Error::NoPeriodicity {
            confidence: best.clamp(0.0, 1.0),
            threshold: cfg.confidence_threshold,
        });
    };
    let confidence = r[l].clamp(0.0, 1.0);
    if confidence < cfg.confidence_threshold {
        return Err(Error::NoPeriodicity {
            confidence,
            threshold: cfg.confidence_threshold,
        });
    }
    Ok((l as f64 + parabolic_offset(r[l - 1], r[l], r[l + 1]), confidence))
}

fn argmin(e: &[f64], lo: usize, hi: usize) -> usize {
    (lo..=hi).min_by(|&a, &b| e[a].total_cmp(&e[b])).unwrap()
}

pub fn segment(spec: &Spectrogram, cfg: &SegmentConfig) -> Result<GaitSegmentation> {
    let e = envelope(spec, cfg);
    let (p, confidence) = period_from_envelope(spec, &e, cfg)?;
    let n = e.len();

    // Boundary phase from the envelope folded at the period.
    let steps = (p.ceil() as usize) * 8;
    let phase = (0..steps)
        .map(|s| {
            let phi = s as f64 * p / steps as f64;
            let mut acc = 0.0;
            let mut count = 0usize;
            let mut t = phi;
            while t <= (n - 1) as f64 {
                let i = t.floor() as usize;
                let f = t - i as f64;
                acc += e[i] * (1.0 - f) + e[(i + 1).min(n - 1)] * f;
                count += 1;
                t += p;
            }
            (phi, acc / count.max(1) as f64)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(phi, _)| phi)
        .unwrap_or(0.0);

    let half_window = 0.25 * p;
    let mut boundaries: Vec<usize> = Vec::new();
    let mut times = Vec::new();
    let mut j = 0usize;
    loop {
        let grid = phase + j as f64 * p;
        j += 1;
        let (mut lo, mut hi) = (grid - half_window, grid + half_window);
        if let Some(&prev) = boundaries.last() {
            lo = lo.max(prev as f64 + p - half_window);
            hi = hi.min(prev as f64 + p + half_window);
        }
        let lo = lo.max(0.0).ceil() as usize;
        let hi_f = hi.floor();
        if hi_f < 0.0 {
            continue;
        }
        if lo >= n {
            break;
        }
        let hi = (hi_f as usize).min(n - 1);
        if hi < lo {
            if grid > (n - 1) as f64 {
                break;
            }
            continue;
        }
        let m = argmin(&e, lo, hi);
        if (m == 0 || m == n - 1) && hi - lo > 1 {
            // The true minimum lies outside the record.
            if grid > (n - 1) as f64 {
                break;
            }
            continue;
        }
        if boundaries.last().is_some_and(|&b| m <= b) {
            continue;
        }
        let frac = if m > 0 && m + 1 < n {
            m as f64 + parabolic_offset(e[m - 1], e[m], e[m + 1])
        } else {
            m as f64
        };
        boundaries.push(m);
        times.push(spec.frame_time(frac));
    }
    Ok(GaitSegmentation {
        half_gait_period_s: p * spec.frame_duration(),
        confidence,
        boundaries,
        boundary_times_s: times,
        record_span: TimeSpan::new(spec.frame_time(0.0), spec.frame_time((n - 1) as f64)),
        n_frames: n,
    })
}

/// Half gaits between consecutive boundaries, plus the partial spans at
/// either end of the record when they cover at least half a period. With a
/// gait clock the swing side is read from ground truth at each span
/// midpoint; without one the labels alternate starting from `Left`.
pub fn slice_half_gaits(seg: &GaitSegmentation, clock: Option<&GaitClock>) -> Vec<HalfGaitSpan> {
    let (Some(&first), Some(&last)) = (seg.boundary_times_s.first(), seg.boundary_times_s.last())
    else {
        return Vec::new();
    };
    let min_partial = 0.5 * seg.half_gait_period_s;
    let mut raw: Vec<(usize, usize, TimeSpan, bool)> = Vec::new();
    if first - seg.record_span.start_s >= min_partial {
        raw.push((0, seg.boundaries[0], TimeSpan::new(seg.record_span.start_s, first), false));
    }
    for (b, t) in seg.boundaries.windows(2).zip(seg.boundary_times_s.windows(2)) {
        raw.push((b[0], b[1], TimeSpan::new(t[0], t[1]), true));
    }
    if seg.record_span.end_s - last >= min_partial {
        raw.push((
            *seg.boundaries.last().unwrap(),
            seg.n_frames - 1,
            TimeSpan::new(last, seg.record_span.end_s),
            false,
        ));
    }
    let mut side = SwingSide::Left;
    raw.into_iter()
        .enumerate()
        .map(|(index, (start_frame, end_frame, span, complete))| {
            let label = match clock {
                Some(c) => SwingSide::from(c.swing_side_at(span.midpoint())),
                None => {
                    let s = side;
                    side = side.opposite();
                    s
                }
            };
            HalfGaitSpan {
                index,
                start_frame,
                end_frame,
                span,
                side: label,
                complete,
            }
        })
        .collect()
}

/// RMS distance, in frames, from each detected boundary to the nearest
/// ground-truth double-support center.
pub fn boundary_rms_error(spec: &Spectrogram, seg: &GaitSegmentation, clock: &GaitClock) -> f64 {
    let truth: Vec<f64> = clock
        .half_gait_boundaries(spec.frame_time((spec.n_frames + 1) as f64))
        .iter()
        .map(|ev| spec.time_to_frame(ev.time_s))
        .collect();
    if seg.boundaries.is_empty() || truth.is_empty() {
        return f64::INFINITY;
    }
    let sq: f64 = seg
        .boundaries
        .iter()
        .map(|&b| {
            truth
                .iter()
                .map(|t| (b as f64 - t).abs())
                .fold(f64::INFINITY, f64::min)
                .powi(2)
        })
        .sum();
    (sq / seg.boundaries.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationReport {
    pub half_gait_period_s: f64,
    pub confidence: f64,
    pub frame_duration_s: f64,
    pub boundaries: Vec<usize>,
    pub label_source: LabelSource,
    pub slices: Vec<HalfGaitSpan>,
}

impl SegmentationReport {
    pub fn new(spec: &Spectrogram, seg: &GaitSegmentation, clock: Option<&GaitClock>) -> Self {
        Self {
            half_gait_period_s: seg.half_gait_period_s,
            confidence: seg.confidence,
            frame_duration_s: spec.frame_duration(),
            boundaries: seg.boundaries.clone(),
            label_source: if clock.is_some() {
                LabelSource::GroundTruth
            } else {
                LabelSource::Alternation
            },
            slices: slice_half_gaits(seg, clock),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::file(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrogram::WindowKind;

    fn from_envelope(e: &[f64]) -> Spectrogram {
        // Flat bands of half-width `e[m]` bins.
        let n_bins = 64;
        let mut values = Vec::new();
        for &w in e {
            for k in 0..n_bins {
                let v = k as f64 - 32.0;
                values.push(if v.abs() <= w { 0.0 } else { -200.0 });
            }
        }
        Spectrogram {
            values,
            n_frames: e.len(),
            n_bins,
            time_axis: (0..e.len()).map(|m| (m * 128 + 256) as f64 / 2000.0).collect(),
            velocity_axis: (0..n_bins).map(|k| k as f64 - 32.0).collect(),
            window_size: 512,
            hop: 128,
            window: WindowKind::Hann,
            sample_rate_hz: 2000.0,
        }
    }

    #[test]
    fn autocorrelation_of_cosine() {
        let x: Vec<f64> = (0..400).map(|i| (i as f64 * 2.0 * std::f64::consts::PI / 10.0).cos()).collect();
        let r = autocorrelation(&x, 20);
        assert!((r[0] - 1.0).abs() < 1e-12);
        assert!((r[10] - 1.0).abs() < 1e-3);
        assert!(r[5] < -0.99);
    }

    #[test]
    fn parabola_vertex() {
        // y = (x - 0.3)^2 sampled at -1, 0, 1
        let f = |x: f64| (x - 0.3f64).powi(2);
        assert!((parabolic_offset(f(-1.0), f(0.0), f(1.0)) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn periodic_envelope_is_segmented() {
        let period = 7.8;
        let e: Vec<f64> = (0..300)
            .map(|m| 10.0 + 8.0 * (std::f64::consts::PI * m as f64 / period).sin().abs())
            .collect();
        let s = from_envelope(&e);
        let cfg = SegmentConfig {
            noise_floor_factor: 0.0,
            ..Default::default()
        };
        let seg = segment(&s, &cfg).unwrap();
        assert!((seg.half_gait_period_s / s.frame_duration() - period).abs() < 1.0);
        assert!(seg.boundaries.windows(2).all(|w| w[0] < w[1]));
        for w in seg.boundaries.windows(2) {
            let d = (w[1] - w[0]) as f64;
            assert!((d - period).abs() <= 0.25 * period + 1.0, "{d}");
        }
        let slices = slice_half_gaits(&seg, None);
        let complete = slices.iter().filter(|s| s.complete).count();
        assert_eq!(complete, seg.boundaries.len() - 1);
        assert!(slices.len() <= complete + 2);
        assert!(slices.windows(2).all(|w| w[0].side == w[1].side.opposite()));
    }

    #[test]
    fn flat_envelope_has_no_periodicity() {
        let s = from_envelope(&[5.0; 200]);
        let cfg = SegmentConfig {
            noise_floor_factor: 0.0,
            ..Default::default()
        };
        assert!(matches!(segment(&s, &cfg), Err(Error::NoPeriodicity { .. })));
    }

    #[test]
    fn short_record_is_insufficient() {
        let s = from_envelope(&[5.0; 20]);
        assert!(matches!(
            estimate_cadence(&s, &SegmentConfig::default()),
            Err(Error::InsufficientData(_))
        ));
    }
}
