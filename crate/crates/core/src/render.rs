//! Half-gait image rendering and 16-bit PNG I/O.

use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::colormap::Colormap;
use crate::error::{Error, Result};
use crate::segment::SwingSide;
use crate::spectrogram::Spectrogram;

pub const IMAGE_SIZE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub dynamic_range_db: f64,
    pub width: usize,
    pub height: usize,
    pub colormap: Colormap,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            dynamic_range_db: 40.0,
            width: IMAGE_SIZE,
            height: IMAGE_SIZE,
            colormap: Colormap::Viridis,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSpan {
    pub start_s: f64,
    pub end_s: f64,
}

impl TimeSpan {
    pub fn new(start_s: f64, end_s: f64) -> Self {
        Self { start_s, end_s }
    }

    pub fn duration(&self) -> f64 {
        self.end_s - self.start_s
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.start_s + self.end_s)
    }
}

/// RGB image with interleaved 16-bit channels, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfGaitImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u16>,
    pub subject_id: Option<u32>,
    pub swing_side: SwingSide,
    pub snr_db: Option<f64>,
    pub span: TimeSpan,
}

impl HalfGaitImage {
    pub fn pixel(&self, x: usize, y: usize) -> [u16; 3] {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Normalized log-power recovered through the colormap inverse,
    /// row-major.
    pub fn decode(&self, colormap: Colormap) -> Vec<f64> {
        self.pixels
            .chunks_exact(3)
            .map(|p| colormap.invert([p[0], p[1], p[2]]))
            .collect()
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        write_png(path, self.width, self.height, &self.pixels)
    }
}

fn sample(spec: &Spectrogram, m: f64, k: f64) -> f64 {
    let m = m.clamp(0.0, (spec.n_frames - 1) as f64);
    let k = k.clamp(0.0, (spec.n_bins - 1) as f64);
    let (m0, k0) = (m.floor() as usize, k.floor() as usize);
    let (m1, k1) = ((m0 + 1).min(spec.n_frames - 1), (k0 + 1).min(spec.n_bins - 1));
    let (fm, fk) = (m - m0 as f64, k - k0 as f64);
    let top = spec.value(m0, k0) * (1.0 - fk) + spec.value(m0, k1) * fk;
    let bottom = spec.value(m1, k0) * (1.0 - fk) + spec.value(m1, k1) * fk;
    top * (1.0 - fm) + bottom * fm
}

/// Clipped, normalized, bilinearly resampled map for `span`, row 0 holding
/// the highest velocity. Values lie in `[0, 1]`.
pub fn normalized_map(spec: &Spectrogram, span: TimeSpan, cfg: &RenderConfig) -> Result<Vec<f64>> {
    if spec.n_frames == 0 || !(span.end_s > span.start_s) {
        return Err(Error::Domain(format!(
            "empty render span [{}, {}]",
            span.start_s, span.end_s
        )));
    }
    let f0 = spec.time_to_frame(span.start_s);
    let f1 = spec.time_to_frame(span.end_s);
    let last = (spec.n_frames - 1) as f64;
    if f1 < -0.5 || f0 > last + 0.5 {
        return Err(Error::Domain(format!(
            "render span [{}, {}] outside spectrogram",
            span.start_s, span.end_s
        )));
    }
    if !(cfg.dynamic_range_db > 0.0) || cfg.width == 0 || cfg.height == 0 {
        return Err(Error::Config("render size and dynamic range must be positive".into()));
    }
    let lo = f0.floor().clamp(0.0, last) as usize;
    let hi = f1.ceil().clamp(0.0, last) as usize;
    let peak = (lo..=hi)
        .flat_map(|m| spec.frame(m).iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    let floor = peak - cfg.dynamic_range_db;

    let (w, h) = (cfg.width, cfg.height);
    let nb = spec.n_bins as f64;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let k = ((h - 1 - y) as f64 + 0.5) * nb / h as f64 - 0.5;
        for x in 0..w {
            let m = f0 + (x as f64 + 0.5) / w as f64 * (f1 - f0);
            let v = sample(spec, m, k).clamp(floor, peak);
            out.push((v - floor) / cfg.dynamic_range_db);
        }
    }
    Ok(out)
}

pub fn render_image(spec: &Spectrogram, span: TimeSpan, cfg: &RenderConfig) -> Result<HalfGaitImage> {
    let map = normalized_map(spec, span, cfg)?;
    let mut pixels = Vec::with_capacity(3 * map.len());
    for u in map {
        pixels.extend_from_slice(&cfg.colormap.map(u));
    }
    Ok(HalfGaitImage {
        width: cfg.width,
        height: cfg.height,
        pixels,
        subject_id: None,
        swing_side: SwingSide::Unknown,
        snr_db: None,
        span,
    })
}

/// `subject{ID}_gait{K}_snr{dB}.png`; noiseless records use `snrinf`.
pub fn image_file_name(subject_id: u32, gait_index: usize, snr_db: Option<f64>) -> String {
    let snr = match snr_db {
        Some(s) => format!("{}", s.round() as i64),
        None => "inf".into(),
    };
    format!("subject{subject_id:02}_gait{gait_index:03}_snr{snr}.png")
}

pub fn write_png(path: &Path, width: usize, height: usize, rgb: &[u16]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(f), width as u32, height as u32);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Sixteen);
    enc.set_compression(png::Compression::Fast);
    let mut writer = enc.write_header()?;
    let bytes: Vec<u8> = rgb.iter().flat_map(|v| v.to_be_bytes()).collect();
    writer.write_image_data(&bytes)?;
    writer.finish()?;
    Ok(())
}

/// Reads a 16-bit RGB PNG into `(width, height, interleaved samples)`.
pub fn read_png(path: &Path) -> Result<(usize, usize, Vec<u16>)> {
    let f = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    let mut reader = png::Decoder::new(BufReader::new(f)).read_info()?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Config(format!("{}: image too large", path.display())))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf)?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Sixteen {
        return Err(Error::Config(format!(
            "{}: expected 16-bit RGB, found {:?} {:?}",
            path.display(),
            info.color_type,
            info.bit_depth
        )));
    }
    let w = info.width as usize;
    let h = info.height as usize;
    let mut out = Vec::with_capacity(w * h * 3);
    for row in buf.chunks_exact(info.line_size).take(h) {
        out.extend(row[..w * 6].chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]])));
    }
    Ok((w, h, out))
}

/// Decoded normalized log-power averaged over `block`×`block` tiles.
pub fn image_features(width: usize, height: usize, rgb: &[u16], colormap: Colormap, block: usize) -> Vec<f32> {
    let (bw, bh) = (width / block, height / block);
    let mut acc = vec![0.0f64; bw * bh];
    for y in 0..bh * block {
        for x in 0..bw * block {
            let i = 3 * (y * width + x);
            acc[(y / block) * bw + x / block] += colormap.invert([rgb[i], rgb[i + 1], rgb[i + 2]]);
        }
    }
    let norm = (block * block) as f64;
    acc.into_iter().map(|v| (v / norm) as f32).collect()
}
