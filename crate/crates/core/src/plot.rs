//! Minimal raster plots: confusion-matrix heat maps and embedding scatters.

use std::io::BufWriter;
use std::path::Path;

use crate::cohort::{bmi_group, BMI_GROUP_LABELS};
use crate::error::{Error, Result};
use crate::knn::EvaluationReport;
use crate::tsne::EmbeddingPoint;

/// 3×5 glyphs, one row per `u8` (low three bits, MSB left).
fn glyph(c: char) -> Option<[u8; 5]> {
    Some(match c {
        '0' => [7, 5, 5, 5, 7],
        '1' => [2, 6, 2, 2, 7],
        '2' => [7, 1, 7, 4, 7],
        '3' => [7, 1, 3, 1, 7],
        '4' => [5, 5, 7, 1, 1],
        '5' => [7, 4, 7, 1, 7],
        '6' => [7, 4, 7, 5, 7],
        '7' => [7, 1, 1, 2, 2],
        '8' => [7, 5, 7, 5, 7],
        '9' => [7, 5, 7, 1, 7],
        '.' => [0, 0, 0, 0, 2],
        '-' => [0, 0, 7, 0, 0],
        '<' => [1, 2, 4, 2, 1],
        '>' => [4, 2, 1, 2, 4],
        '%' => [5, 1, 2, 4, 5],
        ' ' => [0; 5],
        _ => return None,
    })
}

pub type Rgb = [u8; 3];

pub const WHITE: Rgb = [255, 255, 255];
pub const BLACK: Rgb = [0, 0, 0];

/// 8-bit RGB canvas, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct Canvas {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
}

impl Canvas {
    pub fn new(width: usize, height: usize, background: Rgb) -> Self {
        Self {
            width,
            height,
            pixels: vec![background; width * height],
        }
    }

    pub fn set(&mut self, x: i64, y: i64, c: Rgb) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.pixels[y as usize * self.width + x as usize] = c;
        }
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn fill_rect(&mut self, x: i64, y: i64, w: i64, h: i64, c: Rgb) {
        for yy in y..y + h {
            for xx in x..x + w {
                self.set(xx, yy, c);
            }
        }
    }

    /// Draws `text` with its top-left corner at `(x, y)`; unsupported
    /// characters are skipped. Returns the width drawn.
    pub fn text(&mut self, x: i64, y: i64, text: &str, scale: i64, c: Rgb) -> i64 {
        let mut cx = x;
        for ch in text.chars() {
            if let Some(g) = glyph(ch) {
                for (row, bits) in g.iter().enumerate() {
                    for col in 0..3 {
                        if bits & (4 >> col) != 0 {
                            self.fill_rect(cx + col * scale, y + row as i64 * scale, scale, scale, c);
                        }
                    }
                }
                cx += 4 * scale;
            }
        }
        cx - x
    }

    /// Draws `text` top to bottom starting at `(x, y)`.
    pub fn text_vertical(&mut self, x: i64, y: i64, text: &str, scale: i64, c: Rgb) {
        let mut cy = y;
        for ch in text.chars() {
            self.text(x, cy, &ch.to_string(), scale, c);
            cy += 6 * scale;
        }
    }

    pub fn write_png(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
        let mut enc = png::Encoder::new(BufWriter::new(f), self.width as u32, self.height as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header()?;
        w.write_image_data(&self.pixels.concat())?;
        w.finish()?;
        Ok(())
    }
}

/// Twenty-two visually distinct colors, cycled for larger label sets.
pub const PALETTE: [Rgb; 22] = [
    [31, 119, 180],
    [255, 127, 14],
    [44, 160, 44],
    [214, 39, 40],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [127, 127, 127],
    [188, 189, 34],
    [23, 190, 207],
    [174, 199, 232],
    [255, 187, 120],
    [152, 223, 138],
    [255, 152, 150],
    [197, 176, 213],
    [196, 156, 148],
    [247, 182, 210],
    [199, 199, 199],
    [219, 219, 141],
    [158, 218, 229],
    [0, 0, 128],
    [128, 0, 0],
];

fn heat(v: f64) -> Rgb {
    let v = v.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * v).round() as u8;
    [lerp(247.0, 8.0), lerp(251.0, 48.0), lerp(255.0, 107.0)]
}

/// Row-normalized confusion heat map, axes labeled with class BMI.
pub fn confusion_png(report: &EvaluationReport, path: &Path) -> Result<()> {
    let c = report.classes.len() as i64;
    let cell = 24;
    let scale = 2;
    let margin = 6 * 4 * scale;
    let size = margin + c * cell + 8;
    let mut canvas = Canvas::new(size as usize, size as usize, WHITE);
    for (i, row) in report.confusion_normalized.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            canvas.fill_rect(margin + j as i64 * cell, margin + i as i64 * cell, cell - 1, cell - 1, heat(v));
        }
    }
    for (i, class) in report.classes.iter().enumerate() {
        let label = format!("{:.2}", class.bmi);
        let pos = margin + i as i64 * cell + (cell - 5 * scale) / 2;
        canvas.text(4, pos, &label, scale, BLACK);
        canvas.text_vertical(margin + i as i64 * cell + (cell - 3 * scale) / 2, 2, &label[..label.len().min(4)], scale - 1, BLACK);
    }
    canvas.write_png(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorBy {
    Subject,
    BmiGroup,
}

/// Scatter of an embedding with one color per subject or BMI group and a
/// legend of group labels for `BmiGroup`.
pub fn scatter_png(points: &[EmbeddingPoint], color_by: ColorBy, path: &Path) -> Result<()> {
    let size = 800i64;
    let pad = 40i64;
    let legend = if color_by == ColorBy::BmiGroup { 160 } else { 0 };
    let mut canvas = Canvas::new((size + legend) as usize, size as usize, WHITE);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    for p in points {
        let key = match color_by {
            ColorBy::Subject => p.meta.subject_id.map(|s| s as usize),
            ColorBy::BmiGroup => p.meta.bmi_group.or(p.meta.bmi.map(bmi_group)),
        };
        let color = key.map_or(BLACK, |k| PALETTE[k % PALETTE.len()]);
        let px = pad + ((p.x - x0) / span * (size - 2 * pad) as f64).round() as i64;
        let py = size - pad - ((p.y - y0) / span * (size - 2 * pad) as f64).round() as i64;
        canvas.fill_rect(px - 2, py - 2, 5, 5, color);
    }
    if color_by == ColorBy::BmiGroup {
        for (g, label) in BMI_GROUP_LABELS.iter().enumerate() {
            let y = pad + g as i64 * 28;
            canvas.fill_rect(size + 8, y, 14, 14, PALETTE[g]);
            canvas.text(size + 30, y + 2, label, 2, BLACK);
        }
    }
    canvas.write_png(path)
}
