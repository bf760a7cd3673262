//! Fixed perceptual colormap for 16-bit RGB renderings.
//!
//! The table is viridis sampled at 256 points; values in between are linearly
//! interpolated. Luminance increases strictly along the table, which makes the
//! map invertible from a single pixel.

use serde::{Deserialize, Serialize};

use crate::colormap_table::VIRIDIS_U16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Colormap {
    #[default]
    Viridis,
}

fn luminance(rgb: [f64; 3]) -> f64 {
    0.2126 * rgb[0] + 0.7152 * rgb[1] + 0.0722 * rgb[2]
}

fn entry(i: usize) -> [f64; 3] {
    let e = VIRIDIS_U16[i];
    [f64::from(e[0]), f64::from(e[1]), f64::from(e[2])]
}

impl Colormap {
    fn table(self) -> &'static [[u16; 3]; 256] {
        match self {
            Colormap::Viridis => &VIRIDIS_U16,
        }
    }

    /// Color of `u`, clamped to `[0, 1]`.
    pub fn map(self, u: f64) -> [u16; 3] {
        let t = self.table();
        let x = u.clamp(0.0, 1.0) * 255.0;
        let i = (x.floor() as usize).min(254);
        let f = x - i as f64;
        let mut out = [0u16; 3];
        for c in 0..3 {
            let a = f64::from(t[i][c]);
            let b = f64::from(t[i + 1][c]);
            out[c] = (a + f * (b - a)).round() as u16;
        }
        out
    }

    /// Recovers `u` from a pixel produced by [`Colormap::map`].
    pub fn invert(self, rgb: [u16; 3]) -> f64 {
        let l = luminance([f64::from(rgb[0]), f64::from(rgb[1]), f64::from(rgb[2])]);
        let lum = |i: usize| luminance(entry(i));
        if l <= lum(0) {
            return 0.0;
        }
        if l >= lum(255) {
            return 1.0;
        }
        let (mut lo, mut hi) = (0usize, 255usize);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if lum(mid) <= l {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let f = (l - lum(lo)) / (lum(hi) - lum(lo));
        (lo as f64 + f) / 255.0
    }
}
