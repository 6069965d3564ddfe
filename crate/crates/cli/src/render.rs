//! PNG heatmaps of real phase-space fields.

use std::path::Path;

use image::{ImageFormat, Rgb, RgbImage};
use phasespace::Field2D;
use serde::{Deserialize, Serialize};

use crate::error::CliResult;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Colormap {
    /// Blue below zero, white at zero, red above.
    #[default]
    Diverging,
    /// White (minimum) to black (maximum).
    Gray,
}

const NEG: [f64; 3] = [59.0, 76.0, 192.0];
const POS: [f64; 3] = [180.0, 4.0, 38.0];
const WHITE: [f64; 3] = [255.0, 255.0, 255.0];

fn mix(a: [f64; 3], b: [f64; 3], t: f64) -> Rgb<u8> {
    let c = |i: usize| (a[i] + (b[i] - a[i]) * t).round().clamp(0.0, 255.0) as u8;
    Rgb([c(0), c(1), c(2)])
}

fn colour(v: f64, lo: f64, hi: f64, cmap: Colormap) -> Rgb<u8> {
    match cmap {
        Colormap::Diverging => {
            if v < 0.0 {
                mix(WHITE, NEG, (v / lo).clamp(0.0, 1.0))
            } else {
                mix(WHITE, POS, (v / hi).clamp(0.0, 1.0))
            }
        }
        Colormap::Gray => {
            let t = if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
            mix(WHITE, [0.0; 3], t)
        }
    }
}

/// Colour range: symmetric about zero when the field goes negative, else `[0, max]`.
fn range(field: &Field2D<f64>, cmap: Colormap) -> (f64, f64) {
    let max = field.values().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let min = field.min();
    let top = |v: f64| if v > 0.0 { v } else { 1.0 };
    match cmap {
        Colormap::Diverging if min < 0.0 => {
            let m = top(field.max_abs());
            (-m, m)
        }
        Colormap::Diverging => (0.0, top(max)),
        Colormap::Gray => (min.min(0.0), top(max)),
    }
}

// 5x7 glyphs, one row per byte, bit 4 is the leftmost column.
const GLYPH_X: [u8; 7] = [0b00000, 0b00000, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001];
const GLYPH_P: [u8; 7] = [0b00000, 0b00000, 0b11110, 0b10001, 0b11110, 0b10000, 0b10000];

fn draw_glyph(img: &mut RgbImage, glyph: &[u8; 7], x0: u32, y0: u32, scale: u32) {
    for (r, bits) in glyph.iter().enumerate() {
        for c in 0..5u32 {
            if bits & (1 << (4 - c)) != 0 {
                for dy in 0..scale {
                    for dx in 0..scale {
                        img.put_pixel(x0 + c * scale + dx, y0 + r as u32 * scale + dy, Rgb([0, 0, 0]));
                    }
                }
            }
        }
    }
}

const MARGIN: u32 = 24;
const TARGET_SIZE: usize = 512;

/// Writes `field` as a PNG with `x` to the right and `p` upward.
pub fn render_heatmap(field: &Field2D<f64>, path: &Path, cmap: Colormap) -> CliResult<()> {
    let (nx, np) = field.grid().shape();
    let s = (TARGET_SIZE / nx.max(np)).max(1) as u32;
    let (w, h) = (nx as u32 * s, np as u32 * s);
    let mut img = RgbImage::from_pixel(w + MARGIN + 8, h + MARGIN + 8, Rgb([255, 255, 255]));
    let (lo, hi) = range(field, cmap);
    let (ox, oy) = (MARGIN, 8);
    for i in 0..nx {
        for j in 0..np {
            let c = colour(field.values()[[i, j]], lo, hi, cmap);
            let (px, py) = (ox + i as u32 * s, oy + (np - 1 - j) as u32 * s);
            for dy in 0..s {
                for dx in 0..s {
                    img.put_pixel(px + dx, py + dy, c);
                }
            }
        }
    }
    let black = Rgb([0, 0, 0]);
    for x in ox - 1..=ox + w {
        img.put_pixel(x, oy - 1, black);
        img.put_pixel(x, oy + h, black);
    }
    for y in oy - 1..=oy + h {
        img.put_pixel(ox - 1, y, black);
        img.put_pixel(ox + w, y, black);
    }
    draw_glyph(&mut img, &GLYPH_X, ox + w / 2 - 5, oy + h + 4, 2);
    draw_glyph(&mut img, &GLYPH_P, 4, oy + h / 2 - 7, 2);
    img.save_with_format(path, ImageFormat::Png)?;
    Ok(())
}
