//! Canonical alignment of raw masks.
//!
//! A mask is rescaled so that the 80th percentile of its foreground
//! distances from the centroid becomes `target_radius`, re-binarized, and
//! cropped or padded to a `canvas x canvas` image whose center pixel
//! `(canvas / 2, canvas / 2)` holds the rescaled centroid.
//!
//! The resampling grid is anchored at the source centroid (rounded to the
//! nearest pixel in integer arithmetic) instead of the image origin. This
//! makes the output exactly invariant to integer translations of the input.

use crate::error::{Error, Result};
use crate::shape::{center_of_mass, round_div, rounded_center, BinaryShape};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentParams {
    pub canvas: usize,
    pub target_radius: f64,
    pub percentile: f64,
    pub rebinarize_threshold: f64,
}

impl Default for AlignmentParams {
    fn default() -> Self {
        Self {
            canvas: 128,
            target_radius: 40.0,
            percentile: 0.80,
            rebinarize_threshold: 0.5,
        }
    }
}

impl AlignmentParams {
    pub fn validate(&self) -> Result<()> {
        if self.canvas == 0 {
            return Err(Error::param("canvas must be positive"));
        }
        if !(self.target_radius > 0.0) {
            return Err(Error::param("target_radius must be positive"));
        }
        if !(self.percentile > 0.0 && self.percentile < 1.0) {
            return Err(Error::param("percentile must lie in (0, 1)"));
        }
        if !(self.rebinarize_threshold > 0.0 && self.rebinarize_threshold < 1.0) {
            return Err(Error::param("rebinarize_threshold must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Nearest-rank `q`-quantile of the foreground's distances to its centroid:
/// element `ceil(q N) - 1` of the sorted distances.
pub fn radial_percentile(s: &BinaryShape, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::param(format!("percentile {q} must lie in (0, 1)")));
    }
    let c = center_of_mass(s)?;
    let mut d: Vec<f64> = s
        .foreground()
        .map(|(x, y)| (x as f64 - c.x).hypot(y as f64 - c.y))
        .collect();
    Ok(nearest_rank(&mut d, q))
}

fn nearest_rank(values: &mut [f64], q: f64) -> f64 {
    let n = values.len();
    // Tolerance keeps products like 0.8 * 5 = 4.000000000000001 at rank 4.
    let rank = ((q * n as f64 - 1e-9).ceil() as usize).clamp(1, n);
    let (_, v, _) = values.select_nth_unstable_by(rank - 1, f64::total_cmp);
    *v
}

/// Cubic convolution kernel with `a = -0.5` (Catmull-Rom).
pub fn cubic_kernel(t: f64) -> f64 {
    const A: f64 = -0.5;
    let t = t.abs();
    if t <= 1.0 {
        ((A + 2.0) * t - (A + 3.0)) * t * t + 1.0
    } else if t < 2.0 {
        ((A * t - 5.0 * A) * t + 8.0 * A) * t - 4.0 * A
    } else {
        0.0
    }
}

/// Bicubic sample of the shape's `{0, 1}` intensities at real coordinates;
/// taps outside the image are clamped to the nearest edge pixel.
pub fn sample_bicubic(s: &BinaryShape, x: f64, y: f64) -> f64 {
    let (w, h) = (s.width() as i64, s.height() as i64);
    let x0 = x.floor() as i64;
    let y0 = y.floor() as i64;
    let mut acc = 0.0;
    for j in -1..=2 {
        let wy = cubic_kernel(y - (y0 + j) as f64);
        if wy == 0.0 {
            continue;
        }
        let sy = (y0 + j).clamp(0, h - 1) as usize;
        let mut row = 0.0;
        for i in -1..=2 {
            let sx = (x0 + i).clamp(0, w - 1) as usize;
            if s.get(sx, sy) {
                row += cubic_kernel(x - (x0 + i) as f64);
            }
        }
        acc += wy * row;
    }
    acc
}

/// A binarized, rescaled foreground stored on a window of an unbounded grid.
struct ScaledWindow {
    u0: i64,
    v0: i64,
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

/// Rescales `s` by `scale` around the integer anchor `(ax, ay)` and
/// thresholds at `threshold`. Grid point `(u, v)` samples the source at
/// `(ax + u / scale, ay + v / scale)`. Only the window that can receive
/// nonzero interpolated intensity is evaluated.
fn rescale_binarize(s: &BinaryShape, scale: f64, anchor: (i64, i64), threshold: f64) -> Option<ScaledWindow> {
    let (bx0, by0, bx1, by1) = s.bounding_box()?;
    // The cubic kernel has support 2, so samples farther than 2 source
    // pixels from the foreground bounding box are exactly zero.
    let margin = 3.0;
    let span = |lo: usize, hi: usize, a: i64| {
        let lo = ((lo as f64 - margin - a as f64) * scale).floor() as i64;
        let hi = ((hi as f64 + margin - a as f64) * scale).ceil() as i64;
        (lo, hi)
    };
    let (u0, u1) = span(bx0, bx1, anchor.0);
    let (v0, v1) = span(by0, by1, anchor.1);
    let width = (u1 - u0 + 1) as usize;
    let height = (v1 - v0 + 1) as usize;
    let mut pixels = vec![0u8; width * height];
    for (row, v) in (v0..=v1).enumerate() {
        let sy = anchor.1 as f64 + v as f64 / scale;
        for (col, u) in (u0..=u1).enumerate() {
            let sx = anchor.0 as f64 + u as f64 / scale;
            if sample_bicubic(s, sx, sy) >= threshold {
                pixels[row * width + col] = 1;
            }
        }
    }
    Some(ScaledWindow {
        u0,
        v0,
        width,
        height,
        pixels,
    })
}

/// Centers and scale-normalizes a mask onto a `canvas x canvas` image.
pub fn align(s: &BinaryShape, p: &AlignmentParams) -> Result<BinaryShape> {
    p.validate()?;
    let p_q = radial_percentile(s, p.percentile)?;
    if p_q <= 0.0 {
        return Err(Error::DegenerateScale);
    }
    let scale = p.target_radius / p_q;
    let anchor = rounded_center(s)?;
    let win = rescale_binarize(s, scale, anchor, p.rebinarize_threshold).ok_or(Error::EmptyForeground)?;

    let (mut n, mut su, mut sv) = (0i64, 0i64, 0i64);
    for (i, _) in win.pixels.iter().enumerate().filter(|(_, &v)| v == 1) {
        n += 1;
        su += win.u0 + (i % win.width) as i64;
        sv += win.v0 + (i / win.width) as i64;
    }
    if n == 0 {
        return Err(Error::EmptyForeground);
    }
    let cu = round_div(su, n);
    let cv = round_div(sv, n);

    let c = (p.canvas / 2) as i64;
    BinaryShape::from_fn(p.canvas, p.canvas, |x, y| {
        let u = x as i64 - c + cu - win.u0;
        let v = y as i64 - c + cv - win.v0;
        u >= 0
            && v >= 0
            && (u as usize) < win.width
            && (v as usize) < win.height
            && win.pixels[v as usize * win.width + u as usize] == 1
    })
}
