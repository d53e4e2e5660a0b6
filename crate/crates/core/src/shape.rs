//! Binary shapes and the pixel-set measures defined on them.
//!
//! Coordinates are `(x = column, y = row)` with the origin at the top-left
//! pixel. Pixels are stored row-major as `0` (background) or `1`
//! (foreground).

use crate::error::{Error, Result};

/// A `width x height` grid of `{0, 1}` pixels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryShape {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

/// Sub-pixel center of mass of a foreground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Centroid {
    pub x: f64,
    pub y: f64,
}

impl BinaryShape {
    /// All-background shape.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        Self::filled(width, height, false)
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param(format!(
                "shape dimensions must be positive, got {width}x{height}"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels: vec![value as u8; width * height],
        })
    }

    /// Builds a shape from row-major pixels; every value must be 0 or 1.
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param(format!(
                "shape dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::param(format!(
                "expected {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if let Some(v) = pixels.iter().find(|&&v| v > 1) {
            return Err(Error::param(format!("pixel value {v} is not 0 or 1")));
        }
        Ok(Self { width, height, pixels })
    }

    /// Builds a shape by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let mut s = Self::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    s.pixels[y * width + x] = 1;
                }
            }
        }
        Ok(s)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x] == 1
    }

    /// Out-of-canvas coordinates read as background.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return false;
        }
        self.get(x as usize, y as usize)
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.pixels[y * self.width + x] = value as u8;
    }

    pub fn same_dims(&self, other: &BinaryShape) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_dims(&self, other: &BinaryShape) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            })
        }
    }

    /// Number of foreground pixels, `|C1|`.
    pub fn foreground_count(&self) -> usize {
        self.pixels.iter().filter(|&&v| v == 1).count()
    }

    /// Iterates `(x, y)` of every foreground pixel in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 1)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Pixel-wise complement.
    pub fn complement(&self) -> BinaryShape {
        BinaryShape {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| 1 - v).collect(),
        }
    }

    /// Inclusive bounding box `(min_x, min_y, max_x, max_y)` of the foreground.
    pub fn bounding_box(&self) -> Option<(usize, usize, usize, usize)> {
        let mut it = self.foreground();
        let (x0, y0) = it.next()?;
        let init = (x0, y0, x0, y0);
        Some(it.fold(init, |(a, b, c, d), (x, y)| (a.min(x), b.min(y), c.max(x), d.max(y))))
    }

    /// Shifts the foreground by `(dx, dy)`; pixels leaving the canvas are dropped.
    pub fn translate(&self, dx: i64, dy: i64) -> BinaryShape {
        let mut out = BinaryShape {
            width: self.width,
            height: self.height,
            pixels: vec![0; self.pixels.len()],
        };
        for (x, y) in self.foreground() {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx >= 0 && ny >= 0 && (nx as usize) < self.width && (ny as usize) < self.height {
                out.set(nx as usize, ny as usize, true);
            }
        }
        out
    }

    /// True when every foreground pixel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryShape) -> bool {
        self.same_dims(other) && self.pixels.iter().zip(&other.pixels).all(|(&a, &b)| a <= b)
    }

    /// Foreground pixels that are 4-adjacent to background. Positions
    /// outside the canvas count as background.
    pub fn boundary(&self) -> Vec<(usize, usize)> {
        self.foreground()
            .filter(|&(x, y)| {
                let (x, y) = (x as i64, y as i64);
                !self.get_signed(x - 1, y)
                    || !self.get_signed(x + 1, y)
                    || !self.get_signed(x, y - 1)
                    || !self.get_signed(x, y + 1)
            })
            .collect()
    }

    /// Foreground as a `{0.0, 1.0}` vector in row-major order.
    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.pixels.iter().map(|&v| v as f64).collect()
    }
}

/// Intersection over union of the two foregrounds.
///
/// Two empty foregrounds score 1.0; empty against nonempty scores 0.0.
pub fn iou(a: &BinaryShape, b: &BinaryShape) -> Result<f64> {
    a.check_dims(b)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&pa, &pb) in a.pixels.iter().zip(&b.pixels) {
        inter += (pa & pb) as usize;
        union += (pa | pb) as usize;
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Arithmetic mean of the foreground coordinates.
pub fn center_of_mass(s: &BinaryShape) -> Result<Centroid> {
    let (n, sx, sy) = foreground_moments(s);
    if n == 0 {
        return Err(Error::EmptyForeground);
    }
    Ok(Centroid {
        x: sx as f64 / n as f64,
        y: sy as f64 / n as f64,
    })
}

/// Centroid rounded to the nearest pixel (halves round up), computed in
/// exact integer arithmetic so integer translations shift it exactly.
pub fn rounded_center(s: &BinaryShape) -> Result<(i64, i64)> {
    let (n, sx, sy) = foreground_moments(s);
    if n == 0 {
        return Err(Error::EmptyForeground);
    }
    Ok((round_div(sx as i64, n as i64), round_div(sy as i64, n as i64)))
}

pub(crate) fn round_div(num: i64, den: i64) -> i64 {
    (2 * num + den).div_euclid(2 * den)
}

fn foreground_moments(s: &BinaryShape) -> (u64, u64, u64) {
    s.foreground()
        .fold((0, 0, 0), |(n, sx, sy), (x, y)| (n + 1, sx + x as u64, sy + y as u64))
}
