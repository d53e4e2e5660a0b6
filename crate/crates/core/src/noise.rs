//! Noise processes that corrupt clean shapes.
//!
//! Every generator is a pure function of its inputs and a 64-bit seed.

use std::fmt;

use rand::seq::IndexedRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmeans;
use crate::seed;
use crate::shape::BinaryShape;

/// 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl ColorImage {
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::param(format!(
                "color image {width}x{height} needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> [u8; 3]) -> Result<Self> {
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::from_pixels(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    /// ITU-R 601 luma scaled by 1000 (`299 r + 587 g + 114 b`), exact in integers.
    pub fn luma_milli(&self, x: usize, y: usize) -> u32 {
        let [r, g, b] = self.get(x, y);
        299 * r as u32 + 587 * g as u32 + 114 * b as u32
    }

    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<ColorImage> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::param(format!(
                "crop {w}x{h}+{x0}+{y0} outside {}x{} image",
                self.width, self.height
            )));
        }
        ColorImage::from_fn(w, h, |x, y| self.get(x0 + x, y0 + y))
    }

    /// Uniformly placed `w x h` crop.
    pub fn random_patch(&self, w: usize, h: usize, seed: u64) -> Result<ColorImage> {
        if w > self.width || h > self.height {
            return Err(Error::param(format!(
                "patch {w}x{h} larger than {}x{} image",
                self.width, self.height
            )));
        }
        let mut rng = seed::rng(seed);
        let x0 = rng.random_range(0..=self.width - w);
        let y0 = rng.random_range(0..=self.height - h);
        self.crop(x0, y0, w, h)
    }
}

/// Per-pixel foreground probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ProbabilityMap {
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::param("probability map dimensions do not match values"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::param("probabilities must lie in [0, 1]"));
        }
        Ok(Self { width, height, values })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

/// Cluster labels and per-cluster foreground/background pixel counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub k: usize,
    /// Row-major cluster index in `0..k`.
    pub labels: Vec<usize>,
    pub fg_counts: Vec<usize>,
    pub bg_counts: Vec<usize>,
}

/// Axis-aligned rectangle; may extend past the canvas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
}

impl Rect {
    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }
}

/// Flips every pixel independently with probability `p`.
pub fn salt_pepper(s: &BinaryShape, p: f64, seed: u64) -> Result<BinaryShape> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("flip probability {p} outside [0, 1]")));
    }
    let mut rng = seed::rng(seed);
    let pixels = s
        .pixels()
        .iter()
        .map(|&v| if rng.random_bool(p) { 1 - v } else { v })
        .collect();
    BinaryShape::from_pixels(s.width(), s.height(), pixels)
}

/// Sets every pixel within distance `r` of `(cx, cy)` to `value`, clipped to
/// the canvas. Returns the number of pixels that changed.
pub fn stamp_disk(s: &mut BinaryShape, cx: usize, cy: usize, r: u32, value: bool) -> usize {
    let r = r as i64;
    let (cx, cy) = (cx as i64, cy as i64);
    let mut changed = 0;
    for y in (cy - r).max(0)..=(cy + r).min(s.height() as i64 - 1) {
        for x in (cx - r).max(0)..=(cx + r).min(s.width() as i64 - 1) {
            let (dx, dy) = (x - cx, y - cy);
            if dx * dx + dy * dy <= r * r && s.get(x as usize, y as usize) != value {
                s.set(x as usize, y as usize, value);
                changed += 1;
            }
        }
    }
    changed
}

/// Default number of disks for circle noise: `ceil(boundary / (4 r))`,
/// and zero when `r = 0` so the smallest radius is the clean level.
pub fn default_circle_count(s: &BinaryShape, r: u32) -> usize {
    if r == 0 {
        return 0;
    }
    s.boundary().len().div_ceil(4 * r as usize)
}

/// Adds bumps or bites of radius `r` at `count` random boundary pixels.
///
/// Each round draws a boundary pixel of the current shape uniformly, then a
/// fair coin: heads fills the disk, tails clears it. Stops early if the
/// shape loses its boundary.
pub fn circle_noise(s: &BinaryShape, r: u32, count: usize, seed: u64) -> Result<BinaryShape> {
    let mut out = s.clone();
    let mut boundary = out.boundary();
    if boundary.is_empty() {
        return Err(if s.foreground_count() == 0 {
            Error::EmptyForeground
        } else {
            Error::EmptyBoundary
        });
    }
    let mut rng = seed::rng(seed);
    for i in 0..count {
        if i > 0 {
            boundary = out.boundary();
            if boundary.is_empty() {
                break;
            }
        }
        let &(cx, cy) = boundary.choose(&mut rng).expect("nonempty boundary");
        let add = rng.random_bool(0.5);
        stamp_disk(&mut out, cx, cy, r, add);
    }
    Ok(out)
}

/// Replaces background pixels with the thresholded luma of `patch`.
pub fn real_image_noise(s: &BinaryShape, patch: &ColorImage, t: f64) -> Result<BinaryShape> {
    if patch.width() != s.width() || patch.height() != s.height() {
        return Err(Error::DimensionMismatch {
            left_w: s.width(),
            left_h: s.height(),
            right_w: patch.width(),
            right_h: patch.height(),
        });
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::param(format!("threshold {t} outside [0, 1]")));
    }
    BinaryShape::from_fn(s.width(), s.height(), |x, y| {
        s.get(x, y) || patch.luma_milli(x, y) as f64 / 255_000.0 >= t
    })
}

/// Clears every pixel inside `rect`.
pub fn occlusion_noise(s: &BinaryShape, rect: Rect) -> Result<BinaryShape> {
    if rect.w <= 0 || rect.h <= 0 {
        return Err(Error::param(format!("degenerate occluder {}x{}", rect.w, rect.h)));
    }
    let (w, h) = (s.width() as i64, s.height() as i64);
    if rect.x >= w || rect.y >= h || rect.x + rect.w <= 0 || rect.y + rect.h <= 0 {
        return Err(Error::param("occluder does not intersect the canvas"));
    }
    BinaryShape::from_fn(s.width(), s.height(), |x, y| {
        s.get(x, y) && !rect.contains(x as i64, y as i64)
    })
}

/// Draws an occluder inside the foreground bounding box. Each side is
/// uniform in `[ceil(0.2 L), ceil(0.6 L)]` for the box side `L`; position is
/// uniform among placements that keep the rectangle inside the box.
pub fn sample_occluder(s: &BinaryShape, seed: u64) -> Result<Rect> {
    let (x0, y0, x1, y1) = s.bounding_box().ok_or(Error::EmptyForeground)?;
    let (bw, bh) = ((x1 - x0 + 1) as i64, (y1 - y0 + 1) as i64);
    let side = |len: i64| {
        let lo = (0.2 * len as f64).ceil() as i64;
        let hi = (0.6 * len as f64).ceil() as i64;
        (lo.max(1), hi.max(1))
    };
    let mut rng = seed::rng(seed);
    let (wl, wh) = side(bw);
    let (hl, hh) = side(bh);
    let w = rng.random_range(wl..=wh);
    let h = rng.random_range(hl..=hh);
    let x = x0 as i64 + rng.random_range(0..=bw - w);
    let y = y0 as i64 + rng.random_range(0..=bh - h);
    Ok(Rect { x, y, w, h })
}

/// Clusters the image colors with k-means and maps every pixel to the
/// fraction of its cluster that lies in the mask foreground.
pub fn probability_map(
    img: &ColorImage,
    mask: &BinaryShape,
    k: usize,
    seed: u64,
) -> Result<(ProbabilityMap, ClusterAssignment)> {
    if img.width() != mask.width() || img.height() != mask.height() {
        return Err(Error::DimensionMismatch {
            left_w: img.width(),
            left_h: img.height(),
            right_w: mask.width(),
            right_h: mask.height(),
        });
    }
    let points: Vec<kmeans::Point> = img
        .pixels()
        .iter()
        .map(|&[r, g, b]| [r as f64, g as f64, b as f64])
        .collect();
    let km = kmeans::kmeans(&points, k, kmeans::DEFAULT_MAX_ITER, seed)?;
    let mut fg_counts = vec![0usize; k];
    let mut bg_counts = vec![0usize; k];
    for (&label, &m) in km.labels.iter().zip(mask.pixels()) {
        if m == 1 {
            fg_counts[label] += 1;
        } else {
            bg_counts[label] += 1;
        }
    }
    let values = km
        .labels
        .iter()
        .map(|&j| fg_counts[j] as f64 / (fg_counts[j] + bg_counts[j]) as f64)
        .collect();
    let pm = ProbabilityMap::from_values(img.width(), img.height(), values)?;
    Ok((
        pm,
        ClusterAssignment {
            k,
            labels: km.labels,
            fg_counts,
            bg_counts,
        },
    ))
}

/// Foreground wherever `P >= t`.
pub fn threshold_probability(pm: &ProbabilityMap, t: f64) -> Result<BinaryShape> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::param(format!("threshold {t} outside [0, 1]")));
    }
    let pixels = pm.values().iter().map(|&v| (v >= t) as u8).collect();
    BinaryShape::from_pixels(pm.width(), pm.height(), pixels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    SaltPepper,
    Circle,
    RealImage,
    Occlusion,
    ThreshProb,
    DetectionExternal,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 6] = [
        NoiseKind::SaltPepper,
        NoiseKind::Circle,
        NoiseKind::RealImage,
        NoiseKind::Occlusion,
        NoiseKind::ThreshProb,
        NoiseKind::DetectionExternal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::SaltPepper => "salt_pepper",
            NoiseKind::Circle => "circle",
            NoiseKind::RealImage => "real_image",
            NoiseKind::Occlusion => "occlusion",
            NoiseKind::ThreshProb => "thresh_prob",
            NoiseKind::DetectionExternal => "detection_external",
        }
    }

    /// Section title used in rendered reports.
    pub fn title(self) -> &'static str {
        match self {
            NoiseKind::SaltPepper => "Salt and Pepper Noise",
            NoiseKind::Circle => "Circle Noise",
            NoiseKind::RealImage => "Real Image Noise",
            NoiseKind::Occlusion => "Occlusion Noise",
            NoiseKind::ThreshProb => "Thresholded Probability Noise",
            NoiseKind::DetectionExternal => "Detection Image Noise",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match norm.as_str() {
            "salt_pepper" | "salt" | "salt_and_pepper" => NoiseKind::SaltPepper,
            "circle" => NoiseKind::Circle,
            "real_image" | "real" => NoiseKind::RealImage,
            "occlusion" => NoiseKind::Occlusion,
            "thresh_prob" | "thresholded_probability" => NoiseKind::ThreshProb,
            "detection_external" | "detection" => NoiseKind::DetectionExternal,
            _ => return Err(Error::param(format!("unknown noise kind '{s}'"))),
        })
    }
}

/// Parameters of one noise process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseParams {
    SaltPepper {
        p: f64,
    },
    /// `count = None` uses [`default_circle_count`].
    Circle {
        radius: u32,
        count: Option<usize>,
    },
    RealImage {
        threshold: f64,
    },
    /// `rect = None` samples one with [`sample_occluder`].
    Occlusion {
        rect: Option<Rect>,
    },
    ThreshProb {
        k: usize,
        threshold: f64,
    },
    DetectionExternal,
}

/// A noise process together with the seed that drives it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub params: NoiseParams,
    pub seed: u64,
}

/// Side inputs some noise processes need.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoiseInputs<'a> {
    /// Natural-image patch for real image noise, same size as the shape.
    pub patch: Option<&'a ColorImage>,
    /// Color image the mask was segmented from, for thresholded probability noise.
    pub color: Option<&'a ColorImage>,
}

impl NoiseParams {
    pub fn kind(&self) -> NoiseKind {
        match self {
            NoiseParams::SaltPepper { .. } => NoiseKind::SaltPepper,
            NoiseParams::Circle { .. } => NoiseKind::Circle,
            NoiseParams::RealImage { .. } => NoiseKind::RealImage,
            NoiseParams::Occlusion { .. } => NoiseKind::Occlusion,
            NoiseParams::ThreshProb { .. } => NoiseKind::ThreshProb,
            NoiseParams::DetectionExternal => NoiseKind::DetectionExternal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::param(format!("{name} = {v} outside [0, 1]")))
            }
        };
        match *self {
            NoiseParams::SaltPepper { p } => unit("p", p),
            NoiseParams::RealImage { threshold } => unit("t", threshold),
            NoiseParams::ThreshProb { k, threshold } => {
                if k == 0 {
                    return Err(Error::param("k must be at least 1"));
                }
                unit("t", threshold)
            }
            NoiseParams::Occlusion { rect: Some(r) } if r.w <= 0 || r.h <= 0 => {
                Err(Error::param("degenerate occluder"))
            }
            _ => Ok(()),
        }
    }

    /// `key=value` pairs joined by `;`.
    pub fn to_param_string(&self) -> String {
        match *self {
            NoiseParams::SaltPepper { p } => format!("p={p}"),
            NoiseParams::Circle { radius, count: None } => format!("r={radius}"),
            NoiseParams::Circle { radius, count: Some(c) } => format!("r={radius};count={c}"),
            NoiseParams::RealImage { threshold } => format!("t={threshold}"),
            NoiseParams::Occlusion { rect: None } => String::new(),
            NoiseParams::Occlusion { rect: Some(r) } => {
                format!("x={};y={};w={};h={}", r.x, r.y, r.w, r.h)
            }
            NoiseParams::ThreshProb { k, threshold } => format!("k={k};t={threshold}"),
            NoiseParams::DetectionExternal => String::new(),
        }
    }

    pub fn parse(kind: NoiseKind, text: &str) -> Result<NoiseParams> {
        let mut pairs = Vec::new();
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::param(format!("expected key=value, got '{part}'")))?;
            pairs.push((k.trim(), v.trim()));
        }
        let get = |key: &str| pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::param(format!("cannot parse {key}='{v}'")))
        }
        let need = |key: &str| get(key).ok_or_else(|| Error::param(format!("missing parameter '{key}'")));
        let params = match kind {
            NoiseKind::SaltPepper => NoiseParams::SaltPepper {
                p: num("p", need("p")?)?,
            },
            NoiseKind::Circle => NoiseParams::Circle {
                radius: num("r", need("r")?)?,
                count: get("count").map(|v| num("count", v)).transpose()?,
            },
            NoiseKind::RealImage => NoiseParams::RealImage {
                threshold: num("t", need("t")?)?,
            },
            NoiseKind::Occlusion => match get("x") {
                None => NoiseParams::Occlusion { rect: None },
                Some(x) => NoiseParams::Occlusion {
                    rect: Some(Rect {
                        x: num("x", x)?,
                        y: num("y", need("y")?)?,
                        w: num("w", need("w")?)?,
                        h: num("h", need("h")?)?,
                    }),
                },
            },
            NoiseKind::ThreshProb => NoiseParams::ThreshProb {
                k: get("k").map(|v| num("k", v)).transpose()?.unwrap_or(10),
                threshold: num("t", need("t")?)?,
            },
            NoiseKind::DetectionExternal => NoiseParams::DetectionExternal,
        };
        params.validate()?;
        Ok(params)
    }
}

impl NoiseSpec {
    pub fn new(params: NoiseParams, seed: u64) -> Self {
        Self { params, seed }
    }

    pub fn kind(&self) -> NoiseKind {
        self.params.kind()
    }

    /// Runs the process on a clean shape.
    pub fn apply(&self, s: &BinaryShape, inputs: NoiseInputs<'_>) -> Result<BinaryShape> {
        self.params.validate()?;
        match self.params {
            NoiseParams::SaltPepper { p } => salt_pepper(s, p, self.seed),
            NoiseParams::Circle { radius, count } => {
                let count = count.unwrap_or_else(|| default_circle_count(s, radius));
                circle_noise(s, radius, count, self.seed)
            }
            NoiseParams::RealImage { threshold } => {
                let patch = inputs
                    .patch
                    .ok_or_else(|| Error::param("real image noise needs a color patch"))?;
                real_image_noise(s, patch, threshold)
            }
            NoiseParams::Occlusion { rect } => {
                let rect = match rect {
                    Some(r) => r,
                    None => sample_occluder(s, self.seed)?,
                };
                occlusion_noise(s, rect)
            }
            NoiseParams::ThreshProb { k, threshold } => {
                let color = inputs
                    .color
                    .ok_or_else(|| Error::param("thresholded probability noise needs the color image"))?;
                let (pm, _) = probability_map(color, s, k, self.seed)?;
                threshold_probability(&pm, threshold)
            }
            NoiseParams::DetectionExternal => Err(Error::param(
                "detection noise is not generated; ingest external detector masks instead",
            )),
        }
    }
}

/// Flip probabilities `0, 0.01, ..., 0.15`.
pub fn default_flip_grid() -> Vec<f64> {
    (0..=15).map(|i| i as f64 / 100.0).collect()
}

/// Circle radii `0, 1, ..., 10`.
pub fn default_radius_grid() -> Vec<u32> {
    (0..=10).collect()
}

/// Binarization thresholds `10/255, 20/255, ..., 250/255`.
pub fn default_threshold_grid() -> Vec<f64> {
    (1..=25).map(|i| (10 * i) as f64 / 255.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::iou;
    use crate::synth;

    fn disk128() -> BinaryShape {
        synth::disk(128, 128, 64.0, 64.0, 40.0).unwrap()
    }

    #[test]
    fn salt_pepper_extremes() {
        let s = disk128();
        assert_eq!(salt_pepper(&s, 0.0, 1).unwrap(), s);
        assert_eq!(salt_pepper(&s, 1.0, 1).unwrap(), s.complement());
        assert!(salt_pepper(&s, 1.5, 1).is_err());
    }

    #[test]
    fn salt_pepper_flip_count_is_binomial() {
        let s = disk128();
        for seed in 0..5 {
            let n = salt_pepper(&s, 0.1, seed).unwrap();
            let flipped = s.pixels().iter().zip(n.pixels()).filter(|(a, b)| a != b).count() as f64;
            assert!((flipped - 1638.4).abs() <= 153.6, "seed {seed}: {flipped}");
        }
    }

    #[test]
    fn salt_pepper_is_deterministic() {
        let s = disk128();
        assert_eq!(salt_pepper(&s, 0.07, 9).unwrap(), salt_pepper(&s, 0.07, 9).unwrap());
        assert_ne!(salt_pepper(&s, 0.07, 9).unwrap(), salt_pepper(&s, 0.07, 10).unwrap());
    }

    #[test]
    fn circle_zero_count_is_identity() {
        let s = disk128();
        assert_eq!(circle_noise(&s, 0, 0, 3).unwrap(), s);
        assert_eq!(circle_noise(&s, 4, 0, 3).unwrap(), s);
        assert_eq!(default_circle_count(&s, 0), 0);
    }

    #[test]
    fn circle_radius_zero_only_removes_single_pixels() {
        // Adding a radius-0 disk on a boundary pixel is a no-op; punching
        // removes exactly that pixel.
        let s = disk128();
        let out = circle_noise(&s, 0, 25, 3).unwrap();
        assert!(out.is_subset_of(&s));
        let removed = s.foreground_count() - out.foreground_count();
        assert!((1..=25).contains(&removed), "{removed}");
    }

    #[test]
    fn forced_add_on_square_edge() {
        // 40x40 square at columns/rows 44..84; midpoint of its right edge.
        let s = synth::rectangle(128, 128, 44, 44, 40, 40).unwrap();
        let (cx, cy) = (83usize, 64usize);
        assert!(s.boundary().contains(&(cx, cy)));
        // Oracle: count disk pixels that are currently background.
        let mut expect = 0;
        for y in 0..128i64 {
            for x in 0..128i64 {
                let (dx, dy) = (x - cx as i64, y - cy as i64);
                if dx * dx + dy * dy <= 25 && !s.get(x as usize, y as usize) {
                    expect += 1;
                }
            }
        }
        let mut out = s.clone();
        let changed = stamp_disk(&mut out, cx, cy, 5, true);
        assert_eq!(changed, expect);
        assert_eq!(out.foreground_count(), s.foreground_count() + expect);
        // 81 pixels in the disk; the 11-pixel column through the center and
        // everything left of it is already foreground.
        assert_eq!(expect, 35);
    }

    #[test]
    fn circle_noise_is_deterministic_and_checks_input() {
        let s = disk128();
        let a = circle_noise(&s, 5, 12, 77).unwrap();
        assert_eq!(a, circle_noise(&s, 5, 12, 77).unwrap());
        assert_ne!(a, s);
        let empty = BinaryShape::new(8, 8).unwrap();
        assert!(matches!(circle_noise(&empty, 2, 1, 0), Err(Error::EmptyForeground)));
    }

    #[test]
    fn real_image_noise_rules() {
        let s = BinaryShape::from_fn(2, 2, |x, y| x == 0 && y == 0).unwrap();
        let gray = |v: u8| [v, v, v];
        let patch = ColorImage::from_fn(2, 2, |x, y| match (x, y) {
            (0, 0) => gray(10),
            (1, 0) => gray(200),
            (0, 1) => gray(30),
            _ => gray(250),
        })
        .unwrap();
        let out = real_image_noise(&s, &patch, 100.0 / 255.0).unwrap();
        let expect = BinaryShape::from_fn(2, 2, |x, y| matches!((x, y), (0, 0) | (1, 0) | (1, 1))).unwrap();
        assert_eq!(out, expect);
        assert_eq!(real_image_noise(&s, &patch, 251.0 / 255.0).unwrap(), s);
        assert_eq!(
            real_image_noise(&s, &patch, 0.0).unwrap(),
            BinaryShape::filled(2, 2, true).unwrap()
        );
    }

    #[test]
    fn real_image_threshold_is_exact_on_gray_levels() {
        let s = BinaryShape::new(1, 1).unwrap();
        for v in 0..=255u8 {
            let patch = ColorImage::from_pixels(1, 1, vec![[v, v, v]]).unwrap();
            let t = v as f64 / 255.0;
            assert!(real_image_noise(&s, &patch, t).unwrap().get(0, 0), "level {v}");
        }
    }

    #[test]
    fn real_image_rejects_mismatch() {
        let s = BinaryShape::new(3, 3).unwrap();
        let patch = ColorImage::from_fn(2, 3, |_, _| [0; 3]).unwrap();
        assert!(matches!(
            real_image_noise(&s, &patch, 0.5),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn occlusion_examples() {
        let sq = synth::rectangle(20, 20, 5, 5, 10, 10).unwrap();
        let half = occlusion_noise(
            &sq,
            Rect {
                x: 10,
                y: 5,
                w: 5,
                h: 10,
            },
        )
        .unwrap();
        assert_eq!(half.foreground_count(), 50);

        let bg = occlusion_noise(&sq, Rect { x: 0, y: 0, w: 4, h: 4 }).unwrap();
        assert_eq!(bg, sq);

        let all = occlusion_noise(
            &sq,
            Rect {
                x: 0,
                y: 0,
                w: 20,
                h: 20,
            },
        )
        .unwrap();
        assert_eq!(all.foreground_count(), 0);

        assert!(occlusion_noise(&sq, Rect { x: 0, y: 0, w: 0, h: 3 }).is_err());
        assert!(occlusion_noise(
            &sq,
            Rect {
                x: 30,
                y: 0,
                w: 2,
                h: 3
            }
        )
        .is_err());
    }

    #[test]
    fn sampled_occluder_stays_in_bbox() {
        let s = disk128();
        let (x0, y0, x1, y1) = s.bounding_box().unwrap();
        for seed in 0..50 {
            let r = sample_occluder(&s, seed).unwrap();
            assert!(r.x >= x0 as i64 && r.y >= y0 as i64);
            assert!(r.x + r.w <= x1 as i64 + 1 && r.y + r.h <= y1 as i64 + 1);
            assert!(r.w >= 17 && r.w <= 49);
        }
    }

    fn red_blue() -> (ColorImage, BinaryShape) {
        let mask = synth::disk(32, 32, 15.0, 16.0, 9.0).unwrap();
        let img = ColorImage::from_fn(32, 32, |x, y| if mask.get(x, y) { [255, 0, 0] } else { [0, 0, 255] }).unwrap();
        (img, mask)
    }

    #[test]
    fn probability_map_single_cluster() {
        let (img, mask) = red_blue();
        let (pm, ca) = probability_map(&img, &mask, 1, 0).unwrap();
        let expect = mask.foreground_count() as f64 / mask.len() as f64;
        assert!(pm.values().iter().all(|&v| v == expect));
        assert_eq!(ca.fg_counts[0] + ca.bg_counts[0], mask.len());
    }

    #[test]
    fn probability_map_separable_recovers_mask() {
        let (img, mask) = red_blue();
        let (pm, _) = probability_map(&img, &mask, 2, 4).unwrap();
        for (v, &m) in pm.values().iter().zip(mask.pixels()) {
            assert_eq!(*v, m as f64);
        }
        assert_eq!(threshold_probability(&pm, 0.5).unwrap(), mask);
        assert_eq!(threshold_probability(&pm, 1.0).unwrap(), mask);
        assert_eq!(
            threshold_probability(&pm, 0.0).unwrap(),
            BinaryShape::filled(32, 32, true).unwrap()
        );
    }

    #[test]
    fn probability_of_mixed_cluster() {
        // Two colors; the green cluster holds 3 foreground and 1 background pixel.
        let img = ColorImage::from_pixels(
            3,
            2,
            vec![[0, 255, 0], [0, 255, 0], [0, 255, 0], [0, 255, 0], [9, 9, 9], [9, 9, 9]],
        )
        .unwrap();
        let mask = BinaryShape::from_pixels(3, 2, vec![1, 1, 1, 0, 0, 0]).unwrap();
        let (pm, ca) = probability_map(&img, &mask, 2, 0).unwrap();
        assert_eq!(&pm.values()[..4], &[0.75; 4]);
        assert_eq!(&pm.values()[4..], &[0.0; 2]);
        let total: usize = ca.fg_counts.iter().chain(&ca.bg_counts).sum();
        assert_eq!(total, 6);
    }

    #[test]
    fn probability_map_errors() {
        let (img, mask) = red_blue();
        assert!(matches!(
            probability_map(&img, &mask, 3, 0),
            Err(Error::TooManyClusters { .. })
        ));
        let small = BinaryShape::new(4, 4).unwrap();
        assert!(probability_map(&img, &small, 1, 0).is_err());
    }

    #[test]
    fn params_text_round_trip() {
        let cases = [
            NoiseParams::SaltPepper { p: 0.05 },
            NoiseParams::Circle { radius: 3, count: None },
            NoiseParams::Circle {
                radius: 3,
                count: Some(9),
            },
            NoiseParams::RealImage {
                threshold: 30.0 / 255.0,
            },
            NoiseParams::Occlusion { rect: None },
            NoiseParams::Occlusion {
                rect: Some(Rect {
                    x: -2,
                    y: 3,
                    w: 10,
                    h: 4,
                }),
            },
            NoiseParams::ThreshProb { k: 10, threshold: 0.4 },
            NoiseParams::DetectionExternal,
        ];
        for c in cases {
            let text = c.to_param_string();
            assert_eq!(NoiseParams::parse(c.kind(), &text).unwrap(), c, "{text}");
        }
        assert!(NoiseParams::parse(NoiseKind::SaltPepper, "p=2").is_err());
        assert!(NoiseParams::parse(NoiseKind::SaltPepper, "q=0.1").is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in NoiseKind::ALL {
            assert_eq!(k.as_str().parse::<NoiseKind>().unwrap(), k);
        }
        assert_eq!("salt".parse::<NoiseKind>().unwrap(), NoiseKind::SaltPepper);
    }

    #[test]
    fn default_grids() {
        assert_eq!(default_flip_grid().len(), 16);
        assert_eq!(default_radius_grid().len(), 11);
        let t = default_threshold_grid();
        assert_eq!(t.len(), 25);
        assert_eq!(t[0], 10.0 / 255.0);
        assert_eq!(t[24], 250.0 / 255.0);
    }

    #[test]
    fn spec_apply_dispatches() {
        let s = disk128();
        let spec = NoiseSpec::new(NoiseParams::SaltPepper { p: 0.0 }, 1);
        assert_eq!(spec.apply(&s, NoiseInputs::default()).unwrap(), s);
        let occ = NoiseSpec::new(NoiseParams::Occlusion { rect: None }, 1)
            .apply(&s, NoiseInputs::default())
            .unwrap();
        assert!(occ.is_subset_of(&s));
        assert!(iou(&occ, &s).unwrap() < 1.0);
        let real = NoiseSpec::new(NoiseParams::RealImage { threshold: 0.5 }, 1);
        assert!(real.apply(&s, NoiseInputs::default()).is_err());
        let det = NoiseSpec::new(NoiseParams::DetectionExternal, 1);
        assert!(det.apply(&s, NoiseInputs::default()).is_err());
    }
}
