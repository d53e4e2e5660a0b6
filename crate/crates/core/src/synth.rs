//! Synthetic shapes for tests, demos and smoke runs.

use std::f64::consts::TAU;

use rand::Rng as _;

use crate::error::Result;
use crate::seed;
use crate::shape::BinaryShape;

/// Filled disk `{(x - cx)^2 + (y - cy)^2 <= r^2}`.
pub fn disk(width: usize, height: usize, cx: f64, cy: f64, r: f64) -> Result<BinaryShape> {
    BinaryShape::from_fn(width, height, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        dx * dx + dy * dy <= r * r
    })
}

/// Filled axis-aligned ellipse with semi-axes `a` (horizontal) and `b` (vertical).
pub fn ellipse(width: usize, height: usize, cx: f64, cy: f64, a: f64, b: f64) -> Result<BinaryShape> {
    BinaryShape::from_fn(width, height, |x, y| {
        let dx = (x as f64 - cx) / a;
        let dy = (y as f64 - cy) / b;
        dx * dx + dy * dy <= 1.0
    })
}

/// Filled rectangle covering columns `x0..x0+w` and rows `y0..y0+h`.
pub fn rectangle(width: usize, height: usize, x0: usize, y0: usize, w: usize, h: usize) -> Result<BinaryShape> {
    BinaryShape::from_fn(width, height, |x, y| x >= x0 && x < x0 + w && y >= y0 && y < y0 + h)
}

/// Parameters of a star-shaped blob `r(theta) = radius * (1 + sum_k a_k cos(k theta + phi_k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
    /// `(amplitude, phase)` of harmonics 2, 3, ...
    pub harmonics: Vec<(f64, f64)>,
}

impl Blob {
    /// Random blob with mean radius in `[r_min, r_max]`, centered within
    /// `max_offset` pixels of the canvas center. Harmonic amplitudes sum to
    /// at most `roughness`.
    pub fn random(
        width: usize,
        height: usize,
        r_min: f64,
        r_max: f64,
        max_offset: f64,
        roughness: f64,
        seed: u64,
    ) -> Blob {
        let mut rng = seed::rng(seed);
        let radius = rng.random_range(r_min..=r_max);
        let cx = width as f64 / 2.0 + rng.random_range(-max_offset..=max_offset);
        let cy = height as f64 / 2.0 + rng.random_range(-max_offset..=max_offset);
        let count = rng.random_range(2..=4usize);
        let weights: Vec<f64> = (0..count).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = weights.iter().sum::<f64>().max(1e-9);
        let harmonics = weights
            .iter()
            .map(|w| (roughness * w / total, rng.random_range(0.0..TAU)))
            .collect();
        Blob {
            cx,
            cy,
            radius,
            harmonics,
        }
    }

    pub fn radius_at(&self, theta: f64) -> f64 {
        let wobble: f64 = self
            .harmonics
            .iter()
            .enumerate()
            .map(|(i, &(a, phi))| a * ((i as f64 + 2.0) * theta + phi).cos())
            .sum();
        self.radius * (1.0 + wobble)
    }

    pub fn rasterize(&self, width: usize, height: usize) -> Result<BinaryShape> {
        BinaryShape::from_fn(width, height, |x, y| {
            let dx = x as f64 - self.cx;
            let dy = y as f64 - self.cy;
            let rho = (dx * dx + dy * dy).sqrt();
            rho <= self.radius_at(dy.atan2(dx))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_area_is_close_to_pi_r_squared() {
        let d = disk(128, 128, 64.0, 64.0, 40.0).unwrap();
        let area = d.foreground_count() as f64;
        let expect = std::f64::consts::PI * 1600.0;
        assert!((area - expect).abs() / expect < 0.01);
    }

    #[test]
    fn blob_is_deterministic() {
        let a = Blob::random(128, 128, 20.0, 30.0, 5.0, 0.2, 11);
        let b = Blob::random(128, 128, 20.0, 30.0, 5.0, 0.2, 11);
        assert_eq!(a, b);
        assert!(a.rasterize(128, 128).unwrap().foreground_count() > 0);
    }
}
