//! Binary morphology with disk structuring elements.
//!
//! Structuring-element offsets that fall outside the canvas are ignored by
//! both erosion and dilation. The two operators then form an adjunction on
//! the canvas, so opening stays anti-extensive and idempotent and closing
//! stays extensive and idempotent, also for shapes touching the border.

use crate::shape::BinaryShape;

/// Offsets `(dx, dy)` with `dx^2 + dy^2 <= r^2`.
pub fn disk_element(radius: u32) -> Vec<(i64, i64)> {
    let r = radius as i64;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

fn apply(s: &BinaryShape, element: &[(i64, i64)], erode: bool) -> BinaryShape {
    let (w, h) = (s.width() as i64, s.height() as i64);
    BinaryShape::from_fn(s.width(), s.height(), |x, y| {
        let mut inside = element.iter().filter_map(|&(dx, dy)| {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            (nx >= 0 && ny >= 0 && nx < w && ny < h).then(|| s.get(nx as usize, ny as usize))
        });
        if erode {
            inside.all(|v| v)
        } else {
            inside.any(|v| v)
        }
    })
    .expect("dimensions come from an existing shape")
}

pub fn erode(s: &BinaryShape, radius: u32) -> BinaryShape {
    apply(s, &disk_element(radius), true)
}

pub fn dilate(s: &BinaryShape, radius: u32) -> BinaryShape {
    apply(s, &disk_element(radius), false)
}

pub fn open(s: &BinaryShape, radius: u32) -> BinaryShape {
    dilate(&erode(s, radius), radius)
}

pub fn close(s: &BinaryShape, radius: u32) -> BinaryShape {
    erode(&dilate(s, radius), radius)
}

/// Opening followed by closing.
pub fn denoise_morphological(noisy: &BinaryShape, radius: u32) -> BinaryShape {
    close(&open(noisy, radius), radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn element_sizes() {
        assert_eq!(disk_element(0), vec![(0, 0)]);
        assert_eq!(disk_element(1).len(), 5);
        assert_eq!(disk_element(2).len(), 13);
    }

    #[test]
    fn radius_zero_is_identity() {
        let s = synth::Blob::random(40, 40, 8.0, 12.0, 3.0, 0.3, 1)
            .rasterize(40, 40)
            .unwrap();
        assert_eq!(denoise_morphological(&s, 0), s);
    }

    #[test]
    fn closing_fills_single_hole() {
        let mut s = synth::rectangle(30, 30, 5, 5, 20, 20).unwrap();
        s.set(14, 14, false);
        let out = close(&s, 1);
        assert!(out.get(14, 14));
        assert!(denoise_morphological(&s, 1).get(14, 14));
    }

    #[test]
    fn dilation_on_border_is_clipped() {
        let s = BinaryShape::from_fn(5, 5, |x, y| x == 0 && y == 0).unwrap();
        let d = dilate(&s, 1);
        assert_eq!(d.foreground_count(), 3);
    }
}
