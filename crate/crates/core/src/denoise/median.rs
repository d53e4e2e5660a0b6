use crate::error::{Error, Result};
use crate::shape::BinaryShape;

/// Majority vote over each `window x window` neighborhood, clipped to the
/// canvas. Ties, which only occur on clipped windows with an even pixel
/// count, resolve to foreground.
pub fn denoise_median(noisy: &BinaryShape, window: usize) -> Result<BinaryShape> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::param(format!("median window {window} must be odd and positive")));
    }
    let (w, h) = (noisy.width(), noisy.height());
    // Summed-area table with a zero row and column in front.
    let stride = w + 1;
    let mut sat = vec![0u32; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0u32;
        for x in 0..w {
            row += noisy.get(x, y) as u32;
            sat[(y + 1) * stride + x + 1] = sat[y * stride + x + 1] + row;
        }
    }
    let half = window / 2;
    BinaryShape::from_fn(w, h, |x, y| {
        let (x0, y0) = (x.saturating_sub(half), y.saturating_sub(half));
        let (x1, y1) = ((x + half + 1).min(w), (y + half + 1).min(h));
        let ones = sat[y1 * stride + x1] + sat[y0 * stride + x0] - sat[y0 * stride + x1] - sat[y1 * stride + x0];
        let total = ((x1 - x0) * (y1 - y0)) as u32;
        2 * ones >= total
    })
}
