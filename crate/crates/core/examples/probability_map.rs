//! Builds a cluster probability map from a color image and its mask, then
//! sweeps the binarization threshold.
//!
//! cargo run --example probability_map

use shapebench::noise::{probability_map, threshold_probability, ColorImage};
use shapebench::{iou, synth};

fn main() -> shapebench::Result<()> {
    let mask = synth::ellipse(96, 96, 48.0, 50.0, 30.0, 22.0)?;
    // Object and background share one color family on the left half, so
    // some clusters straddle the boundary.
    let img = ColorImage::from_fn(96, 96, |x, y| {
        let shade = ((x + 2 * y) % 30) as u8;
        match (mask.get(x, y), x < 40) {
            (true, _) => [200 - shade, 60, 40],
            (false, true) => [180 - shade, 70, 50],
            (false, false) => [30, 80 + shade, 170],
        }
    })?;
    for k in [1, 2, 4, 8] {
        let (pm, clusters) = probability_map(&img, &mask, k, 0)?;
        let mut per_cluster: Vec<String> = (0..k)
            .map(|j| {
                let (f, b) = (clusters.fg_counts[j], clusters.bg_counts[j]);
                format!("{:.2}", f as f64 / (f + b).max(1) as f64)
            })
            .collect();
        per_cluster.sort();
        let ious: Vec<String> = [0.1, 0.3, 0.5, 0.7, 0.9]
            .iter()
            .map(|&t| Ok(format!("t={t}: {:.3}", iou(&threshold_probability(&pm, t)?, &mask)?)))
            .collect::<shapebench::Result<_>>()?;
        println!("k={k}  P per cluster [{}]", per_cluster.join(", "));
        println!("      {}", ious.join("  "));
    }
    Ok(())
}
