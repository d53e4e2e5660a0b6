//! Compares the morphological and median baselines on salt-and-pepper and
//! circle noise.
//!
//! cargo run --example morphology_median

use shapebench::denoise::{close, denoise_median, denoise_morphological, open};
use shapebench::noise::{circle_noise, salt_pepper};
use shapebench::{iou, synth};

fn main() -> shapebench::Result<()> {
    let clean = synth::Blob::random(128, 128, 38.0, 42.0, 2.0, 0.25, 5).rasterize(128, 128)?;
    let cases = [
        ("salt 0.05", salt_pepper(&clean, 0.05, 1)?),
        ("salt 0.15", salt_pepper(&clean, 0.15, 1)?),
        ("circle r=3", circle_noise(&clean, 3, 40, 1)?),
        ("circle r=6", circle_noise(&clean, 6, 20, 1)?),
    ];
    println!(
        "{:<11} {:>6} {:>7} {:>7} {:>7} {:>8} {:>8}",
        "noise", "input", "open1", "close1", "morph1", "median3", "median5"
    );
    for (name, noisy) in &cases {
        println!(
            "{name:<11} {:>6.3} {:>7.3} {:>7.3} {:>7.3} {:>8.3} {:>8.3}",
            iou(noisy, &clean)?,
            iou(&open(noisy, 1), &clean)?,
            iou(&close(noisy, 1), &clean)?,
            iou(&denoise_morphological(noisy, 1), &clean)?,
            iou(&denoise_median(noisy, 3)?, &clean)?,
            iou(&denoise_median(noisy, 5)?, &clean)?,
        );
    }
    Ok(())
}
