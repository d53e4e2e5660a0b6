//! Applies every noise process to one aligned shape and reports the input IoU.
//!
//! cargo run --example noise_gallery [OUT_DIR]

use shapebench::noise::{
    circle_noise, default_circle_count, occlusion_noise, probability_map, real_image_noise, salt_pepper,
    sample_occluder, threshold_probability, ColorImage,
};
use shapebench::{align, iou, synth, AlignmentParams, BinaryShape};

fn main() -> shapebench::Result<()> {
    let out_dir = std::env::args().nth(1);
    let raw = synth::Blob::random(160, 160, 40.0, 50.0, 10.0, 0.3, 11).rasterize(160, 160)?;
    let clean = align(&raw, &AlignmentParams::default())?;

    // A smooth synthetic "photo" stands in for a natural-image patch.
    let patch = ColorImage::from_fn(128, 128, |x, y| {
        let v = ((x as f64 / 9.0).sin() * (y as f64 / 13.0).cos() * 127.0 + 128.0) as u8;
        [v, v / 2 + 40, 255 - v]
    })?;
    // A color image the clean mask could have been segmented from.
    let photo = ColorImage::from_fn(128, 128, |x, y| {
        let jitter = ((x * 7 + y * 13) % 40) as u8;
        if clean.get(x, y) {
            [150 + jitter, 60, 50 + jitter / 2]
        } else if (x / 16 + y / 16) % 3 == 0 {
            [140 + jitter, 70, 60]
        } else {
            [40, 90 + jitter, 160]
        }
    })?;
    let (pm, _) = probability_map(&photo, &clean, 6, 3)?;

    let gallery: Vec<(String, BinaryShape)> = vec![
        ("salt p=0.05".into(), salt_pepper(&clean, 0.05, 1)?),
        ("salt p=0.15".into(), salt_pepper(&clean, 0.15, 1)?),
        (
            format!("circle r=4 x{}", default_circle_count(&clean, 4)),
            circle_noise(&clean, 4, default_circle_count(&clean, 4), 2)?,
        ),
        ("circle r=8 x10".into(), circle_noise(&clean, 8, 10, 2)?),
        ("real t=0.4".into(), real_image_noise(&clean, &patch, 0.4)?),
        ("real t=0.6".into(), real_image_noise(&clean, &patch, 0.6)?),
        (
            "occlusion".into(),
            occlusion_noise(&clean, sample_occluder(&clean, 4)?)?,
        ),
        ("thresh-prob t=0.3".into(), threshold_probability(&pm, 0.3)?),
        ("thresh-prob t=0.7".into(), threshold_probability(&pm, 0.7)?),
    ];
    for (i, (name, noisy)) in gallery.iter().enumerate() {
        println!("{name:<20} input IoU {:.3}", iou(&clean, noisy)?);
        if let Some(dir) = &out_dir {
            std::fs::create_dir_all(dir)?;
            shapebench::io::save_mask(noisy, format!("{dir}/noise_{i:02}.png"))?;
        }
    }
    if let Some(dir) = &out_dir {
        shapebench::io::save_mask(&clean, format!("{dir}/clean.png"))?;
    }
    Ok(())
}
