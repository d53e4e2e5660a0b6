//! Aligns a few raw masks of different sizes and placements.
//!
//! cargo run --example align_masks [OUT_DIR]

use shapebench::{align, center_of_mass, radial_percentile, synth, AlignmentParams};

fn main() -> shapebench::Result<()> {
    let out_dir = std::env::args().nth(1);
    let params = AlignmentParams::default();
    let raw = [
        ("small_disk", synth::disk(60, 50, 18.0, 30.0, 9.0)?),
        ("wide_ellipse", synth::ellipse(240, 120, 150.0, 55.0, 70.0, 30.0)?),
        (
            "blob",
            synth::Blob::random(200, 200, 45.0, 60.0, 30.0, 0.3, 7).rasterize(200, 200)?,
        ),
    ];
    println!(
        "{:<14} {:>9} {:>16} {:>9} {:>16}",
        "mask", "p80", "centroid", "p80'", "centroid'"
    );
    for (name, s) in &raw {
        let before = (radial_percentile(s, 0.8)?, center_of_mass(s)?);
        let aligned = align(s, &params)?;
        let after = (radial_percentile(&aligned, 0.8)?, center_of_mass(&aligned)?);
        println!(
            "{name:<14} {:>9.2} {:>16} {:>9.2} {:>16}",
            before.0,
            format!("({:.1}, {:.1})", before.1.x, before.1.y),
            after.0,
            format!("({:.1}, {:.1})", after.1.x, after.1.y),
        );
        if let Some(dir) = &out_dir {
            std::fs::create_dir_all(dir)?;
            shapebench::io::save_mask(s, format!("{dir}/{name}_raw.png"))?;
            shapebench::io::save_mask(&aligned, format!("{dir}/{name}_aligned.png"))?;
        }
    }
    Ok(())
}
