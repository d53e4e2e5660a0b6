//! Trains an eigenshape model on aligned blobs, saves and reloads it, and
//! denoises held-out shapes with increasing numbers of components.
//!
//! cargo run --example eigenshape_denoise

use shapebench::denoise::{train_eigenshape, EigenshapeModel};
use shapebench::noise::salt_pepper;
use shapebench::{align, iou, synth, AlignmentParams, BinaryShape};

fn blobs(seeds: std::ops::Range<u64>) -> shapebench::Result<Vec<BinaryShape>> {
    let p = AlignmentParams::default();
    seeds
        .map(|s| {
            align(
                &synth::Blob::random(150, 150, 35.0, 45.0, 8.0, 0.35, s).rasterize(150, 150)?,
                &p,
            )
        })
        .collect()
}

fn main() -> shapebench::Result<()> {
    let train = blobs(0..80)?;
    let test = blobs(1000..1020)?;
    let model = train_eigenshape(&train, 20)?;
    let total: f64 = model.variances().iter().sum();
    let top5: f64 = model.variances()[..5].iter().sum();
    println!(
        "trained on {} shapes, top-5 variance share {:.2}",
        train.len(),
        top5 / total
    );

    let bytes = model.to_bytes();
    let model = EigenshapeModel::read_from(bytes.as_slice())?;
    println!("model file: {} bytes", bytes.len());

    for p in [0.05, 0.10, 0.15] {
        let mut line = format!("p={p:.2}  input");
        let noisy: Vec<BinaryShape> = test
            .iter()
            .enumerate()
            .map(|(i, s)| salt_pepper(s, p, i as u64))
            .collect::<shapebench::Result<_>>()?;
        let mean = |f: &dyn Fn(&BinaryShape) -> shapebench::Result<BinaryShape>| -> shapebench::Result<f64> {
            let mut sum = 0.0;
            for (s, n) in test.iter().zip(&noisy) {
                sum += iou(&f(n)?, s)?;
            }
            Ok(sum / test.len() as f64)
        };
        line += &format!(" {:.3}", mean(&|n| Ok(n.clone()))?);
        for m in [1, 3, 5, 10, 20] {
            line += &format!("  m={m} {:.3}", mean(&|n| model.denoise(n, m, 0.5))?);
        }
        println!("{line}");
    }
    Ok(())
}
