//! Runs the binned evaluation protocol in memory: noisy records are grouped
//! by input IoU, every method is scored per bin, and cells that are not
//! significantly worse than the best are bolded.
//!
//! cargo run --example evaluate_protocol

use std::sync::Arc;

use shapebench::denoise::{train_eigenshape, Baseline, DenoiserConfig, Method};
use shapebench::eval::{bin_by_input_iou, default_edges, evaluate_method, EvalRecord};
use shapebench::noise::{salt_pepper, NoiseKind};
use shapebench::report::build_section;
use shapebench::{align, synth, AlignmentParams, ReportTable};

fn main() -> shapebench::Result<()> {
    let p = AlignmentParams::default();
    let shapes = (0..60)
        .map(|s| {
            align(
                &synth::Blob::random(140, 140, 35.0, 45.0, 6.0, 0.3, s).rasterize(140, 140)?,
                &p,
            )
        })
        .collect::<shapebench::Result<Vec<_>>>()?;
    let (train, test) = shapes.split_at(40);
    let model = Arc::new(train_eigenshape(train, 10)?);

    let mut records = Vec::new();
    for (i, clean) in test.iter().enumerate() {
        let clean = Arc::new(clean.clone());
        for (g, flip) in [0.0, 0.03, 0.06, 0.09, 0.12, 0.16, 0.20].into_iter().enumerate() {
            let noisy = Arc::new(salt_pepper(&clean, flip, (i * 10 + g) as u64)?);
            records.push(EvalRecord::new(
                format!("s{i}_{g}"),
                clean.clone(),
                noisy,
                NoiseKind::SaltPepper,
            )?);
        }
    }
    let bins = bin_by_input_iou(records, &default_edges(), 1000, 0)?;

    let method = |m: Method| DenoiserConfig {
        method: m,
        n_components: 10,
        ..Default::default()
    };
    let methods = [
        Baseline::identity().with_name("input"),
        Baseline::new(method(Method::Morphological), None)?,
        Baseline::new(method(Method::Median), None)?,
        Baseline::new(method(Method::Eigenshape), Some(model))?,
    ];
    let scores = methods
        .iter()
        .map(|d| evaluate_method(d, &bins))
        .collect::<shapebench::Result<Vec<_>>>()?;
    let table = ReportTable::new(vec![build_section("salt_pepper", &scores, 0.05)?]);
    print!("{}", table.to_text());
    Ok(())
}
