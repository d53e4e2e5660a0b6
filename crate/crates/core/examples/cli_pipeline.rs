//! Drives the command-line pipeline in process on a scratch directory:
//! split, perturb, train-eigen, denoise, evaluate and report.
//!
//! cargo run --example cli_pipeline [WORK_DIR]

use std::path::PathBuf;

use shapebench::{align, cli, synth, AlignmentParams};

fn run(args: &[&str]) {
    let mut full = vec!["shapebench", "--seed", "17"];
    full.extend_from_slice(args);
    println!("$ {}", full.join(" "));
    let code = cli::run(full);
    if code != 0 {
        std::process::exit(code);
    }
}

fn main() -> shapebench::Result<()> {
    let work = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("shapebench_pipeline"));
    let masks = work.join("masks");
    std::fs::create_dir_all(&masks)?;
    for i in 0..24 {
        let raw = synth::Blob::random(150, 150, 35.0, 50.0, 10.0, 0.3, i).rasterize(150, 150)?;
        let aligned = align(&raw, &AlignmentParams::default())?;
        shapebench::io::save_mask(&aligned, masks.join(format!("shape{i:02}.png")))?;
    }
    let p = |name: &str| work.join(name).to_string_lossy().into_owned();
    run(&["split", "--input", &p("masks"), "--out", &p("split.csv")]);
    run(&[
        "perturb",
        "--manifest",
        &p("split.csv"),
        "--out",
        &p("salt"),
        "--noise",
        "salt",
    ]);
    run(&[
        "perturb",
        "--manifest",
        &p("split.csv"),
        "--out",
        &p("circle"),
        "--noise",
        "circle",
    ]);
    run(&[
        "train-eigen",
        "--manifest",
        &p("split.csv"),
        "--components",
        "8",
        "--out",
        &p("model.bin"),
    ]);
    for noise in ["salt", "circle"] {
        let manifest = p(&format!("{noise}/manifest.csv"));
        run(&[
            "denoise",
            "--manifest",
            &manifest,
            "--method",
            "eigenshape",
            "--model",
            &p("model.bin"),
            "--out",
            &p(&format!("pred/{noise}/eigenshape")),
        ]);
        run(&[
            "denoise",
            "--manifest",
            &manifest,
            "--method",
            "median",
            "--out",
            &p(&format!("pred/{noise}/median")),
        ]);
        run(&[
            "evaluate",
            "--manifest",
            &manifest,
            "--include-input",
            "--pred",
            &format!("eigenshape={}", p(&format!("pred/{noise}/eigenshape"))),
            "--pred",
            &format!("median={}", p(&format!("pred/{noise}/median"))),
            "--out",
            &p(&format!("{noise}_report.json")),
        ]);
        run(&["report", "--input", &p(&format!("{noise}_report.json"))]);
    }
    Ok(())
}
