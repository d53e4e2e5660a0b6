//! Command-line front end.
//!
//! Every subcommand reads and writes plain files: mask directories, a CSV
//! manifest, eigenshape model files and JSON reports. Batch work runs on a
//! rayon pool sized by `--jobs`; each item writes its own file and the
//! coordinator writes the manifest or report once at the end, in a fixed
//! order, so outputs do not depend on the worker count.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::seq::{IndexedRandom, SliceRandom};
use rayon::prelude::*;

use crate::align::{align, AlignmentParams};
use crate::denoise::{train_eigenshape, Baseline, Denoiser, DenoiserConfig, EigenshapeModel, Method};
use crate::error::{Error, Result};
use crate::eval::{self, bin_by_input_iou, score_bins, EvalRecord};
use crate::io::{self, Manifest, ManifestRow, Split, CLEAN_KIND};
use crate::noise::{self, NoiseInputs, NoiseKind, NoiseParams, NoiseSpec, Rect};
use crate::report::{build_section, ReportFormat, ReportTable};
use crate::seed;
use crate::shape::iou;

#[derive(Debug, Parser)]
#[command(name = "shapebench", version, about = "Binary shape denoising benchmark")]
pub struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    /// Master seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Center and scale-normalize every mask in a directory.
    Align(AlignArgs),
    /// Seeded train/test split of a mask directory into a manifest.
    Split(SplitArgs),
    /// Apply a noise grid to manifest items, writing noisy masks and a manifest.
    Perturb(PerturbArgs),
    /// Fit an eigenshape model to clean training masks.
    TrainEigen(TrainArgs),
    /// Run an in-repo denoiser over every noisy mask of a manifest.
    Denoise(DenoiseArgs),
    /// Score prediction directories against the truth and write a report.
    Evaluate(EvaluateArgs),
    /// Render a JSON report as text, CSV or JSON.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 128)]
    pub canvas: usize,
    #[arg(long, default_value_t = 40.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 0.8)]
    pub percentile: f64,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Manifest file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub train_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SplitFilter {
    Train,
    Test,
    All,
}

impl SplitFilter {
    fn accepts(self, s: Split) -> bool {
        match self {
            SplitFilter::All => true,
            SplitFilter::Train => s == Split::Train,
            SplitFilter::Test => s == Split::Test,
        }
    }
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory; receives `noisy/` and `manifest.csv`.
    #[arg(long)]
    pub out: PathBuf,
    /// salt, circle, real, occlusion, thresh-prob or detection.
    #[arg(long)]
    pub noise: String,
    #[arg(long, value_enum, default_value_t = SplitFilter::Test)]
    pub split: SplitFilter,
    /// Flip probabilities (default 0,0.01,...,0.15).
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Circle radii (default 0,1,...,10).
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<u32>,
    /// Disks per circle-noise image (default: boundary length / 4r).
    #[arg(long)]
    pub count: Option<usize>,
    /// Thresholds for real-image and thresholded-probability noise.
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    /// Clusters for thresholded-probability noise.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Directory of natural images to cut real-image patches from.
    #[arg(long)]
    pub patch_dir: Option<PathBuf>,
    /// Directory of color images matching the clean masks by item id.
    #[arg(long)]
    pub color_dir: Option<PathBuf>,
    /// Fixed occluder `x,y,w,h`; sampled per image when omitted.
    #[arg(long, value_delimiter = ',')]
    pub occluder: Vec<i64>,
    /// Directory of external detector masks matching item ids.
    #[arg(long)]
    pub detections: Option<PathBuf>,
    /// Noisy samples per item and parameter value.
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = SplitFilter::Train)]
    pub split: SplitFilter,
    #[arg(long, default_value_t = 5)]
    pub components: usize,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory for predicted masks, named by record id.
    #[arg(long)]
    pub out: PathBuf,
    /// identity, eigenshape, morphological or median.
    #[arg(long)]
    pub method: String,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Components used for reconstruction (default: all in the model).
    #[arg(long)]
    pub components: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub radius: u32,
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Prediction directory as `name=dir`; repeatable. Files are matched by
    /// record id.
    #[arg(long = "pred")]
    pub preds: Vec<String>,
    /// Add a column scoring the noisy input itself.
    #[arg(long)]
    pub include_input: bool,
    /// Bin edges as `lo:hi:step`.
    #[arg(long, default_value = "0.5:1.0:0.1")]
    pub bins: String,
    #[arg(long, default_value_t = eval::DEFAULT_BIN_CAP)]
    pub max_per_bin: usize,
    #[arg(long, default_value_t = eval::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// JSON report to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "text")]
    pub format: String,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::param(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Align(a) => cmd_align(a),
        Command::Split(a) => cmd_split(a, cli.seed),
        Command::Perturb(a) => cmd_perturb(a, cli.seed),
        Command::TrainEigen(a) => cmd_train(a),
        Command::Denoise(a) => cmd_denoise(a),
        Command::Evaluate(a) => cmd_evaluate(a, cli.seed),
        Command::Report(a) => cmd_report(a),
    })
}

fn item_err(item: &str, e: impl std::fmt::Display) -> Error {
    Error::Manifest(format!("item '{item}': {e}"))
}

fn cmd_align(a: &AlignArgs) -> Result<()> {
    let params = AlignmentParams {
        canvas: a.canvas,
        target_radius: a.radius,
        percentile: a.percentile,
        rebinarize_threshold: a.threshold,
    };
    params.validate()?;
    let files = io::list_images(&a.input)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::file(&a.out, e))?;
    files.par_iter().try_for_each(|path| {
        let id = io::file_stem(path);
        let shape = io::load_mask(path)?;
        let aligned = align(&shape, &params).map_err(|e| item_err(&id, e))?;
        io::save_mask(&aligned, a.out.join(format!("{id}.png")))
    })
}

fn cmd_split(a: &SplitArgs, master: u64) -> Result<()> {
    if !(0.0..=1.0).contains(&a.train_fraction) {
        return Err(Error::param("train fraction must lie in [0, 1]"));
    }
    let files = io::list_images(&a.input)?;
    let mut order: Vec<usize> = (0..files.len()).collect();
    order.shuffle(&mut seed::rng(master));
    let n_train = (files.len() as f64 * a.train_fraction).round() as usize;
    let mut split = vec![Split::Test; files.len()];
    for &i in &order[..n_train] {
        split[i] = Split::Train;
    }
    let base = a.out.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut manifest = Manifest::new(base);
    for (path, split) in files.iter().zip(split) {
        manifest.rows.push(ManifestRow {
            item_id: io::file_stem(path),
            split,
            clean_path: manifest.store(path),
            noisy_path: None,
            noise_kind: CLEAN_KIND.into(),
            noise_params: String::new(),
            seed: master,
            input_iou: None,
        });
    }
    manifest.write(&a.out)
}

/// Unique clean items of a manifest, in first-seen order.
fn clean_items(m: &Manifest, filter: SplitFilter) -> Vec<ManifestRow> {
    let mut seen = std::collections::HashSet::new();
    m.rows
        .iter()
        .filter(|r| filter.accepts(r.split) && seen.insert(r.item_id.clone()))
        .cloned()
        .collect()
}

fn perturb_grid(a: &PerturbArgs, kind: NoiseKind) -> Result<Vec<NoiseParams>> {
    let or = |v: &Vec<f64>, d: Vec<f64>| if v.is_empty() { d } else { v.clone() };
    Ok(match kind {
        NoiseKind::SaltPepper => or(&a.p, noise::default_flip_grid())
            .into_iter()
            .map(|p| NoiseParams::SaltPepper { p })
            .collect(),
        NoiseKind::Circle => {
            let radii = if a.r.is_empty() {
                noise::default_radius_grid()
            } else {
                a.r.clone()
            };
            radii
                .into_iter()
                .map(|radius| NoiseParams::Circle { radius, count: a.count })
                .collect()
        }
        NoiseKind::RealImage => or(&a.t, noise::default_threshold_grid())
            .into_iter()
            .map(|threshold| NoiseParams::RealImage { threshold })
            .collect(),
        NoiseKind::ThreshProb => or(&a.t, (1..=9).map(|i| i as f64 / 10.0).collect())
            .into_iter()
            .map(|threshold| NoiseParams::ThreshProb { k: a.k, threshold })
            .collect(),
        NoiseKind::Occlusion => {
            let rect = match a.occluder.as_slice() {
                [] => None,
                [x, y, w, h] => Some(Rect {
                    x: *x,
                    y: *y,
                    w: *w,
                    h: *h,
                }),
                _ => return Err(Error::param("--occluder expects x,y,w,h")),
            };
            vec![NoiseParams::Occlusion { rect }]
        }
        NoiseKind::DetectionExternal => vec![NoiseParams::DetectionExternal],
    })
}

struct PerturbJob {
    row: ManifestRow,
    params: NoiseParams,
    grid_index: u64,
}

fn cmd_perturb(a: &PerturbArgs, master: u64) -> Result<()> {
    let kind: NoiseKind = a.noise.parse()?;
    let input = Manifest::read(&a.manifest)?;
    let grid = perturb_grid(a, kind)?;
    for p in &grid {
        p.validate()?;
    }
    if a.samples == 0 {
        return Err(Error::param("--samples must be at least 1"));
    }
    let patches: Vec<PathBuf> = match (kind, &a.patch_dir) {
        (NoiseKind::RealImage, Some(dir)) => io::list_images(dir)?,
        (NoiseKind::RealImage, None) => return Err(Error::param("real image noise needs --patch-dir")),
        _ => Vec::new(),
    };
    if kind == NoiseKind::RealImage && patches.is_empty() {
        return Err(Error::param("--patch-dir holds no images"));
    }
    if kind == NoiseKind::ThreshProb && a.color_dir.is_none() {
        return Err(Error::param("thresholded probability noise needs --color-dir"));
    }
    if kind == NoiseKind::DetectionExternal && a.detections.is_none() {
        return Err(Error::param("detection noise needs --detections"));
    }

    let mut output = Manifest::new(&a.out);
    let noisy_dir = a.out.join("noisy");
    fs::create_dir_all(&noisy_dir).map_err(|e| Error::file(&noisy_dir, e))?;

    let jobs: Vec<PerturbJob> = clean_items(&input, a.split)
        .into_iter()
        .flat_map(|row| {
            let grid = &grid;
            (0..grid.len() * a.samples).map(move |g| PerturbJob {
                row: row.clone(),
                params: grid[g / a.samples],
                grid_index: g as u64,
            })
        })
        .collect();

    let rows: Vec<ManifestRow> = jobs
        .par_iter()
        .map(|job| {
            let id = &job.row.item_id;
            let clean_path = input.resolve(&job.row.clean_path);
            let clean = io::load_mask(&clean_path).map_err(|e| item_err(id, e))?;
            let item_seed = seed::item_seed(master, id, job.grid_index);
            let (noisy_path, params) = if kind == NoiseKind::DetectionExternal {
                let dir = a.detections.as_ref().expect("checked above");
                let path = io::find_image(dir, id)
                    .ok_or_else(|| item_err(id, format!("no detection mask in {}", dir.display())))?;
                (path, job.params)
            } else {
                let patch;
                let color;
                let mut inputs = NoiseInputs::default();
                if kind == NoiseKind::RealImage {
                    let mut rng = seed::rng(seed::mix(item_seed, 1));
                    let src = patches.choose(&mut rng).expect("nonempty");
                    let img = io::load_color(src)?;
                    patch = img
                        .random_patch(clean.width(), clean.height(), seed::mix(item_seed, 2))
                        .map_err(|e| item_err(id, format!("{}: {e}", src.display())))?;
                    inputs.patch = Some(&patch);
                }
                if kind == NoiseKind::ThreshProb {
                    let dir = a.color_dir.as_ref().expect("checked above");
                    let path = io::find_image(dir, id)
                        .ok_or_else(|| item_err(id, format!("no color image in {}", dir.display())))?;
                    color = io::load_color(&path)?;
                    inputs.color = Some(&color);
                }
                let params = match job.params {
                    NoiseParams::Occlusion { rect: None } => NoiseParams::Occlusion {
                        rect: Some(noise::sample_occluder(&clean, item_seed).map_err(|e| item_err(id, e))?),
                    },
                    p => p,
                };
                let noisy = NoiseSpec::new(params, item_seed)
                    .apply(&clean, inputs)
                    .map_err(|e| item_err(id, e))?;
                let path = noisy_dir.join(format!("{id}__{}_{:03}.png", kind.as_str(), job.grid_index));
                io::save_mask(&noisy, &path)?;
                (path, params)
            };
            let noisy = io::load_mask(&noisy_path).map_err(|e| item_err(id, e))?;
            let input_iou = iou(&clean, &noisy).map_err(|e| item_err(id, e))?;
            Ok(ManifestRow {
                item_id: id.clone(),
                split: job.row.split,
                clean_path: output.store(&clean_path),
                noisy_path: Some(output.store(&noisy_path)),
                noise_kind: kind.as_str().into(),
                noise_params: params.to_param_string(),
                seed: item_seed,
                input_iou: Some(input_iou),
            })
        })
        .collect::<Result<_>>()?;
    output.rows = rows;
    output.write(a.out.join("manifest.csv"))
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let m = Manifest::read(&a.manifest)?;
    let items = clean_items(&m, a.split);
    let shapes = items
        .par_iter()
        .map(|r| io::load_mask(m.resolve(&r.clean_path)).map_err(|e| item_err(&r.item_id, e)))
        .collect::<Result<Vec<_>>>()?;
    let model = train_eigenshape(&shapes, a.components)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    }
    fs::write(&a.out, model.to_bytes()).map_err(|e| Error::file(&a.out, e))
}

pub fn load_model(path: &Path) -> Result<EigenshapeModel> {
    let bytes = fs::read(path).map_err(|e| Error::file(path, e))?;
    EigenshapeModel::read_from(bytes.as_slice()).map_err(|e| Error::file(path, e))
}

fn cmd_denoise(a: &DenoiseArgs) -> Result<()> {
    let method: Method = a.method.parse()?;
    let model = match (&a.model, method) {
        (Some(p), _) => Some(Arc::new(load_model(p)?)),
        (None, Method::Eigenshape) => return Err(Error::param("eigenshape needs --model")),
        (None, _) => None,
    };
    let n_components = a
        .components
        .or_else(|| model.as_ref().map(|m| m.n_components()))
        .unwrap_or(1);
    let config = DenoiserConfig {
        method,
        n_components,
        struct_radius: a.radius,
        window: a.window,
        rebinarize_threshold: a.threshold,
    };
    let denoiser = Baseline::new(config, model)?;
    let m = Manifest::read(&a.manifest)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::file(&a.out, e))?;
    m.rows.par_iter().filter(|r| r.noisy_path.is_some()).try_for_each(|r| {
        let id = r.record_id();
        let noisy =
            io::load_mask(m.resolve(r.noisy_path.as_deref().expect("filtered"))).map_err(|e| item_err(&id, e))?;
        let out = denoiser.denoise(&noisy).map_err(|e| item_err(&id, e))?;
        io::save_mask(&out, a.out.join(format!("{id}.png")))
    })
}

/// Parses `lo:hi:step` into bin edges.
pub fn parse_bins(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::param(format!("--bins expects lo:hi:step, got '{text}'")))?;
    match parts.as_slice() {
        [lo, hi, step] => eval::edges_from_range(*lo, *hi, *step),
        _ => Err(Error::param(format!("--bins expects lo:hi:step, got '{text}'"))),
    }
}

fn parse_pred(text: &str) -> Result<(String, PathBuf)> {
    let (name, dir) = text
        .split_once('=')
        .ok_or_else(|| Error::param(format!("--pred expects name=dir, got '{text}'")))?;
    if name.is_empty() {
        return Err(Error::param("--pred needs a method name"));
    }
    Ok((name.to_string(), PathBuf::from(dir)))
}

fn cmd_evaluate(a: &EvaluateArgs, master: u64) -> Result<()> {
    let edges = parse_bins(&a.bins)?;
    let preds = a.preds.iter().map(|p| parse_pred(p)).collect::<Result<Vec<_>>>()?;
    if preds.is_empty() && !a.include_input {
        return Err(Error::param(
            "nothing to evaluate: pass --pred name=dir or --include-input",
        ));
    }
    let m = Manifest::read(&a.manifest)?;
    let noisy_rows: Vec<&ManifestRow> = m.rows.iter().filter(|r| r.noisy_path.is_some()).collect();
    let mut seen = std::collections::HashSet::new();
    for r in &noisy_rows {
        if !seen.insert(r.record_id()) {
            return Err(item_err(&r.item_id, format!("duplicate record id '{}'", r.record_id())));
        }
    }

    let records: Vec<EvalRecord> = noisy_rows
        .par_iter()
        .map(|r| {
            let id = r.record_id();
            let kind: NoiseKind = r.noise_kind.parse().map_err(|e| item_err(&id, e))?;
            let truth = io::load_mask(m.resolve(&r.clean_path)).map_err(|e| item_err(&id, e))?;
            let noisy =
                io::load_mask(m.resolve(r.noisy_path.as_deref().expect("filtered"))).map_err(|e| item_err(&id, e))?;
            EvalRecord::new(id.clone(), Arc::new(truth), Arc::new(noisy), kind).map_err(|e| item_err(&id, e))
        })
        .collect::<Result<_>>()?;

    let mut by_kind: BTreeMap<NoiseKind, Vec<EvalRecord>> = BTreeMap::new();
    for r in records {
        by_kind.entry(r.noise_kind).or_default().push(r);
    }

    let mut sections = Vec::new();
    for (kind, records) in by_kind {
        let bins = bin_by_input_iou(records, &edges, a.max_per_bin, seed::mix(master, kind as u64))?;
        let mut methods = Vec::new();
        if a.include_input {
            methods.push(eval::evaluate_method(&Baseline::identity().with_name("input"), &bins)?);
        }
        for (name, dir) in &preds {
            // Missing or undecodable predictions are scored 0 and flagged;
            // a prediction of the wrong size aborts.
            methods.push(score_bins(name, &bins, |r| {
                let Some(path) = io::find_image(dir, &r.item_id) else {
                    return Ok(None);
                };
                let Ok(pred) = io::load_mask(&path) else {
                    return Ok(None);
                };
                iou(&pred, &r.truth)
                    .map(Some)
                    .map_err(|e| item_err(&r.item_id, format!("{name} prediction {}: {e}", path.display())))
            })?);
        }
        let section = build_section(kind.as_str(), &methods, a.alpha)?;
        if !section.bins.is_empty() {
            sections.push(section);
        }
    }
    let table = ReportTable::new(sections);
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    }
    fs::write(&a.out, table.to_json()?).map_err(|e| Error::file(&a.out, e))
}

fn cmd_report(a: &ReportArgs) -> Result<()> {
    let format: ReportFormat = a.format.parse()?;
    let text = fs::read_to_string(&a.input).map_err(|e| Error::file(&a.input, e))?;
    let table = ReportTable::from_json(&text).map_err(|e| Error::file(&a.input, e))?;
    let rendered = table.render(format)?;
    match &a.out {
        Some(p) => fs::write(p, rendered).map_err(|e| Error::file(p, e)),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}
