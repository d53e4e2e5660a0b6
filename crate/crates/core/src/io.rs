//! Mask and color-image files, and the CSV manifest that ties datasets,
//! noisy variants and predictions together.

use std::fs;
use std::path::{Component, Path, PathBuf};

use image::{DynamicImage, GrayImage, ImageReader, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::ColorImage;
use crate::shape::BinaryShape;

/// Extensions recognized when scanning mask and image directories.
pub const IMAGE_EXTENSIONS: [&str; 6] = ["png", "pgm", "pbm", "ppm", "jpg", "jpeg"];

fn open_image(path: &Path) -> Result<DynamicImage> {
    ImageReader::open(path)
        .map_err(|e| Error::file(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::file(path, e))?
        .decode()
        .map_err(|e| Error::file(path, e))
}

/// Reads an 8-bit mask; values `>= 128` are foreground. Gray+alpha and
/// RGB(A) files are accepted only when their color channels agree.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryShape> {
    let path = path.as_ref();
    let img = open_image(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray: Vec<u8> = match img {
        DynamicImage::ImageLuma8(g) => g.into_raw(),
        DynamicImage::ImageLumaA8(g) => g.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageRgb8(rgb) => {
            let mut out = Vec::with_capacity(w * h);
            for p in rgb.pixels() {
                let [r, g, b] = p.0;
                if r != g || g != b {
                    return Err(Error::file(path, "mask has unequal color channels"));
                }
                out.push(r);
            }
            out
        }
        DynamicImage::ImageRgba8(rgba) => {
            let mut out = Vec::with_capacity(w * h);
            for p in rgba.pixels() {
                let [r, g, b, _] = p.0;
                if r != g || g != b {
                    return Err(Error::file(path, "mask has unequal color channels"));
                }
                out.push(r);
            }
            out
        }
        other => {
            return Err(Error::file(
                path,
                format!("unsupported mask pixel format {:?}", other.color()),
            ))
        }
    };
    let pixels = gray.into_iter().map(|v| (v >= 128) as u8).collect();
    BinaryShape::from_pixels(w, h, pixels).map_err(|e| Error::file(path, e))
}

/// Writes an 8-bit single-channel mask (foreground 255). The format follows
/// the extension; PNG and PGM are lossless.
pub fn save_mask(shape: &BinaryShape, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let img = GrayImage::from_fn(shape.width() as u32, shape.height() as u32, |x, y| {
        Luma([if shape.get(x as usize, y as usize) { 255 } else { 0 }])
    });
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    }
    img.save(path).map_err(|e| Error::file(path, e))
}

pub fn load_color(path: impl AsRef<Path>) -> Result<ColorImage> {
    let path = path.as_ref();
    let rgb = open_image(path)?.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    ColorImage::from_pixels(w, h, rgb.pixels().map(|p| p.0).collect()).map_err(|e| Error::file(path, e))
}

pub fn save_color(img: &ColorImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let buf = image::RgbImage::from_fn(img.width() as u32, img.height() as u32, |x, y| {
        image::Rgb(img.get(x as usize, y as usize))
    });
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    }
    buf.save(path).map_err(|e| Error::file(path, e))
}

/// Image files directly inside `dir`, sorted by file name.
pub fn list_images(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::file(dir, e))? {
        let path = entry.map_err(|e| Error::file(dir, e))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if path.is_file() && ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Finds `<dir>/<stem>.<ext>` for any recognized extension.
pub fn find_image(dir: impl AsRef<Path>, stem: &str) -> Option<PathBuf> {
    IMAGE_EXTENSIONS
        .iter()
        .map(|ext| dir.as_ref().join(format!("{stem}.{ext}")))
        .find(|p| p.is_file())
}

pub fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(Error::param(format!("unknown split '{s}'"))),
        }
    }
}

/// Noise kind recorded for rows that describe clean shapes only.
pub const CLEAN_KIND: &str = "none";

/// One manifest line. Paths are stored relative to the manifest's
/// directory when possible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub item_id: String,
    pub split: Split,
    pub clean_path: String,
    pub noisy_path: Option<String>,
    pub noise_kind: String,
    pub noise_params: String,
    pub seed: u64,
    pub input_iou: Option<f64>,
}

impl ManifestRow {
    /// Identifier of the noisy variant: the noisy file's stem, or the item
    /// id for clean rows. Prediction files are matched on it.
    pub fn record_id(&self) -> String {
        match &self.noisy_path {
            Some(p) => file_stem(Path::new(p)),
            None => self.item_id.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    /// Directory that relative paths are resolved against.
    pub base: PathBuf,
    pub rows: Vec<ManifestRow>,
}

const HEADER: [&str; 8] = [
    "item_id",
    "split",
    "clean_path",
    "noisy_path",
    "noise_kind",
    "noise_params",
    "seed",
    "input_iou",
];

/// `path` relative to `base` when both are absolute or both relative;
/// otherwise `path` unchanged. Uses `/` separators.
pub fn relative_path(path: &Path, base: &Path) -> String {
    let abs = |p: &Path| {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            std::env::current_dir()
                .map(|c| c.join(p))
                .unwrap_or_else(|_| p.to_path_buf())
        }
    };
    let norm = |p: PathBuf| -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in p.components() {
            match c {
                Component::CurDir => {}
                Component::ParentDir => {
                    out.pop();
                }
                Component::Normal(s) => out.push(s.to_string_lossy().into_owned()),
                Component::RootDir | Component::Prefix(_) => out.clear(),
            }
        }
        out
    };
    let p = norm(abs(path));
    let b = norm(abs(base));
    let common = p.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let mut parts: Vec<String> = vec!["..".to_string(); b.len() - common];
    parts.extend(p[common..].iter().cloned());
    if parts.is_empty() {
        ".".into()
    } else {
        parts.join("/")
    }
}

impl Manifest {
    pub fn new(base: impl Into<PathBuf>) -> Self {
        Self {
            base: base.into(),
            rows: Vec::new(),
        }
    }

    pub fn resolve(&self, stored: &str) -> PathBuf {
        let p = Path::new(stored);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    /// Converts a filesystem path into the form stored in this manifest.
    pub fn store(&self, path: &Path) -> String {
        relative_path(path, &self.base)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::file(path, e))?;
        let header = reader.headers().map_err(|e| Error::file(path, e))?.clone();
        if header.iter().collect::<Vec<_>>() != HEADER {
            return Err(Error::file(
                path,
                format!("unexpected manifest header; expected {}", HEADER.join(",")),
            ));
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.deserialize::<ManifestRow>().enumerate() {
            let row = rec.map_err(|e| Error::file(path, format!("row {}: {e}", i + 1)))?;
            rows.push(row);
        }
        Ok(Self { base, rows })
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(HEADER).map_err(|e| Error::Manifest(e.to_string()))?;
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::Manifest(e.to_string()))?;
        }
        w.into_inner().map_err(|e| Error::Manifest(e.to_string()))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
        }
        fs::write(path, self.to_csv_bytes()?).map_err(|e| Error::file(path, e))
    }
}
