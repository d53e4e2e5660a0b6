//! Baseline denoisers.

mod eigenshape;
mod median;
mod morphology;

use std::fmt;
use std::sync::Arc;

pub use eigenshape::{train_eigenshape, EigenshapeModel, MODEL_MAGIC};
pub use median::denoise_median;
pub use morphology::{close, denoise_morphological, dilate, disk_element, erode, open};

use crate::error::{Error, Result};
use crate::shape::BinaryShape;

/// Anything that maps a noisy shape to a denoised shape.
pub trait Denoiser: Send + Sync {
    fn name(&self) -> &str;
    fn denoise(&self, noisy: &BinaryShape) -> Result<BinaryShape>;
}

impl<F> Denoiser for (String, F)
where
    F: Fn(&BinaryShape) -> Result<BinaryShape> + Send + Sync,
{
    fn name(&self) -> &str {
        &self.0
    }

    fn denoise(&self, noisy: &BinaryShape) -> Result<BinaryShape> {
        (self.1)(noisy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Identity,
    Eigenshape,
    Morphological,
    Median,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Identity => "identity",
            Method::Eigenshape => "eigenshape",
            Method::Morphological => "morphological",
            Method::Median => "median",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" => Ok(Method::Identity),
            "eigenshape" | "eigen" | "pca" => Ok(Method::Eigenshape),
            "morphological" | "morphology" | "morph" => Ok(Method::Morphological),
            "median" => Ok(Method::Median),
            other => Err(Error::param(format!("unknown denoising method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiserConfig {
    pub method: Method,
    pub n_components: usize,
    pub struct_radius: u32,
    pub window: usize,
    pub rebinarize_threshold: f64,
}

impl Default for DenoiserConfig {
    fn default() -> Self {
        Self {
            method: Method::Identity,
            n_components: 5,
            struct_radius: 1,
            window: 3,
            rebinarize_threshold: 0.5,
        }
    }
}

impl DenoiserConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(Error::param("window must be odd and at least 1"));
        }
        if self.n_components == 0 {
            return Err(Error::param("n_components must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.rebinarize_threshold) {
            return Err(Error::param("rebinarize_threshold must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Reconstructs through an eigenshape model with the configured truncation.
pub fn denoise_eigenshape(model: &EigenshapeModel, noisy: &BinaryShape, cfg: &DenoiserConfig) -> Result<BinaryShape> {
    model.denoise(noisy, cfg.n_components, cfg.rebinarize_threshold)
}

/// A configured in-repo baseline.
#[derive(Debug, Clone)]
pub struct Baseline {
    name: String,
    config: DenoiserConfig,
    model: Option<Arc<EigenshapeModel>>,
}

impl Baseline {
    /// Builds the denoiser named by `config.method`; the eigenshape method
    /// requires a model with at least `n_components` components.
    pub fn new(config: DenoiserConfig, model: Option<Arc<EigenshapeModel>>) -> Result<Self> {
        config.validate()?;
        if config.method == Method::Eigenshape {
            let m = model
                .as_ref()
                .ok_or_else(|| Error::param("eigenshape denoiser needs a trained model"))?;
            if config.n_components > m.n_components() {
                return Err(Error::param(format!(
                    "n_components {} exceeds the model's {}",
                    config.n_components,
                    m.n_components()
                )));
            }
        }
        Ok(Self {
            name: config.method.to_string(),
            config,
            model,
        })
    }

    pub fn identity() -> Self {
        Self::new(DenoiserConfig::default(), None).expect("default config is valid")
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn config(&self) -> &DenoiserConfig {
        &self.config
    }
}

impl Denoiser for Baseline {
    fn name(&self) -> &str {
        &self.name
    }

    fn denoise(&self, noisy: &BinaryShape) -> Result<BinaryShape> {
        match self.config.method {
            Method::Identity => Ok(noisy.clone()),
            Method::Eigenshape => {
                let model = self.model.as_ref().expect("checked in Baseline::new");
                denoise_eigenshape(model, noisy, &self.config)
            }
            Method::Morphological => Ok(denoise_morphological(noisy, self.config.struct_radius)),
            Method::Median => denoise_median(noisy, self.config.window),
        }
    }
}
