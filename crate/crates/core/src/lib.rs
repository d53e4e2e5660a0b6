//! Benchmark toolkit for binary shape denoising.
//!
//! Clean masks are aligned onto a fixed canvas ([`align`]), corrupted by
//! one of six noise processes ([`noise`]), restored by a denoiser
//! ([`denoise`]) and scored by input-IoU bins with a paired one-sided
//! t-test deciding which methods tie with the best ([`eval`], [`report`]).
//! Predictions from external models enter as mask directories through the
//! [`cli`] front end and are scored exactly like the in-repo baselines.

// Parameter checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod align;
pub mod cli;
pub mod denoise;
pub mod error;
pub mod eval;
pub mod io;
pub mod kmeans;
pub mod noise;
pub mod report;
pub mod seed;
pub mod shape;
pub mod stats;
pub mod synth;

pub use align::{align, radial_percentile, AlignmentParams};
pub use denoise::{
    denoise_eigenshape, denoise_median, denoise_morphological, train_eigenshape, Baseline, Denoiser, DenoiserConfig,
    EigenshapeModel, Method,
};
pub use error::{Error, Result};
pub use eval::{bin_by_input_iou, evaluate_method, mark_best, EvalBin, EvalRecord, MethodScores};
pub use noise::{
    circle_noise, occlusion_noise, probability_map, real_image_noise, salt_pepper, threshold_probability,
    ClusterAssignment, ColorImage, NoiseKind, NoiseParams, NoiseSpec, ProbabilityMap, Rect,
};
pub use report::{ReportFormat, ReportTable};
pub use shape::{center_of_mass, iou, BinaryShape, Centroid};
pub use stats::{paired_one_sided_t_test, SignificanceResult};
