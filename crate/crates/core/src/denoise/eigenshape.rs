//! Pixel-space PCA shape model.
//!
//! Shapes are flattened to `{0, 1}^D` vectors. Principal components come
//! from the `n x n` Gram matrix of the centered data, which is far smaller
//! than the `D x D` covariance when `n << D`.
//!
//! # File layout
//!
//! All integers and floats are little-endian.
//!
//! | bytes         | content                                   |
//! |---------------|-------------------------------------------|
//! | 8             | magic `b"SHPEIG01"`                       |
//! | 4             | width `u32`                               |
//! | 4             | height `u32`                              |
//! | 4             | number of components `m` (`u32`)         |
//! | 8 D           | mean, `D = width * height` `f64`, row-major |
//! | 8 m D         | components, one row-major vector after another |
//! | 8 m           | variances                                 |

use std::io::{Read, Write};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::shape::BinaryShape;

pub const MODEL_MAGIC: &[u8; 8] = b"SHPEIG01";

/// Mean shape and orthonormal principal directions.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenshapeModel {
    width: usize,
    height: usize,
    mean: Vec<f64>,
    components: Vec<Vec<f64>>,
    variances: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

impl EigenshapeModel {
    pub fn from_parts(
        width: usize,
        height: usize,
        mean: Vec<f64>,
        components: Vec<Vec<f64>>,
        variances: Vec<f64>,
    ) -> Result<Self> {
        let d = width * height;
        if d == 0 || mean.len() != d {
            return Err(Error::MalformedModel(format!(
                "mean has {} values, expected {d}",
                mean.len()
            )));
        }
        if components.len() != variances.len() || components.iter().any(|c| c.len() != d) {
            return Err(Error::MalformedModel("component/variance shape mismatch".into()));
        }
        Ok(Self {
            width,
            height,
            mean,
            components,
            variances,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    fn check_shape(&self, s: &BinaryShape) -> Result<()> {
        if s.width() != self.width || s.height() != self.height {
            return Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: s.width(),
                right_h: s.height(),
            });
        }
        Ok(())
    }

    /// Coefficients `<x - mean, c_j>` for the first `n` components.
    pub fn project(&self, x: &[f64], n: usize) -> Vec<f64> {
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        self.components[..n].iter().map(|c| dot(&centered, c)).collect()
    }

    /// `mean + sum_j coeff_j c_j`.
    pub fn expand(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut r = self.mean.clone();
        for (a, c) in coeffs.iter().zip(&self.components) {
            axpy(*a, c, &mut r);
        }
        r
    }

    /// Real-valued reconstruction of `s` from its first `n` coefficients.
    pub fn reconstruct(&self, s: &BinaryShape, n: usize) -> Result<Vec<f64>> {
        self.check_shape(s)?;
        if n > self.n_components() {
            return Err(Error::param(format!(
                "asked for {n} components, model has {}",
                self.n_components()
            )));
        }
        let x = s.to_f64_vec();
        Ok(self.expand(&self.project(&x, n)))
    }

    /// Project, reconstruct and threshold.
    pub fn denoise(&self, noisy: &BinaryShape, n: usize, threshold: f64) -> Result<BinaryShape> {
        let r = self.reconstruct(noisy, n)?;
        let pixels = r.iter().map(|&v| (v >= threshold) as u8).collect();
        BinaryShape::from_pixels(self.width, self.height, pixels)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MODEL_MAGIC)?;
        for v in [self.width, self.height, self.components.len()] {
            let v = u32::try_from(v).map_err(|_| Error::MalformedModel("dimension exceeds u32".into()))?;
            w.write_all(&v.to_le_bytes())?;
        }
        let floats = self
            .mean
            .iter()
            .chain(self.components.iter().flatten())
            .chain(&self.variances);
        for v in floats {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|_| Error::MalformedModel("truncated header".into()))?;
        if &magic != MODEL_MAGIC {
            return Err(Error::MalformedModel("bad magic".into()));
        }
        let mut u = [0u8; 4];
        let mut next_u32 = |r: &mut dyn Read| -> Result<usize> {
            r.read_exact(&mut u)
                .map_err(|_| Error::MalformedModel("truncated header".into()))?;
            Ok(u32::from_le_bytes(u) as usize)
        };
        let width = next_u32(&mut r)?;
        let height = next_u32(&mut r)?;
        let m = next_u32(&mut r)?;
        let d = width * height;
        let mut read_vec = |len: usize| -> Result<Vec<f64>> {
            let mut bytes = vec![0u8; len * 8];
            r.read_exact(&mut bytes)
                .map_err(|_| Error::MalformedModel("truncated body".into()))?;
            Ok(bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect())
        };
        let mean = read_vec(d)?;
        let components = (0..m).map(|_| read_vec(d)).collect::<Result<Vec<_>>>()?;
        let variances = read_vec(m)?;
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(Error::MalformedModel(format!("{} trailing bytes", rest.len())));
        }
        Self::from_parts(width, height, mean, components, variances)
    }
}

/// Fits an `m`-component model to `train`.
///
/// Directions with (numerically) zero variance are completed with unit
/// vectors orthogonalized against the earlier components, so the model
/// always has exactly `m` orthonormal components.
pub fn train_eigenshape(train: &[BinaryShape], m: usize) -> Result<EigenshapeModel> {
    let n = train.len();
    if n < 2 {
        return Err(Error::NotEnoughSamples { needed: 2, got: n });
    }
    let (width, height) = (train[0].width(), train[0].height());
    for s in &train[1..] {
        train[0].check_dims(s)?;
    }
    let d = width * height;
    if m == 0 || m > (n - 1).min(d) {
        return Err(Error::param(format!(
            "component count {m} must lie in 1..={}",
            (n - 1).min(d)
        )));
    }

    let mut mean = vec![0.0; d];
    for s in train {
        for (acc, &v) in mean.iter_mut().zip(s.pixels()) {
            *acc += v as f64;
        }
    }
    mean.iter_mut().for_each(|v| *v /= n as f64);
    let centered: Vec<Vec<f64>> = train
        .iter()
        .map(|s| s.pixels().iter().zip(&mean).map(|(&v, mu)| v as f64 - mu).collect())
        .collect();

    let gram = DMatrix::from_fn(n, n, |i, j| dot(&centered[i], &centered[j]));
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let top = eig.eigenvalues[order[0]].max(0.0);
    let tol = top * 1e-10 * n as f64 + 1e-12;
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut variances = Vec::with_capacity(m);
    for &idx in order.iter().take(m) {
        let lambda = eig.eigenvalues[idx];
        if lambda <= tol {
            break;
        }
        let v = eig.eigenvectors.column(idx);
        let mut c = vec![0.0; d];
        for (coef, row) in v.iter().zip(&centered) {
            axpy(*coef, row, &mut c);
        }
        // Re-orthogonalize against earlier components to absorb round-off.
        for prev in &components {
            let proj = dot(&c, prev);
            axpy(-proj, prev, &mut c);
        }
        let norm = dot(&c, &c).sqrt();
        if norm <= 1e-12 {
            break;
        }
        c.iter_mut().for_each(|x| *x /= norm);
        components.push(c);
        variances.push(lambda / (n - 1) as f64);
    }

    let mut basis = 0;
    while components.len() < m {
        let mut c = vec![0.0; d];
        c[basis] = 1.0;
        basis += 1;
        for _ in 0..2 {
            for prev in &components {
                let proj = dot(&c, prev);
                axpy(-proj, prev, &mut c);
            }
        }
        let norm = dot(&c, &c).sqrt();
        if norm < 1e-6 {
            continue;
        }
        c.iter_mut().for_each(|x| *x /= norm);
        components.push(c);
        variances.push(0.0);
    }

    EigenshapeModel::from_parts(width, height, mean, components, variances)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn ellipses(n: usize) -> Vec<BinaryShape> {
        (0..n)
            .map(|i| {
                let a = 10.0 + (i % 5) as f64 * 1.5;
                let b = 8.0 + (i / 5) as f64 * 1.5;
                synth::ellipse(40, 40, 20.0, 20.0, a, b).unwrap()
            })
            .collect()
    }

    fn assert_orthonormal(model: &EigenshapeModel) {
        let c = model.components();
        for i in 0..c.len() {
            for j in 0..c.len() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&c[i], &c[j]) - expect).abs() < 1e-6, "({i},{j})");
            }
        }
    }

    #[test]
    fn identical_shapes_have_zero_variance() {
        let s = synth::disk(16, 16, 8.0, 8.0, 5.0).unwrap();
        let model = train_eigenshape(&vec![s.clone(); 4], 3).unwrap();
        assert_eq!(model.mean(), s.to_f64_vec().as_slice());
        assert!(model.variances().iter().all(|&v| v == 0.0));
        assert_orthonormal(&model);
        assert_eq!(model.denoise(&s, 3, 0.5).unwrap(), s);
    }

    #[test]
    fn two_shapes_span_their_difference() {
        let a = synth::disk(16, 16, 8.0, 8.0, 5.0).unwrap();
        let b = synth::disk(16, 16, 8.0, 8.0, 3.0).unwrap();
        let model = train_eigenshape(&[a.clone(), b.clone()], 1).unwrap();
        let diff: Vec<f64> = a.to_f64_vec().iter().zip(b.to_f64_vec()).map(|(x, y)| x - y).collect();
        let norm = dot(&diff, &diff).sqrt();
        let cos = dot(&diff, &model.components()[0]).abs() / norm;
        assert!((cos - 1.0).abs() < 1e-12);
        assert_eq!(model.denoise(&a, 1, 0.5).unwrap(), a);
        assert_eq!(model.denoise(&b, 1, 0.5).unwrap(), b);
    }

    #[test]
    fn components_are_orthonormal_and_sorted() {
        let model = train_eigenshape(&ellipses(20), 8).unwrap();
        assert_orthonormal(&model);
        assert!(model.variances().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn training_shapes_reconstruct_exactly_with_full_rank() {
        let train = ellipses(12);
        let model = train_eigenshape(&train, 11).unwrap();
        for s in &train {
            assert_eq!(&model.denoise(s, 11, 0.5).unwrap(), s);
        }
    }

    #[test]
    fn reconstruction_error_is_monotone_in_components() {
        let train = ellipses(20);
        let model = train_eigenshape(&train, 10).unwrap();
        let probe = synth::ellipse(40, 40, 21.0, 19.0, 13.0, 11.0).unwrap();
        let x = probe.to_f64_vec();
        let mut last = f64::INFINITY;
        for n in 0..=10 {
            let r = model.reconstruct(&probe, n).unwrap();
            let err: f64 = r.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum();
            assert!(err <= last + 1e-9, "n={n}: {err} > {last}");
            last = err;
        }
    }

    #[test]
    fn mean_input_projects_to_zero() {
        let model = train_eigenshape(&ellipses(10), 4).unwrap();
        let coeffs = model.project(model.mean(), 4);
        assert!(coeffs.iter().all(|c| c.abs() < 1e-9));
        let thresholded =
            BinaryShape::from_pixels(40, 40, model.mean().iter().map(|&v| (v >= 0.5) as u8).collect()).unwrap();
        let back = model.expand(&coeffs);
        assert!(back.iter().zip(model.mean()).all(|(a, b)| (a - b).abs() < 1e-9));
        // The thresholded mean is not itself in the affine subspace, so its
        // reconstruction is close to, not identical with, the input.
        let out = model.denoise(&thresholded, 4, 0.5).unwrap();
        assert!(crate::shape::iou(&out, &thresholded).unwrap() > 0.9);
    }

    #[test]
    fn argument_errors() {
        let s = synth::disk(16, 16, 8.0, 8.0, 5.0).unwrap();
        assert!(matches!(
            train_eigenshape(std::slice::from_ref(&s), 1),
            Err(Error::NotEnoughSamples { .. })
        ));
        assert!(train_eigenshape(&[s.clone(), s.clone()], 2).is_err());
        assert!(train_eigenshape(&[s.clone(), s.clone()], 0).is_err());
        let other = BinaryShape::new(8, 8).unwrap();
        assert!(train_eigenshape(&[s.clone(), other.clone()], 1).is_err());
        let model = train_eigenshape(&[s.clone(), s.complement()], 1).unwrap();
        assert!(model.denoise(&other, 1, 0.5).is_err());
        assert!(model.denoise(&s, 2, 0.5).is_err());
    }

    #[test]
    fn serialization_round_trips_bit_exactly() {
        let model = train_eigenshape(&ellipses(6), 3).unwrap();
        let bytes = model.to_bytes();
        assert_eq!(&bytes[..8], MODEL_MAGIC);
        assert_eq!(bytes.len(), 8 + 12 + 8 * (1600 + 3 * 1600 + 3));
        let back = EigenshapeModel::read_from(bytes.as_slice()).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_bytes(), bytes);

        assert!(EigenshapeModel::read_from(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(EigenshapeModel::read_from(bad.as_slice()).is_err());
    }
}
