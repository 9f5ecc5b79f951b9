//! Evaluation protocol: dense feature extraction, sum pooling, and a
//! one-vs-rest linear SVM on standardized descriptors.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;

use crate::binio::{self, ByteReader, ByteWriter};
use crate::coding::{encode_image, ChannelStack, CodedSet, DogParams};
use crate::data::{grid_side, Image, LabeledImageSet};
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::rng::{self, stream};
use crate::snn::Inhibition;

/// Dense-extraction and pooling parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol {
    pub stride: usize,
    pub pool_grid: usize,
    pub dog: DogParams,
    pub inhibition: Inhibition,
}

impl Default for Protocol {
    fn default() -> Self {
        Self {
            stride: 1,
            pool_grid: 2,
            dog: DogParams::default(),
            inhibition: Inhibition::On,
        }
    }
}

/// `rows × cols × n_f` feature maps of one image, position-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMaps {
    pub rows: usize,
    pub cols: usize,
    pub n_f: usize,
    pub data: Vec<f64>,
}

impl FeatureMaps {
    pub fn at(&self, i: usize, j: usize) -> &[f64] {
        let o = (i * self.cols + j) * self.n_f;
        &self.data[o..o + self.n_f]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageDescriptor {
    pub values: Vec<f64>,
    pub label: usize,
}

/// Runs the dictionary over every stride-`s` patch of an already coded image.
pub fn extract_maps_coded(dict: &Dictionary, stack: &ChannelStack, stride: usize, inhibition: Inhibition) -> Result<FeatureMaps> {
    if stack.strategy != dict.strategy || stack.parts.len() != dict.parts.len() {
        return Err(Error::InvalidParam(format!(
            "dictionary strategy {} does not match coded stack {}",
            dict.strategy, stack.strategy
        )));
    }
    if stride == 0 {
        return Err(Error::InvalidParam("stride must be >= 1".into()));
    }
    let w_p = dict.patch_side;
    let first = &stack.parts[0];
    if w_p > first.height || w_p > first.width {
        return Err(Error::InvalidParam(format!("patch side {w_p} exceeds image")));
    }
    for (p, e) in stack.parts.iter().zip(&dict.parts) {
        if w_p * w_p * p.channels != e.n_inputs() {
            return Err(Error::Dimension {
                expected: e.n_inputs(),
                got: w_p * w_p * p.channels,
            });
        }
    }
    let rows = grid_side(first.height, w_p, stride);
    let cols = grid_side(first.width, w_p, stride);
    let n_f = dict.n_f();
    let mut data = Vec::with_capacity(rows * cols * n_f);
    let mut crops: Vec<Image> = Vec::with_capacity(stack.parts.len());
    for i in 0..rows {
        for j in 0..cols {
            crops.clear();
            crops.extend(stack.parts.iter().map(|p| p.crop(i * stride, j * stride, w_p)));
            let views: Vec<&[f64]> = crops.iter().map(|c| c.data.as_slice()).collect();
            data.extend(dict.features(&views, inhibition)?);
        }
    }
    Ok(FeatureMaps { rows, cols, n_f, data })
}

/// Codes `image` for the dictionary's strategy, then extracts dense feature maps.
pub fn extract_maps(dict: &Dictionary, image: &Image, protocol: &Protocol) -> Result<FeatureMaps> {
    let stack = encode_image(image, dict.strategy, &protocol.dog)?;
    extract_maps_coded(dict, &stack, protocol.stride, protocol.inhibition)
}

/// Cell boundaries `round(k * i / r)` for `i = 0..=r`.
pub fn pool_bounds(k: usize, r: usize) -> Vec<usize> {
    (0..=r).map(|i| (k as f64 * i as f64 / r as f64).round() as usize).collect()
}

/// Sums feature vectors within each of `r × r` cells, concatenated row-major by cell.
pub fn sum_pool(maps: &FeatureMaps, r: usize) -> Result<Vec<f64>> {
    if r == 0 || r > maps.rows || r > maps.cols {
        return Err(Error::InvalidParam(format!(
            "pool grid {r} does not fit {}x{} maps",
            maps.rows, maps.cols
        )));
    }
    let rb = pool_bounds(maps.rows, r);
    let cb = pool_bounds(maps.cols, r);
    let n_f = maps.n_f;
    let mut out = vec![0.0; r * r * n_f];
    for ci in 0..r {
        for cj in 0..r {
            let cell = &mut out[(ci * r + cj) * n_f..(ci * r + cj + 1) * n_f];
            for i in rb[ci]..rb[ci + 1] {
                for j in cb[cj]..cb[cj + 1] {
                    for (o, v) in cell.iter_mut().zip(maps.at(i, j)) {
                        *o += v;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Descriptors for a raw image set, in set order.
pub fn build_descriptors(dict: &Dictionary, set: &LabeledImageSet, protocol: &Protocol) -> Result<Vec<ImageDescriptor>> {
    set.images
        .par_iter()
        .map(|im| {
            let maps = extract_maps(dict, &im.pixels, protocol)?;
            Ok(ImageDescriptor {
                values: sum_pool(&maps, protocol.pool_grid)?,
                label: im.label,
            })
        })
        .collect()
}

/// Descriptors for a cached coded set, in set order.
pub fn build_descriptors_coded(dict: &Dictionary, coded: &CodedSet, protocol: &Protocol) -> Result<Vec<ImageDescriptor>> {
    coded
        .stacks
        .par_iter()
        .zip(coded.labels.par_iter())
        .map(|(st, &label)| {
            let maps = extract_maps_coded(dict, st, protocol.stride, protocol.inhibition)?;
            Ok(ImageDescriptor {
                values: sum_pool(&maps, protocol.pool_grid)?,
                label,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Linear classifier
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmOptions {
    /// Hinge-loss penalty.
    pub c: f64,
    /// Stop when the projected-gradient spread of a full pass drops below this.
    pub tol: f64,
    pub max_passes: usize,
    pub seed: u64,
    /// Start the dual from random feasible values instead of zero.
    pub random_init: bool,
}

impl Default for SvmOptions {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-3,
            max_passes: 1000,
            seed: 0,
            random_init: false,
        }
    }
}

/// One-vs-rest linear model. Each class row holds `dim` weights then a bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub n_classes: usize,
    pub dim: usize,
    pub c: f64,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
}

fn standardizer(descs: &[ImageDescriptor], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let n = descs.len() as f64;
    let mut mean = vec![0.0; dim];
    for d in descs {
        for (m, v) in mean.iter_mut().zip(&d.values) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for d in descs {
        for ((s, v), m) in var.iter_mut().zip(&d.values).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var
        .into_iter()
        .map(|s| {
            let sd = (s / n).sqrt();
            if sd > 1e-12 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    (mean, std)
}

impl LinearModel {
    /// Standardized features with a trailing constant 1 for the bias.
    pub fn transform(&self, values: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = values
            .iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect();
        x.push(1.0);
        x
    }

    pub fn scores(&self, values: &[f64]) -> Vec<f64> {
        let x = self.transform(values);
        self.weights
            .iter()
            .map(|w| w.iter().zip(&x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Highest-scoring class, lowest index on ties.
    pub fn predict(&self, values: &[f64]) -> usize {
        let s = self.scores(values);
        let mut best = 0;
        for (k, &v) in s.iter().enumerate() {
            if v > s[best] {
                best = k;
            }
        }
        best
    }

    /// Primal objective `0.5 |w|^2 + C sum max(0, 1 - y w.x)` of every class.
    pub fn primal_objectives(&self, descs: &[ImageDescriptor]) -> Vec<f64> {
        let xs: Vec<Vec<f64>> = descs.iter().map(|d| self.transform(&d.values)).collect();
        self.weights
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
                let hinge: f64 = xs
                    .iter()
                    .zip(descs)
                    .map(|(x, d)| {
                        let y = if d.label == k { 1.0 } else { -1.0 };
                        let m: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
                        (1.0 - y * m).max(0.0)
                    })
                    .sum();
                reg + self.c * hinge
            })
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = ByteWriter::new();
        w.bytes(MODEL_MAGIC);
        w.u32(1);
        w.u64(self.n_classes as u64);
        w.u64(self.dim as u64);
        w.f64(self.c);
        w.f64s(&self.mean);
        w.f64s(&self.std);
        for row in &self.weights {
            w.f64s(row);
        }
        w.write(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = binio::read_all(path)?;
        let mut r = ByteReader::new(&bytes, path);
        r.expect_magic(MODEL_MAGIC)?;
        if r.u32()? != 1 {
            return Err(r.error("unsupported version"));
        }
        let n_classes = r.usize()?;
        let dim = r.usize()?;
        let c = r.f64()?;
        let mean = r.f64s(dim)?;
        let std = r.f64s(dim)?;
        let weights = (0..n_classes).map(|_| r.f64s(dim + 1)).collect::<Result<Vec<_>>>()?;
        r.finish()?;
        Ok(Self {
            n_classes,
            dim,
            c,
            mean,
            std,
            weights,
        })
    }
}

const MODEL_MAGIC: &[u8; 8] = b"SPKFLSVM";

/// Dual coordinate descent for one binary L2-regularized hinge-loss problem.
fn train_binary(xs: &[Vec<f64>], ys: &[f64], opts: &SvmOptions, rng: &mut rng::Rng) -> Vec<f64> {
    let dim = xs[0].len();
    let n = xs.len();
    let q: Vec<f64> = xs.iter().map(|x| x.iter().map(|v| v * v).sum()).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; dim];
    if opts.random_init {
        for (i, a) in alpha.iter_mut().enumerate() {
            *a = rng.gen_range(0.0..=opts.c);
            for (wv, xv) in w.iter_mut().zip(&xs[i]) {
                *wv += *a * ys[i] * xv;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..opts.max_passes {
        order.shuffle(rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for &i in &order {
            if q[i] <= 0.0 {
                continue;
            }
            let x = &xs[i];
            let g = ys[i] * w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= opts.c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / q[i]).clamp(0.0, opts.c);
                let step = (alpha[i] - old) * ys[i];
                if step != 0.0 {
                    for (wv, xv) in w.iter_mut().zip(x) {
                        *wv += step * xv;
                    }
                }
            }
        }
        if pg_max - pg_min < opts.tol {
            break;
        }
    }
    w
}

/// Fits a standardized one-vs-rest linear SVM. `n_classes` defaults to
/// one past the largest training label.
pub fn train_linear(descs: &[ImageDescriptor], n_classes: Option<usize>, opts: &SvmOptions) -> Result<LinearModel> {
    let first = descs.first().ok_or(Error::SingleClass(0))?;
    let dim = first.values.len();
    if let Some(d) = descs.iter().find(|d| d.values.len() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            got: d.values.len(),
        });
    }
    let max_label = descs.iter().map(|d| d.label).max().unwrap_or(0);
    let n_classes = n_classes.unwrap_or(max_label + 1).max(max_label + 1);
    let mut present = vec![false; n_classes];
    descs.iter().for_each(|d| present[d.label] = true);
    let distinct = present.iter().filter(|&&p| p).count();
    if distinct < 2 {
        return Err(Error::SingleClass(distinct));
    }
    let (mean, std) = standardizer(descs, dim);
    let mut model = LinearModel {
        n_classes,
        dim,
        c: opts.c,
        mean,
        std,
        weights: Vec::new(),
    };
    let xs: Vec<Vec<f64>> = descs.iter().map(|d| model.transform(&d.values)).collect();
    model.weights = (0..n_classes)
        .into_par_iter()
        .map(|k| {
            let ys: Vec<f64> = descs.iter().map(|d| if d.label == k { 1.0 } else { -1.0 }).collect();
            let mut rng = rng::seeded(opts.seed.wrapping_add(k as u64), stream::SVM);
            train_binary(&xs, &ys, opts, &mut rng)
        })
        .collect();
    Ok(model)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

pub fn evaluate(model: &LinearModel, descs: &[ImageDescriptor]) -> Result<Evaluation> {
    let k = model.n_classes;
    let mut confusion = vec![vec![0usize; k]; k];
    let preds: Vec<usize> = descs.par_iter().map(|d| model.predict(&d.values)).collect();
    for (d, p) in descs.iter().zip(preds) {
        if d.label >= k {
            return Err(Error::InvalidParam(format!("test label {} unknown to a {k}-class model", d.label)));
        }
        confusion[d.label][p] += 1;
    }
    let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
    Ok(Evaluation {
        accuracy: if descs.is_empty() { 0.0 } else { correct as f64 / descs.len() as f64 },
        confusion,
    })
}

// ---------------------------------------------------------------------------
// Descriptor cache
// ---------------------------------------------------------------------------

const DESC_MAGIC: &[u8; 8] = b"SPKFDESC";

/// Layout: magic, `n`, `dim`, `n_classes` as u64, row-major f32 values, u32 labels.
pub fn write_descriptors(descs: &[ImageDescriptor], n_classes: usize, path: &Path) -> Result<()> {
    let dim = descs.first().map_or(0, |d| d.values.len());
    let mut w = ByteWriter::new();
    w.bytes(DESC_MAGIC);
    w.u64(descs.len() as u64);
    w.u64(dim as u64);
    w.u64(n_classes as u64);
    for d in descs {
        w.f32s(&d.values);
    }
    for d in descs {
        w.u32(d.label as u32);
    }
    w.write(path)
}

pub fn read_descriptors(path: &Path) -> Result<(Vec<ImageDescriptor>, usize)> {
    let bytes = binio::read_all(path)?;
    let mut r = ByteReader::new(&bytes, path);
    r.expect_magic(DESC_MAGIC)?;
    let n = r.usize()?;
    let dim = r.usize()?;
    let n_classes = r.usize()?;
    let rows = (0..n).map(|_| r.f32s(dim)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(n);
    for values in rows {
        out.push(ImageDescriptor {
            values,
            label: r.u32()? as usize,
        });
    }
    r.finish()?;
    Ok((out, n_classes))
}
