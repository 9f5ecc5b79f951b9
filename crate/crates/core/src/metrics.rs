//! Feature-quality analyses: sparseness, coherence, reconstruction, weight
//! histograms, filter sheets, and plain-text report output.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::classify::extract_maps_coded;
use crate::coding::{ChannelStack, ColorStrategy};
use crate::data::{grid_side, Image};
use crate::dictionary::{Dictionary, Extractor};
use crate::error::{Error, Result};
use crate::snn::Inhibition;

// ---------------------------------------------------------------------------
// Sparseness
// ---------------------------------------------------------------------------

/// Hoyer sparseness `(sqrt(n) - L1/L2) / (sqrt(n) - 1)`. The all-zero vector
/// counts as maximally sparse (1).
pub fn sparseness(f: &[f64]) -> Result<f64> {
    let n = f.len();
    if n < 2 {
        return Err(Error::InvalidParam(format!("sparseness needs >= 2 entries, got {n}")));
    }
    let l1: f64 = f.iter().map(|v| v.abs()).sum();
    let l2 = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    if l2 == 0.0 {
        return Ok(1.0);
    }
    let rn = (n as f64).sqrt();
    Ok(((rn - l1 / l2) / (rn - 1.0)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsenessReport {
    pub values: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl SparsenessReport {
    pub fn from_values(values: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&values);
        Self { values, mean, std }
    }
}

/// Population mean and standard deviation; `(0, 0)` for an empty slice.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Sparseness measured two ways on dense feature maps.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSparseness {
    /// One value per image over its flattened `k × k × n_f` maps.
    pub per_image: SparsenessReport,
    /// Mean over all patches of the per-patch feature vector's sparseness.
    pub per_patch_mean: f64,
}

pub fn feature_sparseness(
    dict: &Dictionary,
    stacks: &[ChannelStack],
    stride: usize,
    inhibition: Inhibition,
) -> Result<FeatureSparseness> {
    let rows: Vec<(f64, f64, usize)> = stacks
        .par_iter()
        .map(|st| {
            let maps = extract_maps_coded(dict, st, stride, inhibition)?;
            let image = sparseness(&maps.data)?;
            let mut patch_sum = 0.0;
            for f in maps.data.chunks_exact(maps.n_f) {
                patch_sum += sparseness(f)?;
            }
            Ok((image, patch_sum, maps.rows * maps.cols))
        })
        .collect::<Result<_>>()?;
    let patches: usize = rows.iter().map(|r| r.2).sum();
    let patch_sum: f64 = rows.iter().map(|r| r.1).sum();
    Ok(FeatureSparseness {
        per_image: SparsenessReport::from_values(rows.iter().map(|r| r.0).collect()),
        per_patch_mean: if patches == 0 { 0.0 } else { patch_sum / patches as f64 },
    })
}

// ---------------------------------------------------------------------------
// Coherence
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceReport {
    /// Row-major `n × n` over the retained (nonzero) features.
    pub matrix: Vec<f64>,
    pub n: usize,
    /// Indices of features kept, in input order.
    pub kept: Vec<usize>,
    /// Zero-norm features left out.
    pub dead: usize,
    pub mean: f64,
    pub std: f64,
    pub max: f64,
}

impl CoherenceReport {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }
}

/// Absolute cosine similarity between every pair of nonzero filters.
pub fn coherence_matrix(filters: &[&[f64]]) -> CoherenceReport {
    let mut kept = Vec::new();
    let mut unit: Vec<Vec<f64>> = Vec::new();
    for (i, f) in filters.iter().enumerate() {
        let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            kept.push(i);
            unit.push(f.iter().map(|v| v / norm).collect());
        }
    }
    let n = unit.len();
    let mut matrix = vec![0.0; n * n];
    for i in 0..n {
        matrix[i * n + i] = 1.0;
        for j in i + 1..n {
            let d: f64 = unit[i].iter().zip(&unit[j]).map(|(a, b)| a * b).sum();
            let mu = d.abs().min(1.0);
            matrix[i * n + j] = mu;
            matrix[j * n + i] = mu;
        }
    }
    let off: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| matrix[i * n + j])
        .collect();
    let (mean, std) = mean_std(&off);
    let max = off.iter().copied().fold(0.0, f64::max);
    CoherenceReport {
        matrix,
        n,
        kept,
        dead: filters.len() - n,
        mean,
        std,
        max,
    }
}

/// Coherence computed separately for each part of a dictionary.
pub fn dictionary_coherence(dict: &Dictionary) -> Vec<CoherenceReport> {
    dict.parts.iter().map(|p| coherence_matrix(&p.filters())).collect()
}

// ---------------------------------------------------------------------------
// Reconstruction
// ---------------------------------------------------------------------------

/// Reconstructs one flattened coded patch: activation-weighted sum of weight
/// rows for an SNN, decoder output for an AE.
pub fn reconstruct_patch(extractor: &Extractor, values: &[f64], inhibition: Inhibition) -> Result<Vec<f64>> {
    match extractor {
        Extractor::Snn(s) => {
            let f = s.extract(values, inhibition)?;
            Ok(combine_rows(&f, &s.weights, s.config.n_inputs))
        }
        Extractor::Ae(a) => Ok(a.decode(&a.encode(values)?)),
    }
}

/// `sum_i f_i * row_i` over a row-major matrix with `n` columns.
pub fn combine_rows(f: &[f64], rows: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (fi, row) in f.iter().zip(rows.chunks_exact(n)) {
        if *fi != 0.0 {
            for (o, w) in out.iter_mut().zip(row) {
                *o += fi * w;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// Reconstructed coded sub-stacks, same shapes as the input stack.
    pub parts: Vec<Image>,
    /// Sum of squared differences over every coded value of the image.
    pub error: f64,
    /// `error` divided by the number of coded values.
    pub mse: f64,
}

/// Dense patch reconstruction averaged over overlapping patches.
pub fn reconstruct_image(
    dict: &Dictionary,
    stack: &ChannelStack,
    stride: usize,
    inhibition: Inhibition,
) -> Result<Reconstruction> {
    reconstruct_with(stack, dict.patch_side, stride, |p, values| {
        reconstruct_patch(&dict.parts[p], values, inhibition)
    })
}

/// Same as [`reconstruct_image`] with an arbitrary per-part patch reconstructor.
pub fn reconstruct_with<F>(stack: &ChannelStack, w_p: usize, stride: usize, recon: F) -> Result<Reconstruction>
where
    F: Fn(usize, &[f64]) -> Result<Vec<f64>>,
{
    if stride == 0 {
        return Err(Error::InvalidParam("stride must be >= 1".into()));
    }
    let mut parts = Vec::with_capacity(stack.parts.len());
    let mut error = 0.0;
    let mut count = 0usize;
    for (pi, part) in stack.parts.iter().enumerate() {
        if w_p > part.height || w_p > part.width {
            return Err(Error::InvalidParam(format!("patch side {w_p} exceeds image")));
        }
        let c = part.channels;
        let mut acc = Image::zeros(part.height, part.width, c);
        let mut hits = vec![0usize; part.height * part.width];
        for i in 0..grid_side(part.height, w_p, stride) {
            for j in 0..grid_side(part.width, w_p, stride) {
                let (r0, c0) = (i * stride, j * stride);
                let patch = part.crop(r0, c0, w_p);
                let rec = recon(pi, &patch.data)?;
                if rec.len() != patch.data.len() {
                    return Err(Error::Dimension {
                        expected: patch.data.len(),
                        got: rec.len(),
                    });
                }
                for y in 0..w_p {
                    for x in 0..w_p {
                        hits[(r0 + y) * part.width + c0 + x] += 1;
                        for ch in 0..c {
                            let k = acc.index(r0 + y, c0 + x, ch);
                            acc.data[k] += rec[(y * w_p + x) * c + ch];
                        }
                    }
                }
            }
        }
        for (px, &h) in hits.iter().enumerate() {
            for ch in 0..c {
                let k = px * c + ch;
                if h > 0 {
                    acc.data[k] /= h as f64;
                }
                let d = acc.data[k] - part.data[k];
                error += d * d;
            }
        }
        count += part.data.len();
        parts.push(acc);
    }
    Ok(Reconstruction {
        parts,
        error,
        mse: if count == 0 { 0.0 } else { error / count as f64 },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    /// Per-image sum of squared differences.
    pub errors: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Mean per-value squared error.
    pub mean_mse: f64,
}

pub fn reconstruction_report(
    dict: &Dictionary,
    stacks: &[ChannelStack],
    stride: usize,
    inhibition: Inhibition,
) -> Result<ReconstructionReport> {
    let recs: Vec<(f64, f64)> = stacks
        .par_iter()
        .map(|st| reconstruct_image(dict, st, stride, inhibition).map(|r| (r.error, r.mse)))
        .collect::<Result<_>>()?;
    let errors: Vec<f64> = recs.iter().map(|r| r.0).collect();
    let (mean, std) = mean_std(&errors);
    let mean_mse = mean_std(&recs.iter().map(|r| r.1).collect::<Vec<_>>()).0;
    Ok(ReconstructionReport {
        errors,
        mean,
        std,
        mean_mse,
    })
}

// ---------------------------------------------------------------------------
// Weight histograms
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Equal-width histogram over `[lo, hi]`; out-of-range values are clamped
/// into the end bins and `hi` itself falls in the last bin.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Histogram> {
    if bins < 2 {
        return Err(Error::InvalidParam(format!("histogram needs >= 2 bins, got {bins}")));
    }
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0u64; bins];
    for &v in values {
        let b = (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Histogram of all weights: SNN weights over `[w_min, w_max]`, AE encoder
/// and decoder weights over their observed range.
pub fn weight_histogram(extractor: &Extractor, bins: usize) -> Result<Histogram> {
    match extractor {
        Extractor::Snn(s) => histogram(&s.weights, s.config.w_min, s.config.w_max, bins),
        Extractor::Ae(a) => {
            let all: Vec<f64> = a.params.w_enc.iter().chain(&a.params.w_dec).copied().collect();
            let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if all.is_empty() {
                return histogram(&all, 0.0, 1.0, bins);
            }
            histogram(&all, lo, hi, bins)
        }
    }
}

/// Fraction of SNN weights in `[w_min, w_min + m·range] ∪ [w_max − m·range, w_max]`.
pub fn outer_mass(weights: &[f64], w_min: f64, w_max: f64, margin: f64) -> f64 {
    if weights.is_empty() {
        return 0.0;
    }
    let m = margin * (w_max - w_min);
    let n = weights.iter().filter(|&&w| w <= w_min + m || w >= w_max - m).count();
    n as f64 / weights.len() as f64
}

// ---------------------------------------------------------------------------
// Filter sheets
// ---------------------------------------------------------------------------

/// 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Rgb8 {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Rgb8 {
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let o = (y * self.width + x) * 3;
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    /// Binary PPM (`P6`).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    pub fn write_ppm(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, self.to_ppm()).map_err(|e| Error::io(path, e))
    }
}

fn to_byte(v: f64) -> u8 {
    (255.0 * v.clamp(0.0, 1.0)).round() as u8
}

/// Renders one filter row as a `w_p × w_p` tile of RGB values in `[0, 1]`.
///
/// On/off pairs become signed maps (on − off) shown around mid-gray and
/// scaled by the tile's largest magnitude; raw strategies map `[lo, hi]`
/// linearly onto `[0, 1]`.
pub fn filter_tile(row: &[f64], strategy: ColorStrategy, w_p: usize, lo: f64, hi: f64) -> Result<Vec<[f64; 3]>> {
    let channels = match strategy.part_channels().as_slice() {
        [c] => *c,
        _ => {
            return Err(Error::InvalidParam(format!(
                "filter tiles need a single-part strategy, got {strategy}"
            )))
        }
    };
    if row.len() != w_p * w_p * channels {
        return Err(Error::Dimension {
            expected: w_p * w_p * channels,
            got: row.len(),
        });
    }
    let px = row.chunks_exact(channels);
    if !strategy.uses_dog() {
        let span = if hi > lo { hi - lo } else { 1.0 };
        return Ok(px
            .map(|p| {
                let s = |v: f64| (v - lo) / span;
                match channels {
                    1 => [s(p[0]); 3],
                    _ => [s(p[0]), s(p[1]), s(p[2])],
                }
            })
            .collect());
    }
    let signed: Vec<Vec<f64>> = px
        .map(|p| p.chunks_exact(2).map(|oo| oo[0] - oo[1]).collect())
        .collect();
    let rgb: Vec<[f64; 3]> = signed
        .iter()
        .map(|s| match strategy {
            ColorStrategy::Grayscale => [s[0]; 3],
            ColorStrategy::RgbOpponent => {
                let (a, b, c) = (s[0], s[1], s[2]);
                [a - c, b - a, c - b]
            }
            ColorStrategy::BioColor => {
                let (a, b) = (s[0], s[1]);
                [a / 2.0 + b / 3.0, b / 3.0 - a / 2.0, -2.0 * b / 3.0]
            }
            _ => unreachable!(),
        })
        .collect();
    let m = rgb.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let m = if m > 0.0 { m } else { 1.0 };
    Ok(rgb
        .into_iter()
        .map(|p| p.map(|v| (v / m + 1.0) / 2.0))
        .collect())
}

/// Lays out tiles of one dictionary part on a grid of `ceil(sqrt(n_f))`
/// columns with 1-pixel black separators, each tile pixel magnified `scale` times.
pub fn filter_sheet(extractor: &Extractor, strategy: ColorStrategy, w_p: usize, scale: usize) -> Result<Rgb8> {
    let scale = scale.max(1);
    let filters = extractor.filters();
    let (lo, hi) = match extractor {
        Extractor::Snn(s) => (s.config.w_min, s.config.w_max),
        Extractor::Ae(a) => (
            a.params.w_enc.iter().copied().fold(f64::INFINITY, f64::min),
            a.params.w_enc.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ),
    };
    let n = filters.len();
    let cols = (n as f64).sqrt().ceil().max(1.0) as usize;
    let rows = n.div_ceil(cols).max(1);
    let tile = w_p * scale;
    let width = cols * (tile + 1) + 1;
    let height = rows * (tile + 1) + 1;
    let mut img = Rgb8 {
        width,
        height,
        data: vec![0; width * height * 3],
    };
    for (k, f) in filters.iter().enumerate() {
        let t = filter_tile(f, strategy, w_p, lo, hi)?;
        let (ty, tx) = (k / cols, k % cols);
        let (oy, ox) = (1 + ty * (tile + 1), 1 + tx * (tile + 1));
        for y in 0..tile {
            for x in 0..tile {
                let p = t[(y / scale) * w_p + x / scale];
                let o = ((oy + y) * width + ox + x) * 3;
                for c in 0..3 {
                    img.data[o + c] = to_byte(p[c]);
                }
            }
        }
    }
    Ok(img)
}

/// Writes one PPM per dictionary part as `<stem>_part<i>.ppm`; returns the paths.
pub fn export_filters(dict: &Dictionary, dir: &Path, stem: &str, scale: usize) -> Result<Vec<std::path::PathBuf>> {
    let mut out = Vec::new();
    for (i, (part, strat)) in dict.parts.iter().zip(dict.strategy.parts()).enumerate() {
        let sheet = filter_sheet(part, strat, dict.patch_side, scale)?;
        let path = dir.join(format!("{stem}_part{i}.ppm"));
        sheet.write_ppm(&path)?;
        out.push(path);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Tabular output
// ---------------------------------------------------------------------------

/// CSV text: a `# title` line, a header row, then one row per record.
pub fn csv_table(title: &str, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {title}");
    let _ = writeln!(s, "{}", header.join(","));
    for r in rows {
        let _ = writeln!(s, "{}", r.join(","));
    }
    s
}

pub fn write_csv(path: &Path, title: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, csv_table(title, header, rows)).map_err(|e| Error::io(path, e))
}

pub fn histogram_rows(h: &Histogram) -> Vec<Vec<String>> {
    h.counts
        .iter()
        .enumerate()
        .map(|(i, c)| vec![format!("{:.6}", h.edges[i]), format!("{:.6}", h.edges[i + 1]), c.to_string()])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ae::{AeConfig, AeState};
    use crate::snn::{SnnConfig, SnnState};

    #[test]
    fn sparseness_examples() {
        let mut one_hot = vec![0.0; 64];
        one_hot[5] = 0.3;
        assert_eq!(sparseness(&one_hot).unwrap(), 1.0);
        assert!(sparseness(&[0.7; 64]).unwrap().abs() < 1e-12);
        let v = sparseness(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((v - (2.0 - 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(sparseness(&[0.0; 8]).unwrap(), 1.0);
        assert!(sparseness(&[1.0]).is_err());
    }

    #[test]
    fn coherence_examples() {
        let r = coherence_matrix(&[&[1.0, 0.0], &[1.0, 1.0], &[0.0, 0.0], &[0.0, -2.0]]);
        assert_eq!(r.n, 3);
        assert_eq!(r.dead, 1);
        assert_eq!(r.kept, vec![0, 1, 3]);
        assert!((r.at(0, 1) - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.at(0, 2), 0.0);
        assert!((r.at(1, 2) - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((r.max - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        let same = coherence_matrix(&[&[0.3, 0.4], &[0.3, 0.4]]);
        assert!((same.at(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn snn_patch_reconstruction() {
        let mut s = SnnState::new(SnnConfig::new(3, 4)).unwrap();
        s.weights = vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.5, 0.0, 0.2, 0.2, 0.2, 0.2];
        s.delays = vec![0.0; 12];
        s.thresholds = vec![100.0; 3];
        let e = Extractor::Snn(s.clone());
        assert_eq!(reconstruct_patch(&e, &[1.0; 4], Inhibition::On).unwrap(), vec![0.0; 4]);
        assert_eq!(combine_rows(&[0.0, 1.0, 0.0], &s.weights, 4), vec![0.0, 1.0, 0.5, 0.0]);
    }

    #[test]
    fn identity_reconstruction_has_zero_error() {
        let mut part = Image::zeros(9, 9, 2);
        for (i, v) in part.data.iter_mut().enumerate() {
            *v = (i % 7) as f64 / 7.0;
        }
        let stack = ChannelStack {
            strategy: ColorStrategy::Grayscale,
            parts: vec![part.clone()],
        };
        let r = reconstruct_with(&stack, 5, 1, |_, v| Ok(v.to_vec())).unwrap();
        assert!(r.error < 1e-24);
        assert!(r.parts[0].data.iter().zip(&part.data).all(|(a, b)| (a - b).abs() < 1e-14));
        let zero = reconstruct_with(&stack, 5, 2, |_, v| Ok(vec![0.0; v.len()])).unwrap();
        let ss: f64 = part.data.iter().map(|v| v * v).sum();
        assert!((zero.error - ss).abs() < 1e-12);
        assert!((zero.mse - ss / 162.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_counts() {
        let h = histogram(&[0.0, 0.1, 0.5, 0.9, 1.0], 0.0, 1.0, 2).unwrap();
        assert_eq!(h.counts, vec![2, 3]);
        assert_eq!(h.edges, vec![0.0, 0.5, 1.0]);
        assert!(histogram(&[1.0], 0.0, 1.0, 1).is_err());
        let s = SnnState::new(SnnConfig::new(4, 50)).unwrap();
        let h = weight_histogram(&Extractor::Snn(s), 2).unwrap();
        assert_eq!(h.total(), 200);
        let a = AeState::new(AeConfig::new(3, 4)).unwrap();
        assert_eq!(weight_histogram(&Extractor::Ae(a), 5).unwrap().total(), 24);
        assert_eq!(outer_mass(&[0.0, 0.05, 0.5, 0.95], 0.0, 1.0, 0.1), 0.75);
    }

    #[test]
    fn filter_sheet_layout_and_range() {
        let mut s = SnnState::new(SnnConfig::new(64, 75)).unwrap();
        s.weights[..75].iter_mut().for_each(|w| *w = 1.0);
        let sheet = filter_sheet(&Extractor::Snn(s.clone()), ColorStrategy::RawRgb, 5, 2).unwrap();
        assert_eq!((sheet.width, sheet.height), (8 * 11 + 1, 8 * 11 + 1));
        assert_eq!(sheet.pixel(1, 1), [255; 3]);
        assert_eq!(sheet.pixel(10, 10), [255; 3]);
        assert_eq!(sheet.pixel(0, 0), [0; 3]);
        let ppm = sheet.to_ppm();
        assert!(ppm.starts_with(b"P6\n89 89\n255\n"));

        let g = SnnState::new(SnnConfig { seed: 3, ..SnnConfig::new(4, 50) }).unwrap();
        let sheet = filter_sheet(&Extractor::Snn(g), ColorStrategy::Grayscale, 5, 1).unwrap();
        let tile: Vec<u8> = (1..6).flat_map(|y| (1..6).map(move |x| (x, y))).map(|(x, y)| sheet.pixel(x, y)[0]).collect();
        assert!(tile.contains(&0) || tile.contains(&255));
    }

    #[test]
    fn opponent_tile_is_gray_for_equal_channels() {
        // Equal signed responses on every opponent channel give zero color.
        let row: Vec<f64> = (0..9).flat_map(|_| [0.5, 0.0, 0.5, 0.0, 0.5, 0.0]).collect();
        let t = filter_tile(&row, ColorStrategy::RgbOpponent, 3, 0.0, 1.0).unwrap();
        assert!(t.iter().all(|p| p.iter().all(|&v| (v - 0.5).abs() < 1e-12)));
        assert!(filter_tile(&row, ColorStrategy::GrayscalePlusColor, 3, 0.0, 1.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let s = csv_table("sparseness", &["a", "b"], &[vec!["1".into(), "2".into()]]);
        assert_eq!(s, "# sparseness\na,b\n1,2\n");
    }
}
