//! Image datasets: binary loaders, color conversion and patch sampling.
//!
//! Pixels are stored as `f64` in `[0, 1]`, interleaved height × width ×
//! channel. Loaders divide bytes by 255 and never clamp.

use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::{self, stream};

/// A dense H×W×C tensor, channel-interleaved (`data[(y * w + x) * c + ch]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        let expected = height * width * channels;
        if data.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Self {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    #[inline]
    pub fn index(&self, y: usize, x: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn at(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[self.index(y, x, c)]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: f64) {
        let i = self.index(y, x, c);
        self.data[i] = v;
    }

    /// Extracts channel `c` as a single-channel image.
    pub fn channel(&self, c: usize) -> Image {
        let data = self.data.iter().skip(c).step_by(self.channels).copied().collect();
        Image {
            height: self.height,
            width: self.width,
            channels: 1,
            data,
        }
    }

    /// Stacks single-channel maps of equal size into one multi-channel image.
    pub fn from_channels(maps: &[Image]) -> Result<Image> {
        let first = maps
            .first()
            .ok_or_else(|| Error::InvalidParam("no channels to stack".into()))?;
        let (h, w, c) = (first.height, first.width, maps.len());
        let mut out = Image::zeros(h, w, c);
        for (ch, m) in maps.iter().enumerate() {
            if m.channels != 1 || m.height != h || m.width != w {
                return Err(Error::Dimension {
                    expected: h * w,
                    got: m.data.len(),
                });
            }
            for (p, &v) in m.data.iter().enumerate() {
                out.data[p * c + ch] = v;
            }
        }
        Ok(out)
    }

    /// Copies the `side`×`side` window whose top-left corner is `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, side: usize) -> Image {
        debug_assert!(row + side <= self.height && col + side <= self.width);
        let c = self.channels;
        let mut data = Vec::with_capacity(side * side * c);
        for y in row..row + side {
            let start = self.index(y, col, 0);
            data.extend_from_slice(&self.data[start..start + side * c]);
        }
        Image {
            height: side,
            width: side,
            channels: c,
            data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
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
            other => Err(Error::InvalidParam(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub pixels: Image,
    pub label: usize,
    pub source_id: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImageSet {
    pub images: Vec<LabeledImage>,
    pub split: Split,
    pub n_classes: usize,
}

impl LabeledImageSet {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.images.iter().map(|im| im.label).collect()
    }

    /// Converts every image to single-channel luminance.
    pub fn to_grayscale(&self) -> Result<LabeledImageSet> {
        let images = self
            .images
            .iter()
            .map(to_grayscale)
            .collect::<Result<Vec<_>>>()?;
        Ok(LabeledImageSet {
            images,
            split: self.split,
            n_classes: self.n_classes,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchOrigin {
    pub image: usize,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub values: Image,
    pub origin: PatchOrigin,
}

/// Row-major grid of densely extracted patches.
#[derive(Debug, Clone)]
pub struct PatchGrid {
    pub rows: usize,
    pub cols: usize,
    pub patches: Vec<Patch>,
}

// ---------------------------------------------------------------------------
// Binary loaders
// ---------------------------------------------------------------------------

const CIFAR_SIDE: usize = 32;
const STL_SIDE: usize = 96;

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Resolves a dataset directory, descending into the archive's own
/// top-level folder when the user points at its parent.
fn dataset_dir(path: &Path, inner: &str) -> PathBuf {
    let nested = path.join(inner);
    if nested.is_dir() {
        nested
    } else {
        path.to_path_buf()
    }
}

/// Parses CIFAR-style records: `label_bytes` label bytes (the last one is the
/// class) followed by `side*side` bytes per channel, R then G then B,
/// row-major within each plane.
pub fn parse_cifar_records(
    bytes: &[u8],
    path: &Path,
    side: usize,
    label_bytes: usize,
    n_classes: usize,
    first_id: usize,
) -> Result<Vec<LabeledImage>> {
    let plane = side * side;
    let record = label_bytes + 3 * plane;
    if bytes.is_empty() || !bytes.len().is_multiple_of(record) {
        return Err(Error::RecordSize {
            path: path.to_path_buf(),
            len: bytes.len(),
            record,
        });
    }
    bytes
        .chunks_exact(record)
        .enumerate()
        .map(|(i, rec)| {
            let label = rec[label_bytes - 1] as usize;
            if label >= n_classes {
                return Err(Error::LabelRange {
                    path: path.to_path_buf(),
                    index: i,
                    label,
                    n_classes,
                });
            }
            let px = &rec[label_bytes..];
            let mut data = Vec::with_capacity(3 * plane);
            for p in 0..plane {
                for c in 0..3 {
                    data.push(px[c * plane + p] as f64 / 255.0);
                }
            }
            Ok(LabeledImage {
                pixels: Image {
                    height: side,
                    width: side,
                    channels: 3,
                    data,
                },
                label,
                source_id: first_id + i,
            })
        })
        .collect()
}

fn load_cifar_files(
    files: &[PathBuf],
    label_bytes: usize,
    n_classes: usize,
    split: Split,
) -> Result<LabeledImageSet> {
    let mut images = Vec::new();
    for f in files {
        let bytes = read_file(f)?;
        let recs = parse_cifar_records(&bytes, f, CIFAR_SIDE, label_bytes, n_classes, images.len())?;
        images.extend(recs);
    }
    Ok(LabeledImageSet {
        images,
        split,
        n_classes,
    })
}

/// Loads CIFAR-10 from the directory holding `data_batch_{1..5}.bin` and
/// `test_batch.bin` (or its parent).
pub fn load_cifar10(path: &Path, split: Split) -> Result<LabeledImageSet> {
    let dir = dataset_dir(path, "cifar-10-batches-bin");
    let files: Vec<PathBuf> = match split {
        Split::Train => (1..=5).map(|i| dir.join(format!("data_batch_{i}.bin"))).collect(),
        Split::Test => vec![dir.join("test_batch.bin")],
    };
    load_cifar_files(&files, 1, 10, split)
}

/// Loads CIFAR-100 (`train.bin` / `test.bin`); the fine label is the class.
pub fn load_cifar100(path: &Path, split: Split) -> Result<LabeledImageSet> {
    let dir = dataset_dir(path, "cifar-100-binary");
    let file = match split {
        Split::Train => dir.join("train.bin"),
        Split::Test => dir.join("test.bin"),
    };
    load_cifar_files(&[file], 2, 100, split)
}

/// Parses STL-10 image and label blobs. Images are 3×96×96, channel-planar,
/// column-major within a plane; labels are 1-indexed bytes.
pub fn parse_stl10(images: &[u8], labels: &[u8], path: &Path) -> Result<Vec<LabeledImage>> {
    let plane = STL_SIDE * STL_SIDE;
    let record = 3 * plane;
    if images.is_empty() || !images.len().is_multiple_of(record) {
        return Err(Error::RecordSize {
            path: path.to_path_buf(),
            len: images.len(),
            record,
        });
    }
    let n = images.len() / record;
    if n != labels.len() {
        return Err(Error::CountMismatch {
            images: n,
            labels: labels.len(),
        });
    }
    images
        .chunks_exact(record)
        .zip(labels)
        .enumerate()
        .map(|(i, (rec, &lab))| {
            if lab == 0 || lab > 10 {
                return Err(Error::LabelRange {
                    path: path.to_path_buf(),
                    index: i,
                    label: lab as usize,
                    n_classes: 10,
                });
            }
            let mut img = Image::zeros(STL_SIDE, STL_SIDE, 3);
            for c in 0..3 {
                for col in 0..STL_SIDE {
                    for row in 0..STL_SIDE {
                        let b = rec[c * plane + col * STL_SIDE + row];
                        img.set(row, col, c, b as f64 / 255.0);
                    }
                }
            }
            Ok(LabeledImage {
                pixels: img,
                label: lab as usize - 1,
                source_id: i,
            })
        })
        .collect()
}

/// Loads STL-10 from `stl10_binary/` (`{train,test}_X.bin`, `{train,test}_y.bin`).
pub fn load_stl10(path: &Path, split: Split) -> Result<LabeledImageSet> {
    let dir = dataset_dir(path, "stl10_binary");
    let stem = match split {
        Split::Train => "train",
        Split::Test => "test",
    };
    let xp = dir.join(format!("{stem}_X.bin"));
    let yp = dir.join(format!("{stem}_y.bin"));
    let xs = read_file(&xp)?;
    let ys = read_file(&yp)?;
    Ok(LabeledImageSet {
        images: parse_stl10(&xs, &ys, &xp)?,
        split,
        n_classes: 10,
    })
}

/// Writes a 3-channel set in the CIFAR-10 record layout (one label byte,
/// then planar R, G, B). Values are quantized with `round(v * 255)`.
pub fn write_cifar_style(set: &LabeledImageSet, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for im in &set.images {
        let p = &im.pixels;
        if p.channels != 3 {
            return Err(Error::Channels {
                expected: 3,
                got: p.channels,
            });
        }
        if im.label > u8::MAX as usize {
            return Err(Error::InvalidParam(format!("label {} does not fit a byte", im.label)));
        }
        out.push(im.label as u8);
        for c in 0..3 {
            for y in 0..p.height {
                for x in 0..p.width {
                    out.push((p.at(y, x, c) * 255.0).round() as u8);
                }
            }
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a file produced by [`write_cifar_style`].
pub fn read_cifar_style(path: &Path, side: usize, n_classes: usize, split: Split) -> Result<LabeledImageSet> {
    let bytes = read_file(path)?;
    Ok(LabeledImageSet {
        images: parse_cifar_records(&bytes, path, side, 1, n_classes, 0)?,
        split,
        n_classes,
    })
}

// ---------------------------------------------------------------------------
// Color conversion and patches
// ---------------------------------------------------------------------------

/// BT.601 luminance weights.
pub const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

pub fn luminance(img: &Image) -> Result<Image> {
    if img.channels != 3 {
        return Err(Error::Channels {
            expected: 3,
            got: img.channels,
        });
    }
    let data = img
        .data
        .chunks_exact(3)
        .map(|p| LUMA[0] * p[0] + LUMA[1] * p[1] + LUMA[2] * p[2])
        .collect();
    Ok(Image {
        height: img.height,
        width: img.width,
        channels: 1,
        data,
    })
}

pub fn to_grayscale(image: &LabeledImage) -> Result<LabeledImage> {
    Ok(LabeledImage {
        pixels: luminance(&image.pixels)?,
        label: image.label,
        source_id: image.source_id,
    })
}

/// Draws `n_p` patch origins uniformly (with replacement) over every
/// (image, valid top-left position) pair. All images must share one size.
pub fn sample_patch_origins(
    n_images: usize,
    height: usize,
    width: usize,
    n_p: usize,
    w_p: usize,
    seed: u64,
) -> Result<Vec<PatchOrigin>> {
    if w_p == 0 || w_p > height || w_p > width {
        return Err(Error::InvalidParam(format!(
            "patch side {w_p} does not fit a {height}x{width} image"
        )));
    }
    if n_images == 0 || n_p == 0 {
        return Err(Error::InvalidParam("need at least one image and one patch".into()));
    }
    let mut rng = rng::seeded(seed, stream::PATCHES);
    let rows = height - w_p + 1;
    let cols = width - w_p + 1;
    Ok((0..n_p)
        .map(|_| PatchOrigin {
            image: rng.gen_range(0..n_images),
            row: rng.gen_range(0..rows),
            col: rng.gen_range(0..cols),
        })
        .collect())
}

/// Samples `n_p` random `w_p`×`w_p` patches from `images`.
pub fn sample_patches(images: &[&Image], n_p: usize, w_p: usize, seed: u64) -> Result<Vec<Patch>> {
    let first = images
        .first()
        .ok_or_else(|| Error::InvalidParam("no images to sample from".into()))?;
    let origins = sample_patch_origins(images.len(), first.height, first.width, n_p, w_p, seed)?;
    Ok(origins
        .into_iter()
        .map(|o| Patch {
            values: images[o.image].crop(o.row, o.col, w_p),
            origin: o,
        })
        .collect())
}

pub fn sample_set_patches(set: &LabeledImageSet, n_p: usize, w_p: usize, seed: u64) -> Result<Vec<Patch>> {
    let imgs: Vec<&Image> = set.images.iter().map(|i| &i.pixels).collect();
    sample_patches(&imgs, n_p, w_p, seed)
}

/// Number of patch positions along a side: `floor((side - w_p) / s) + 1`.
pub fn grid_side(side: usize, w_p: usize, stride: usize) -> usize {
    (side - w_p) / stride + 1
}

/// Extracts every `w_p`×`w_p` patch at stride `s`, row-major by top-left corner.
pub fn dense_patches(image: &Image, w_p: usize, s: usize, image_index: usize) -> Result<PatchGrid> {
    if s == 0 {
        return Err(Error::InvalidParam("stride must be >= 1".into()));
    }
    if w_p == 0 || w_p > image.height || w_p > image.width {
        return Err(Error::InvalidParam(format!(
            "patch side {w_p} does not fit a {}x{} image",
            image.height, image.width
        )));
    }
    let rows = grid_side(image.height, w_p, s);
    let cols = grid_side(image.width, w_p, s);
    let mut patches = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let (row, col) = (i * s, j * s);
            patches.push(Patch {
                values: image.crop(row, col, w_p),
                origin: PatchOrigin {
                    image: image_index,
                    row,
                    col,
                },
            });
        }
    }
    Ok(PatchGrid { rows, cols, patches })
}

// ---------------------------------------------------------------------------
// Synthetic fixture
// ---------------------------------------------------------------------------

/// Generates a class-conditional set of striped images on a noisy background.
///
/// Class `c` uses stripe orientation `pi * c / n_classes` and its own color;
/// stripe period and phase are drawn per image. Labels cycle `0..n_classes`.
pub fn make_synthetic(
    n_images: usize,
    side: usize,
    n_classes: usize,
    seed: u64,
) -> Result<LabeledImageSet> {
    use std::f64::consts::{PI, TAU};
    if n_classes < 2 {
        return Err(Error::InvalidParam("synthetic sets need >= 2 classes".into()));
    }
    let mut rng = rng::seeded(seed, stream::SYNTHETIC);
    let colors: Vec<[f64; 3]> = (0..n_classes)
        .map(|c| {
            let hue = c as f64 / n_classes as f64 * TAU;
            [
                0.6 + 0.4 * hue.cos(),
                0.6 + 0.4 * (hue - TAU / 3.0).cos(),
                0.6 + 0.4 * (hue - 2.0 * TAU / 3.0).cos(),
            ]
        })
        .collect();
    let mut images = Vec::with_capacity(n_images);
    for i in 0..n_images {
        let label = i % n_classes;
        let theta = PI * label as f64 / n_classes as f64;
        let (dx, dy) = (theta.cos(), theta.sin());
        let period: f64 = rng.gen_range(4.0..7.0);
        let phase: f64 = rng.gen_range(0.0..TAU);
        let color = colors[label];
        let mut img = Image::zeros(side, side, 3);
        for y in 0..side {
            for x in 0..side {
                let u = (x as f64 * dx + y as f64 * dy) / period;
                let s = 0.5 + 0.5 * (TAU * u + phase).cos();
                for (c, &col) in color.iter().enumerate() {
                    let noise: f64 = rng.gen_range(0.0..0.2);
                    let v = noise + 0.75 * s * col;
                    img.set(y, x, c, v.clamp(0.0, 1.0));
                }
            }
        }
        images.push(LabeledImage {
            pixels: img,
            label,
            source_id: i,
        });
    }
    Ok(LabeledImageSet {
        images,
        split: Split::Train,
        n_classes,
    })
}
