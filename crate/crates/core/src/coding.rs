//! Retina-style image coding and spike conversion.
//!
//! Images go through an optional color transform, a difference-of-Gaussians
//! filter and an on/off split, then get scaled per image into `[0, 1]`.
//! Patches of the result are latency coded: value `x` becomes one spike at
//! `(1 - x) * duration`. Output spikes are decoded back into feature values.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::binio::{self, ByteReader, ByteWriter};
use crate::data::{luminance, Image};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DogParams {
    /// Odd kernel side.
    pub size: usize,
    /// Variance of the center Gaussian.
    pub center_sigma: f64,
    /// Variance of the surround Gaussian.
    pub surround_sigma: f64,
}

impl Default for DogParams {
    fn default() -> Self {
        Self {
            size: 7,
            center_sigma: 1.0,
            surround_sigma: 2.0,
        }
    }
}

impl DogParams {
    pub fn validate(&self) -> Result<()> {
        if self.size < 3 || self.size.is_multiple_of(2) {
            return Err(Error::InvalidParam(format!(
                "DoG size must be odd and >= 3, got {}",
                self.size
            )));
        }
        if !(self.center_sigma > 0.0 && self.center_sigma < self.surround_sigma) {
            return Err(Error::InvalidParam(format!(
                "DoG sigmas must satisfy 0 < center ({}) < surround ({})",
                self.center_sigma, self.surround_sigma
            )));
        }
        Ok(())
    }
}

/// How an image is turned into input channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorStrategy {
    /// Luminance, DoG, on/off: 2 channels.
    Grayscale,
    /// R-G, G-B, B-R opponents, each DoG + on/off: 6 channels.
    RgbOpponent,
    /// R-G and (R+G)/2-B opponents, each DoG + on/off: 4 channels.
    BioColor,
    /// Two independent sub-stacks: grayscale (2) and bio-color (4).
    GrayscalePlusColor,
    /// Unfiltered RGB pixels: 3 channels.
    RawRgb,
    /// Unfiltered luminance: 1 channel.
    RawGray,
}

impl ColorStrategy {
    pub const ALL: [ColorStrategy; 6] = [
        ColorStrategy::Grayscale,
        ColorStrategy::RgbOpponent,
        ColorStrategy::BioColor,
        ColorStrategy::GrayscalePlusColor,
        ColorStrategy::RawRgb,
        ColorStrategy::RawGray,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ColorStrategy::Grayscale => "grayscale",
            ColorStrategy::RgbOpponent => "rgb_opponent",
            ColorStrategy::BioColor => "bio_color",
            ColorStrategy::GrayscalePlusColor => "grayscale_plus_color",
            ColorStrategy::RawRgb => "raw_rgb",
            ColorStrategy::RawGray => "raw_gray",
        }
    }

    pub fn tag(self) -> u32 {
        match self {
            ColorStrategy::Grayscale => 0,
            ColorStrategy::RgbOpponent => 1,
            ColorStrategy::BioColor => 2,
            ColorStrategy::GrayscalePlusColor => 3,
            ColorStrategy::RawRgb => 4,
            ColorStrategy::RawGray => 5,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.tag() == tag)
    }

    /// Single-stack strategies making up this one, in sub-stack order.
    pub fn parts(self) -> Vec<ColorStrategy> {
        match self {
            ColorStrategy::GrayscalePlusColor => vec![ColorStrategy::Grayscale, ColorStrategy::BioColor],
            s => vec![s],
        }
    }

    /// Channel count of each sub-stack.
    pub fn part_channels(self) -> Vec<usize> {
        self.parts()
            .into_iter()
            .map(|p| match p {
                ColorStrategy::Grayscale => 2,
                ColorStrategy::RgbOpponent => 6,
                ColorStrategy::BioColor => 4,
                ColorStrategy::RawRgb => 3,
                ColorStrategy::RawGray => 1,
                ColorStrategy::GrayscalePlusColor => unreachable!(),
            })
            .collect()
    }

    pub fn uses_dog(self) -> bool {
        !matches!(self, ColorStrategy::RawRgb | ColorStrategy::RawGray)
    }

    /// Whether the input must be a 3-channel image.
    pub fn needs_color(self) -> bool {
        !matches!(self, ColorStrategy::Grayscale | ColorStrategy::RawGray)
    }
}

impl fmt::Display for ColorStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ColorStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParam(format!("unknown color strategy {s:?}")))
    }
}

/// Coded channels of one image. Holds one sub-stack, or two for
/// [`ColorStrategy::GrayscalePlusColor`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStack {
    pub strategy: ColorStrategy,
    pub parts: Vec<Image>,
}

impl ChannelStack {
    pub fn channels(&self) -> usize {
        self.parts.iter().map(|p| p.channels).sum()
    }
}

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

/// Normalized `size`×`size` Gaussian kernel (row-major) with variance `sigma`.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Vec<f64>> {
    if size.is_multiple_of(2) {
        return Err(Error::InvalidParam(format!("kernel size must be odd, got {size}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidParam(format!("sigma must be positive, got {sigma}")));
    }
    let mu = (size / 2) as i64;
    let mut k: Vec<f64> = Vec::with_capacity(size * size);
    for u in -mu..=mu {
        for v in -mu..=mu {
            k.push((-((u * u + v * v) as f64) / (2.0 * sigma)).exp());
        }
    }
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|x| *x /= total);
    Ok(k)
}

fn gaussian_1d(size: usize, sigma: f64) -> Vec<f64> {
    let mu = (size / 2) as i64;
    let k: Vec<f64> = (-mu..=mu)
        .map(|u| (-((u * u) as f64) / (2.0 * sigma)).exp())
        .collect();
    let total: f64 = k.iter().sum();
    k.into_iter().map(|x| x / total).collect()
}

/// Separable blur with replicate-edge borders.
fn blur(map: &Image, k: &[f64]) -> Image {
    let (h, w) = (map.height, map.width);
    let mu = (k.len() / 2) as isize;
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; h * w];
    for y in 0..h {
        let row = &map.data[y * w..(y + 1) * w];
        for x in 0..w {
            tmp[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(i, &kv)| kv * row[clamp(x as isize + i as isize - mu, w)])
                .sum();
        }
    }
    let mut out = Image::zeros(h, w, 1);
    for y in 0..h {
        for x in 0..w {
            out.data[y * w + x] = k
                .iter()
                .enumerate()
                .map(|(i, &kv)| kv * tmp[clamp(y as isize + i as isize - mu, h) * w + x])
                .sum();
        }
    }
    out
}

/// Responses smaller than this fraction of the input's largest magnitude are
/// rounding noise (a flat region) and are set to exactly zero.
pub const DOG_SNAP: f64 = 1e-12;

/// Difference-of-Gaussians response of a single-channel map, same size as
/// the input (replicate-edge padding).
pub fn dog_filter(map: &Image, p: &DogParams) -> Result<Image> {
    p.validate()?;
    if map.channels != 1 {
        return Err(Error::Channels {
            expected: 1,
            got: map.channels,
        });
    }
    let center = blur(map, &gaussian_1d(p.size, p.center_sigma));
    let surround = blur(map, &gaussian_1d(p.size, p.surround_sigma));
    let tol = DOG_SNAP * map.data.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let data = center
        .data
        .iter()
        .zip(&surround.data)
        .map(|(c, s)| if (c - s).abs() <= tol { 0.0 } else { c - s })
        .collect();
    Ok(Image {
        height: map.height,
        width: map.width,
        channels: 1,
        data,
    })
}

/// Splits a signed map into its positive ("on") and negated negative ("off") parts.
pub fn on_off_split(map: &Image) -> (Image, Image) {
    let mut on = map.clone();
    let mut off = map.clone();
    for ((a, b), &v) in on.data.iter_mut().zip(off.data.iter_mut()).zip(&map.data) {
        *a = v.max(0.0);
        *b = (-v).max(0.0);
    }
    (on, off)
}

/// Pre-filter channels for a strategy: opponent maps, luminance, or raw RGB.
pub fn color_transform(image: &Image, strategy: ColorStrategy) -> Result<Vec<Image>> {
    if strategy.needs_color() && image.channels != 3 {
        return Err(Error::Channels {
            expected: 3,
            got: image.channels,
        });
    }
    let combine = |f: &dyn Fn(f64, f64, f64) -> f64| {
        let data = image.data.chunks_exact(3).map(|p| f(p[0], p[1], p[2])).collect();
        Image {
            height: image.height,
            width: image.width,
            channels: 1,
            data,
        }
    };
    let gray = || -> Result<Image> {
        match image.channels {
            1 => Ok(image.clone()),
            3 => luminance(image),
            c => Err(Error::Channels { expected: 3, got: c }),
        }
    };
    Ok(match strategy {
        ColorStrategy::Grayscale | ColorStrategy::RawGray => vec![gray()?],
        ColorStrategy::RgbOpponent => vec![
            combine(&|r, g, _| r - g),
            combine(&|_, g, b| g - b),
            combine(&|r, _, b| b - r),
        ],
        ColorStrategy::BioColor => vec![
            combine(&|r, g, _| r - g),
            combine(&|r, g, b| 0.5 * r + 0.5 * g - b),
        ],
        ColorStrategy::GrayscalePlusColor => vec![
            gray()?,
            combine(&|r, g, _| r - g),
            combine(&|r, g, b| 0.5 * r + 0.5 * g - b),
        ],
        ColorStrategy::RawRgb => (0..3).map(|c| image.channel(c)).collect(),
    })
}

fn encode_part(image: &Image, strategy: ColorStrategy, p: &DogParams) -> Result<Image> {
    let maps = color_transform(image, strategy)?;
    if !strategy.uses_dog() {
        return Image::from_channels(&maps);
    }
    let mut channels = Vec::with_capacity(maps.len() * 2);
    for m in &maps {
        let (on, off) = on_off_split(&dog_filter(m, p)?);
        channels.push(on);
        channels.push(off);
    }
    let mut stack = Image::from_channels(&channels)?;
    let peak = stack.data.iter().fold(0.0f64, |a, &b| a.max(b));
    if peak > 0.0 {
        stack.data.iter_mut().for_each(|v| *v /= peak);
    }
    Ok(stack)
}

/// Codes a whole image. DoG strategies are scaled jointly over all on/off
/// channels of a sub-stack so that the strongest response maps to 1.
pub fn encode_image(image: &Image, strategy: ColorStrategy, p: &DogParams) -> Result<ChannelStack> {
    let parts = strategy
        .parts()
        .into_iter()
        .map(|s| encode_part(image, s, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelStack { strategy, parts })
}

// ---------------------------------------------------------------------------
// Spikes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikeEvent {
    pub time: f64,
    pub input: usize,
}

/// Input spikes of one sample, sorted by time then input index.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTrain {
    pub events: Vec<SpikeEvent>,
    pub duration: f64,
    pub n_inputs: usize,
}

impl SpikeTrain {
    pub fn empty(n_inputs: usize, duration: f64) -> Self {
        Self {
            events: Vec::new(),
            duration,
            n_inputs,
        }
    }
}

/// Latency-codes values in `[0, 1]`: every input fires once at
/// `(1 - x) * duration`, so `x == 0` fires at the end of the window.
pub fn encode_latency(values: &[f64], duration: f64) -> Result<SpikeTrain> {
    let mut events = Vec::with_capacity(values.len());
    for (input, &x) in values.iter().enumerate() {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfRange { index: input, value: x });
        }
        events.push(SpikeEvent {
            time: (1.0 - x) * duration,
            input,
        });
    }
    // stable: equal times keep ascending input order
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(SpikeTrain {
        events,
        duration,
        n_inputs: values.len(),
    })
}

/// Converts output spike times into features: `1 - (t - t_min) / (t_max - t_min)`,
/// with a missing spike treated as `t_max`.
pub fn decode_features(spikes: &[Option<f64>], t_min: f64, t_max: f64) -> Result<Vec<f64>> {
    if !(t_min < t_max) {
        return Err(Error::InvalidParam(format!(
            "output window [{t_min}, {t_max}] is empty"
        )));
    }
    spikes
        .iter()
        .map(|s| match *s {
            None => Ok(0.0),
            Some(t) if t < t_min || t > t_max => Err(Error::Timestamp {
                t,
                lo: t_min,
                hi: t_max,
            }),
            Some(t) => Ok((1.0 - (t - t_min) / (t_max - t_min)).clamp(0.0, 1.0)),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Coded-set cache
// ---------------------------------------------------------------------------

const CODE_MAGIC: &[u8; 8] = b"SPKFCODE";
const CODE_VERSION: u32 = 1;

/// A whole split after coding, as cached by the preprocessing stage.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedSet {
    pub strategy: ColorStrategy,
    pub n_classes: usize,
    pub labels: Vec<usize>,
    pub stacks: Vec<ChannelStack>,
}

impl CodedSet {
    /// Layout: magic, version, strategy tag, n_classes (u32), count (u64),
    /// part count (u32), then `(h, w, c)` per part as u32, labels as u32,
    /// and every stack's parts as little-endian f64.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = ByteWriter::new();
        w.bytes(CODE_MAGIC);
        w.u32(CODE_VERSION);
        w.u32(self.strategy.tag());
        w.u32(self.n_classes as u32);
        w.u64(self.stacks.len() as u64);
        let dims: Vec<(usize, usize, usize)> = match self.stacks.first() {
            Some(s) => s.parts.iter().map(|p| (p.height, p.width, p.channels)).collect(),
            None => Vec::new(),
        };
        w.u32(dims.len() as u32);
        for &(h, wd, c) in &dims {
            w.u32(h as u32);
            w.u32(wd as u32);
            w.u32(c as u32);
        }
        for &l in &self.labels {
            w.u32(l as u32);
        }
        for s in &self.stacks {
            for (p, d) in s.parts.iter().zip(&dims) {
                if (p.height, p.width, p.channels) != *d {
                    return Err(Error::InvalidParam("stacks of unequal size cannot be cached".into()));
                }
                w.f64s(&p.data);
            }
        }
        w.write(path)
    }

    pub fn read(path: &Path) -> Result<CodedSet> {
        let bytes = binio::read_all(path)?;
        let mut r = ByteReader::new(&bytes, path);
        r.expect_magic(CODE_MAGIC)?;
        let version = r.u32()?;
        if version != CODE_VERSION {
            return Err(r.error(format!("unsupported version {version}")));
        }
        let strategy = ColorStrategy::from_tag(r.u32()?).ok_or_else(|| r.error("unknown strategy tag"))?;
        let n_classes = r.u32()? as usize;
        let n = r.usize()?;
        let n_parts = r.u32()? as usize;
        let mut dims = Vec::with_capacity(n_parts);
        for _ in 0..n_parts {
            dims.push((r.u32()? as usize, r.u32()? as usize, r.u32()? as usize));
        }
        let labels = (0..n).map(|_| r.u32().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
        let mut stacks = Vec::with_capacity(n);
        for _ in 0..n {
            let parts = dims
                .iter()
                .map(|&(h, w, c)| Image::new(h, w, c, r.f64s(h * w * c)?))
                .collect::<Result<Vec<_>>>()?;
            stacks.push(ChannelStack { strategy, parts });
        }
        r.finish()?;
        Ok(CodedSet {
            strategy,
            n_classes,
            labels,
            stacks,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(h: usize, w: usize, f: impl Fn(usize, usize) -> f64) -> Image {
        let mut m = Image::zeros(h, w, 1);
        for y in 0..h {
            for x in 0..w {
                m.data[y * w + x] = f(y, x);
            }
        }
        m
    }

    #[test]
    fn kernel_properties() {
        for (s, sigma) in [(1, 0.3), (3, 1.0), (5, 2.0), (7, 1.0), (7, 4.0), (9, 0.5)] {
            let k = gaussian_kernel(s, sigma).unwrap();
            assert_eq!(k.len(), s * s);
            assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(gaussian_kernel(1, 1.0).unwrap(), vec![1.0]);
        assert!(gaussian_kernel(4, 1.0).is_err());
        assert!(gaussian_kernel(3, 0.0).is_err());
        assert!(gaussian_kernel(3, -1.0).is_err());
    }

    #[test]
    fn kernel_center_s3() {
        // 1 / (1 + 4 e^-1/2 + 4 e^-1)
        let want = 1.0 / (1.0 + 4.0 * (-0.5f64).exp() + 4.0 * (-1.0f64).exp());
        let k = gaussian_kernel(3, 1.0).unwrap();
        assert!((k[4] - want).abs() < 1e-15);
        assert!((k[4] - 0.2042).abs() < 5e-5);
    }

    #[test]
    fn dog_of_constant_is_zero() {
        let m = map(10, 13, |_, _| 0.37);
        let d = dog_filter(&m, &DogParams::default()).unwrap();
        assert!(d.data.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn dog_of_impulse_is_kernel() {
        let p = DogParams::default();
        let m = map(21, 21, |y, x| if y == 10 && x == 10 { 1.0 } else { 0.0 });
        let d = dog_filter(&m, &p).unwrap();
        let c = gaussian_kernel(7, 1.0).unwrap();
        let s = gaussian_kernel(7, 2.0).unwrap();
        for u in 0..7 {
            for v in 0..7 {
                let want = c[u * 7 + v] - s[u * 7 + v];
                assert!((d.data[(7 + u) * 21 + 7 + v] - want).abs() < 1e-12);
            }
        }
        assert!(d.data[0].abs() < 1e-15);
    }

    #[test]
    fn dog_rejects_bad_params() {
        let m = map(4, 4, |_, _| 0.0);
        for p in [
            DogParams { size: 6, ..Default::default() },
            DogParams { size: 1, ..Default::default() },
            DogParams { center_sigma: 2.0, surround_sigma: 1.0, ..Default::default() },
        ] {
            assert!(dog_filter(&m, &p).is_err());
        }
    }

    #[test]
    fn on_off_values() {
        let m = Image::new(1, 3, 1, vec![0.3, -0.5, 0.0]).unwrap();
        let (on, off) = on_off_split(&m);
        assert_eq!(on.data, vec![0.3, 0.0, 0.0]);
        assert_eq!(off.data, vec![0.0, 0.5, 0.0]);
    }

    #[test]
    fn color_transforms() {
        let px = |r, g, b| Image::new(1, 1, 3, vec![r, g, b]).unwrap();
        let vals = |maps: Vec<Image>| maps.iter().map(|m| m.data[0]).collect::<Vec<_>>();
        assert_eq!(vals(color_transform(&px(1., 1., 1.), ColorStrategy::RgbOpponent).unwrap()), vec![0., 0., 0.]);
        assert_eq!(vals(color_transform(&px(1., 0., 0.), ColorStrategy::RgbOpponent).unwrap()), vec![1., 0., -1.]);
        assert_eq!(vals(color_transform(&px(0., 0., 1.), ColorStrategy::BioColor).unwrap())[1], -1.0);
        assert_eq!(vals(color_transform(&px(0.2, 0.4, 0.6), ColorStrategy::RawRgb).unwrap()), vec![0.2, 0.4, 0.6]);
        let gray = Image::new(1, 1, 1, vec![0.5]).unwrap();
        assert!(color_transform(&gray, ColorStrategy::BioColor).is_err());
        assert_eq!(vals(color_transform(&gray, ColorStrategy::Grayscale).unwrap()), vec![0.5]);
    }

    #[test]
    fn encode_image_channel_counts() {
        let set = crate::data::make_synthetic(1, 12, 2, 0).unwrap();
        let im = &set.images[0].pixels;
        let p = DogParams::default();
        for s in ColorStrategy::ALL {
            let st = encode_image(im, s, &p).unwrap();
            let got: Vec<usize> = st.parts.iter().map(|x| x.channels).collect();
            assert_eq!(got, s.part_channels(), "{s}");
            for part in &st.parts {
                assert!(part.data.iter().all(|v| (0.0..=1.0).contains(v)));
                if s.uses_dog() {
                    let peak = part.data.iter().cloned().fold(0.0, f64::max);
                    assert!((peak - 1.0).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn constant_image_codes_to_zero() {
        let im = Image::new(8, 8, 3, vec![0.4; 192]).unwrap();
        let st = encode_image(&im, ColorStrategy::Grayscale, &DogParams::default()).unwrap();
        assert!(st.parts[0].data.iter().all(|&v| v == 0.0));
        let zero = Image::zeros(8, 8, 3);
        let st = encode_image(&zero, ColorStrategy::RgbOpponent, &DogParams::default()).unwrap();
        assert!(st.parts[0].data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn latency_examples() {
        let t = encode_latency(&[1.0, 0.0, 0.3], 1.0).unwrap();
        assert_eq!(t.n_inputs, 3);
        assert_eq!(t.events, vec![
            SpikeEvent { time: 0.0, input: 0 },
            SpikeEvent { time: 0.7, input: 2 },
            SpikeEvent { time: 1.0, input: 1 },
        ]);
        assert!(encode_latency(&[1.2], 1.0).is_err());
        assert!(encode_latency(&[-0.1], 1.0).is_err());
    }

    #[test]
    fn latency_ties_by_index() {
        let t = encode_latency(&[0.5, 0.9, 0.5, 0.5], 2.0).unwrap();
        let order: Vec<usize> = t.events.iter().map(|e| e.input).collect();
        assert_eq!(order, vec![1, 0, 2, 3]);
    }

    #[test]
    fn decode_examples() {
        let f = decode_features(&[Some(0.0), None, Some(0.5)], 0.0, 1.0).unwrap();
        assert_eq!(f, vec![1.0, 0.0, 0.5]);
        assert!(decode_features(&[Some(1.5)], 0.0, 1.0).is_err());
        assert!(decode_features(&[None], 1.0, 1.0).is_err());
    }

    #[test]
    fn coded_set_roundtrip() {
        let set = crate::data::make_synthetic(3, 10, 3, 4).unwrap();
        let stacks: Vec<ChannelStack> = set
            .images
            .iter()
            .map(|im| encode_image(&im.pixels, ColorStrategy::GrayscalePlusColor, &DogParams::default()).unwrap())
            .collect();
        let coded = CodedSet {
            strategy: ColorStrategy::GrayscalePlusColor,
            n_classes: 3,
            labels: set.labels(),
            stacks,
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.bin");
        coded.write(&p).unwrap();
        assert_eq!(CodedSet::read(&p).unwrap(), coded);
        std::fs::write(&p, b"SPKFCODE").unwrap();
        assert!(CodedSet::read(&p).is_err());
    }
}
