//! In-memory building blocks of an experiment: coding whole splits,
//! sampling training patches from coded stacks, training a dictionary and
//! running the classification protocol.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ae::{train_ae, AeConfig};
use crate::classify::{
    build_descriptors_coded, evaluate, train_linear, Evaluation, ImageDescriptor, Protocol, SvmOptions,
};
use crate::coding::{encode_image, CodedSet, ColorStrategy, DogParams};
use crate::data::{sample_patch_origins, LabeledImageSet};
use crate::dictionary::{Dictionary, Extractor};
use crate::error::{Error, Result};
use crate::snn::{train_snn, SnnConfig, SnnState, TrainingLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractorKind {
    Snn,
    Ae,
}

impl fmt::Display for ExtractorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtractorKind::Snn => "snn",
            ExtractorKind::Ae => "ae",
        })
    }
}

impl FromStr for ExtractorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snn" => Ok(ExtractorKind::Snn),
            "ae" => Ok(ExtractorKind::Ae),
            _ => Err(Error::InvalidParam(format!("unknown extractor {s:?}"))),
        }
    }
}

/// Codes every image of a split, in order.
pub fn encode_set(set: &LabeledImageSet, strategy: ColorStrategy, dog: &DogParams) -> Result<CodedSet> {
    dog.validate()?;
    let stacks = set
        .images
        .par_iter()
        .map(|im| encode_image(&im.pixels, strategy, dog))
        .collect::<Result<Vec<_>>>()?;
    Ok(CodedSet {
        strategy,
        n_classes: set.n_classes,
        labels: set.labels(),
        stacks,
    })
}

/// Samples `n_p` patch positions and returns, per sub-stack, the flattened
/// patches at those positions.
pub fn sample_coded_patches(coded: &CodedSet, n_p: usize, w_p: usize, seed: u64) -> Result<Vec<Vec<Vec<f64>>>> {
    let first = coded
        .stacks
        .first()
        .ok_or_else(|| Error::InvalidParam("no coded images to sample from".into()))?;
    let (h, w) = (first.parts[0].height, first.parts[0].width);
    let origins = sample_patch_origins(coded.stacks.len(), h, w, n_p, w_p, seed)?;
    Ok((0..first.parts.len())
        .map(|p| {
            origins
                .iter()
                .map(|o| coded.stacks[o.image].parts[p].crop(o.row, o.col, w_p).data)
                .collect()
        })
        .collect())
}

/// Everything needed to train one dictionary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSpec {
    pub kind: ExtractorKind,
    /// Total features; split in halves across two sub-stacks.
    pub n_f: usize,
    pub patch_side: usize,
    pub n_patches: usize,
    pub epochs: usize,
    /// Template whose `n_f`, `n_inputs` and `seed` are overwritten per part.
    pub snn: SnnConfig,
    /// Template whose `n_f`, `n_inputs`, `epochs` and `seed` are overwritten per part.
    pub ae: AeConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PartLog {
    Snn(TrainingLog),
    Ae(Vec<f64>),
}

/// Feature counts of each part: everything for one part, halves for two.
pub fn split_features(n_f: usize, parts: usize) -> Vec<usize> {
    (0..parts).map(|p| n_f / parts + usize::from(p < n_f % parts)).collect()
}

/// Seed of sub-dictionary `part` for a run seed.
pub fn part_seed(seed: u64, part: usize) -> u64 {
    seed ^ ((part as u64) << 32)
}

/// Trains one dictionary on patches sampled from a coded training split.
pub fn train_dictionary(coded: &CodedSet, spec: &TrainSpec) -> Result<(Dictionary, Vec<PartLog>)> {
    let chans = coded.strategy.part_channels();
    let counts = split_features(spec.n_f, chans.len());
    if counts.contains(&0) {
        return Err(Error::InvalidParam(format!(
            "n_f = {} is too small for {} sub-dictionaries",
            spec.n_f,
            chans.len()
        )));
    }
    let patches = sample_coded_patches(coded, spec.n_patches, spec.patch_side, spec.seed)?;
    let mut parts = Vec::with_capacity(chans.len());
    let mut logs = Vec::with_capacity(chans.len());
    for (p, (&c, &n_f)) in chans.iter().zip(&counts).enumerate() {
        let n_inputs = spec.patch_side * spec.patch_side * c;
        let seed = part_seed(spec.seed, p);
        match spec.kind {
            ExtractorKind::Snn => {
                let cfg = SnnConfig {
                    n_f,
                    n_inputs,
                    seed,
                    ..spec.snn
                };
                let mut state = SnnState::new(cfg)?;
                let log = train_snn(&mut state, &patches[p], spec.epochs)?;
                parts.push(Extractor::Snn(state));
                logs.push(PartLog::Snn(log));
            }
            ExtractorKind::Ae => {
                let cfg = AeConfig {
                    n_f,
                    n_inputs,
                    epochs: spec.epochs,
                    seed,
                    ..spec.ae
                };
                let (state, curve) = train_ae(cfg, &patches[p])?;
                parts.push(Extractor::Ae(state));
                logs.push(PartLog::Ae(curve));
            }
        }
    }
    Ok((Dictionary::new(coded.strategy, spec.patch_side, parts)?, logs))
}

/// Descriptors that are simply the flattened coded image (no extractor).
pub fn pixel_descriptors(coded: &CodedSet) -> Vec<ImageDescriptor> {
    coded
        .stacks
        .iter()
        .zip(&coded.labels)
        .map(|(st, &label)| ImageDescriptor {
            values: st.parts.iter().flat_map(|p| p.data.iter().copied()).collect(),
            label,
        })
        .collect()
}

/// Extraction, pooling, SVM training on `train` and scoring on `test`.
pub fn run_protocol(
    dict: &Dictionary,
    train: &CodedSet,
    test: &CodedSet,
    protocol: &Protocol,
    svm: &SvmOptions,
) -> Result<Evaluation> {
    let tr = build_descriptors_coded(dict, train, protocol)?;
    let te = build_descriptors_coded(dict, test, protocol)?;
    classify_descriptors(&tr, &te, train.n_classes.max(test.n_classes), svm)
}

pub fn classify_descriptors(
    train: &[ImageDescriptor],
    test: &[ImageDescriptor],
    n_classes: usize,
    svm: &SvmOptions,
) -> Result<Evaluation> {
    let model = train_linear(train, Some(n_classes), svm)?;
    evaluate(&model, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::make_synthetic;

    #[test]
    fn feature_split() {
        assert_eq!(split_features(64, 1), vec![64]);
        assert_eq!(split_features(64, 2), vec![32, 32]);
        assert_eq!(split_features(5, 2), vec![3, 2]);
        assert_ne!(part_seed(1, 0), part_seed(1, 1));
        assert_ne!(part_seed(1, 1), part_seed(2, 0));
    }

    #[test]
    fn patches_line_up_across_parts() {
        let set = make_synthetic(4, 12, 2, 3).unwrap();
        let coded = encode_set(&set, ColorStrategy::GrayscalePlusColor, &DogParams::default()).unwrap();
        let p = sample_coded_patches(&coded, 10, 5, 1).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].len(), 10);
        assert_eq!(p[0][0].len(), 50);
        assert_eq!(p[1][0].len(), 100);
        assert_eq!(p, sample_coded_patches(&coded, 10, 5, 1).unwrap());
    }

    #[test]
    fn train_two_part_dictionary() {
        let set = make_synthetic(6, 10, 2, 3).unwrap();
        let coded = encode_set(&set, ColorStrategy::GrayscalePlusColor, &DogParams::default()).unwrap();
        let spec = TrainSpec {
            kind: ExtractorKind::Snn,
            n_f: 6,
            patch_side: 5,
            n_patches: 20,
            epochs: 2,
            snn: SnnConfig::new(1, 1),
            ae: AeConfig::new(1, 1),
            seed: 7,
        };
        let (d, logs) = train_dictionary(&coded, &spec).unwrap();
        assert_eq!(d.n_f(), 6);
        assert_eq!(logs.len(), 2);
        let spec = TrainSpec {
            kind: ExtractorKind::Ae,
            ..spec
        };
        let (d2, _) = train_dictionary(&coded, &spec).unwrap();
        assert_eq!(d2.kind(), "ae");
        assert_eq!(d2, train_dictionary(&coded, &spec).unwrap().0);
    }
}
