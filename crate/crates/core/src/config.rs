//! Run configuration (flat TOML, every key optional) and run manifests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ae::AeConfig;
use crate::classify::{Protocol, SvmOptions};
use crate::coding::{ColorStrategy, DogParams};
use crate::error::{Error, Result};
use crate::pipeline::{ExtractorKind, TrainSpec};
use crate::snn::{Inhibition, SnnConfig};

pub const DATA_ENV: &str = "SPIKEFEAT_DATA";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Cifar10,
    Cifar100,
    Stl10,
    Synthetic,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Cifar10 => "cifar10",
            DatasetKind::Cifar100 => "cifar100",
            DatasetKind::Stl10 => "stl10",
            DatasetKind::Synthetic => "synthetic",
        }
    }
}

/// Every tunable of a run. Absent keys take the defaults below; unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetKind,
    pub color_mode: ColorStrategy,
    pub extractor: ExtractorKind,
    /// Strategy for AE dictionaries in SNN/AE comparisons; defaults to the
    /// raw counterpart of `color_mode`.
    pub ae_color_mode: Option<ColorStrategy>,
    /// Dataset root; the `SPIKEFEAT_DATA` variable or `--data-root` wins.
    pub data_root: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub n_runs: usize,

    pub n_f: usize,
    pub patch_size: usize,
    pub stride: usize,
    pub pool_grid: usize,
    /// Training patches; defaults to 100000 (snn) or 200000 (ae).
    pub n_patches: Option<usize>,
    /// Training epochs; defaults to 100 (snn) or 1000 (ae).
    pub epochs: Option<usize>,
    /// Lateral inhibition during feature extraction.
    pub inhibition: bool,
    /// Use only the first N training / test images.
    pub max_train_images: Option<usize>,
    pub max_test_images: Option<usize>,

    pub dog_size: usize,
    pub dog_center_sigma: f64,
    pub dog_surround_sigma: f64,

    pub v_th0: f64,
    pub v_rest: f64,
    pub w_min: f64,
    pub w_max: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub t_obj: f64,
    pub eta: f64,
    pub t_duration: f64,

    /// AE sparsity target, weight and decay; tuned per data kind and n_f when absent.
    pub ae_rho: Option<f64>,
    pub ae_gamma: Option<f64>,
    pub ae_lambda: Option<f64>,
    pub ae_lr: f64,
    pub ae_batch_size: usize,
    pub ae_decay: f64,
    pub ae_eps: f64,

    pub svm_c: f64,
    pub svm_tol: f64,
    pub svm_max_passes: usize,

    pub synthetic_train: usize,
    pub synthetic_test: usize,
    pub synthetic_side: usize,
    pub synthetic_classes: usize,

    pub histogram_bins: usize,
    pub filter_scale: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let snn = SnnConfig::new(1, 1);
        let ae = AeConfig::new(1, 1);
        let dog = DogParams::default();
        let svm = SvmOptions::default();
        Self {
            dataset: DatasetKind::Cifar10,
            color_mode: ColorStrategy::Grayscale,
            extractor: ExtractorKind::Snn,
            ae_color_mode: None,
            data_root: None,
            out_dir: PathBuf::from("runs/default"),
            seed: 0,
            n_runs: 3,
            n_f: 64,
            patch_size: 5,
            stride: 1,
            pool_grid: 2,
            n_patches: None,
            epochs: None,
            inhibition: true,
            max_train_images: None,
            max_test_images: None,
            dog_size: dog.size,
            dog_center_sigma: dog.center_sigma,
            dog_surround_sigma: dog.surround_sigma,
            v_th0: snn.v_th0,
            v_rest: snn.v_rest,
            w_min: snn.w_min,
            w_max: snn.w_max,
            d_min: snn.d_min,
            d_max: snn.d_max,
            alpha_plus: snn.alpha_plus,
            alpha_minus: snn.alpha_minus,
            beta_plus: snn.beta_plus,
            beta_minus: snn.beta_minus,
            t_obj: snn.t_obj,
            eta: snn.eta,
            t_duration: snn.t_duration,
            ae_rho: None,
            ae_gamma: None,
            ae_lambda: None,
            ae_lr: ae.lr,
            ae_batch_size: ae.batch_size,
            ae_decay: ae.ada_decay,
            ae_eps: ae.ada_eps,
            svm_c: svm.c,
            svm_tol: svm.tol,
            svm_max_passes: svm.max_passes,
            synthetic_train: 200,
            synthetic_test: 200,
            synthetic_side: 16,
            synthetic_classes: 2,
            histogram_bins: 20,
            filter_scale: 4,
        }
    }
}

/// Parses a TOML scalar, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

impl RunConfig {
    /// Builds a config from optional TOML text plus `key=value` overrides.
    pub fn from_sources(text: Option<&str>, overrides: &[String]) -> Result<Self> {
        let mut table = match text {
            Some(t) => t.parse::<toml::Table>().map_err(|e| Error::Config(e.to_string()))?,
            None => toml::Table::new(),
        };
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {o:?} is not key=value")))?;
            table.insert(k.trim().to_string(), parse_value(v.trim()));
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => Some(std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
            None => None,
        };
        Self::from_sources(text.as_deref(), overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(Error::Config("n_runs must be >= 1".into()));
        }
        if self.n_f == 0 || self.patch_size == 0 || self.stride == 0 || self.pool_grid == 0 {
            return Err(Error::Config("n_f, patch_size, stride and pool_grid must be >= 1".into()));
        }
        if self.histogram_bins < 2 {
            return Err(Error::Config("histogram_bins must be >= 2".into()));
        }
        self.dog().validate()?;
        self.snn_template().validate()?;
        self.ae_template(self.color_mode).validate()?;
        Ok(())
    }

    pub fn dog(&self) -> DogParams {
        DogParams {
            size: self.dog_size,
            center_sigma: self.dog_center_sigma,
            surround_sigma: self.dog_surround_sigma,
        }
    }

    pub fn protocol(&self) -> Protocol {
        Protocol {
            stride: self.stride,
            pool_grid: self.pool_grid,
            dog: self.dog(),
            inhibition: if self.inhibition { Inhibition::On } else { Inhibition::Off },
        }
    }

    pub fn svm(&self, seed: u64) -> SvmOptions {
        SvmOptions {
            c: self.svm_c,
            tol: self.svm_tol,
            max_passes: self.svm_max_passes,
            seed,
            random_init: false,
        }
    }

    pub fn snn_template(&self) -> SnnConfig {
        SnnConfig {
            v_th0: self.v_th0,
            v_rest: self.v_rest,
            w_min: self.w_min,
            w_max: self.w_max,
            d_min: self.d_min,
            d_max: self.d_max,
            alpha_plus: self.alpha_plus,
            alpha_minus: self.alpha_minus,
            beta_plus: self.beta_plus,
            beta_minus: self.beta_minus,
            t_obj: self.t_obj,
            eta: self.eta,
            t_duration: self.t_duration,
            ..SnnConfig::new(1, 1)
        }
    }

    /// AE template for a strategy, filling unset sparsity keys from the tuned table.
    pub fn ae_template(&self, strategy: ColorStrategy) -> AeConfig {
        let color = strategy.needs_color();
        let (rho, gamma, lambda) = AeConfig::tuned(color, self.n_f);
        AeConfig {
            rho: self.ae_rho.unwrap_or(rho),
            gamma: self.ae_gamma.unwrap_or(gamma),
            lambda: self.ae_lambda.unwrap_or(lambda),
            lr: self.ae_lr,
            batch_size: self.ae_batch_size,
            ada_decay: self.ae_decay,
            ada_eps: self.ae_eps,
            ..AeConfig::new(1, 1)
        }
    }

    pub fn n_patches_for(&self, kind: ExtractorKind) -> usize {
        self.n_patches.unwrap_or(match kind {
            ExtractorKind::Snn => 100_000,
            ExtractorKind::Ae => 200_000,
        })
    }

    pub fn epochs_for(&self, kind: ExtractorKind) -> usize {
        self.epochs.unwrap_or(match kind {
            ExtractorKind::Snn => 100,
            ExtractorKind::Ae => 1000,
        })
    }

    /// Strategy used for AE dictionaries in comparisons.
    pub fn ae_strategy(&self) -> ColorStrategy {
        self.ae_color_mode.unwrap_or(if self.color_mode.needs_color() {
            ColorStrategy::RawRgb
        } else {
            ColorStrategy::RawGray
        })
    }

    /// Seed of run `i`: `seed + i`.
    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }

    pub fn train_spec(&self, kind: ExtractorKind, strategy: ColorStrategy, run: usize) -> TrainSpec {
        TrainSpec {
            kind,
            n_f: self.n_f,
            patch_side: self.patch_size,
            n_patches: self.n_patches_for(kind),
            epochs: self.epochs_for(kind),
            snn: self.snn_template(),
            ae: self.ae_template(strategy),
            seed: self.run_seed(run),
        }
    }

    /// The config with every key that cannot affect dictionary training reset
    /// to its default, for deciding whether trained dictionaries can be reused.
    pub fn training_key(&self) -> RunConfig {
        let d = RunConfig::default();
        RunConfig {
            out_dir: d.out_dir.clone(),
            data_root: None,
            stride: d.stride,
            pool_grid: d.pool_grid,
            inhibition: d.inhibition,
            max_test_images: None,
            synthetic_test: d.synthetic_test,
            svm_c: d.svm_c,
            svm_tol: d.svm_tol,
            svm_max_passes: d.svm_max_passes,
            histogram_bins: d.histogram_bins,
            filter_scale: d.filter_scale,
            ae_color_mode: None,
            ..self.clone()
        }
    }

    /// Data root: explicit value (flag or environment), then config, then `data`.
    pub fn resolve_data_root(&self, explicit: Option<&Path>) -> PathBuf {
        explicit
            .map(Path::to_path_buf)
            .or_else(|| self.data_root.clone())
            .unwrap_or_else(|| PathBuf::from("data"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Record of one invocation, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub run_seeds: Vec<u64>,
    pub n_patches: usize,
    pub epochs: usize,
    /// Resolved AE sparsity settings `(rho, gamma, lambda)` when an AE is involved.
    pub ae_params: Option<[f64; 3]>,
    pub timings: Vec<StageTiming>,
    pub outputs: Vec<String>,
    pub config: RunConfig,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig, kind: ExtractorKind, strategy: ColorStrategy) -> Self {
        let ae = config.ae_template(strategy);
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            run_seeds: (0..config.n_runs).map(|r| config.run_seed(r)).collect(),
            n_patches: config.n_patches_for(kind),
            epochs: config.epochs_for(kind),
            ae_params: (kind == ExtractorKind::Ae).then_some([ae.rho, ae.gamma, ae.lambda]),
            timings: Vec::new(),
            outputs: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }
}
