//! The `spikefeat` command line: preprocess, train, evaluate, analyze and
//! reproduce-table, all driven by a [`RunConfig`].
//!
//! Output layout under `out_dir`:
//!
//! ```text
//! cache/<dataset>_<strategy>_<split>_<key>.bin     coded splits
//! <label>/manifest.toml, run<i>.dict, train_run<i>.csv
//! <label>/descriptors/run<i>_<split>.bin
//! <label>/evaluate.csv, confusion_run<i>.csv
//! <label>/analysis/*.csv, filters/*.ppm
//! tables/<name>.csv
//! ```
//!
//! `<label>` names the extractor variant, e.g. `snn_grayscale_nf64_b1-1`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::classify::{build_descriptors_coded, read_descriptors, write_descriptors, Evaluation, ImageDescriptor};
use crate::coding::{CodedSet, ColorStrategy};
use crate::config::{DatasetKind, RunConfig, RunManifest, StageTiming, DATA_ENV};
use crate::data::{load_cifar10, load_cifar100, load_stl10, make_synthetic, LabeledImageSet, Split};
use crate::dictionary::{Dictionary, Extractor};
use crate::error::{Error, Result};
use crate::metrics::{
    dictionary_coherence, export_filters, feature_sparseness, histogram_rows, mean_std, outer_mass,
    reconstruction_report, weight_histogram, write_csv,
};
use crate::pipeline::{classify_descriptors, encode_set, pixel_descriptors, train_dictionary, ExtractorKind, PartLog};

#[derive(Debug, Parser)]
#[command(name = "spikefeat", version, about = "STDP spiking networks and sparse auto-encoders as visual feature extractors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML config file; absent keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one config key (repeatable), e.g. `--set n_f=32`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Dataset root directory.
    #[arg(long, env = DATA_ENV)]
    pub data_root: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableName {
    Table5,
    Table6,
    Table7,
    Table8,
    Table9,
    Table10,
    Table11,
    Fig9,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Code both splits and cache them.
    Preprocess(Common),
    /// Train `n_runs` dictionaries.
    Train(Common),
    /// Classify with trained dictionaries and report accuracy.
    Evaluate(Common),
    /// Sparseness, coherence, reconstruction, weight histograms and filter sheets.
    Analyze(Common),
    /// Run every stage needed for one results table.
    ReproduceTable {
        table: TableName,
        #[command(flatten)]
        common: Common,
    },
}

pub fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess(c) => {
            let ctx = Context::new(&c)?;
            let s = ctx.cfg.color_mode;
            {
                for split in [Split::Train, Split::Test] {
                    let (set, hit) = ctx.coded(s, split)?;
                    println!(
                        "{} {} {}: {} images ({})",
                        ctx.cfg.dataset.name(),
                        s,
                        split_name(split),
                        set.stacks.len(),
                        if hit { "cached" } else { "coded" }
                    );
                }
            }
            Ok(())
        }
        Command::Train(c) => {
            let ctx = Context::new(&c)?;
            let v = ctx.variant(ctx.cfg.extractor, ctx.cfg.color_mode);
            let dicts = ctx.train(&v)?;
            println!("{} dictionaries in {}", dicts.len(), v.dir.display());
            Ok(())
        }
        Command::Evaluate(c) => {
            let ctx = Context::new(&c)?;
            let v = ctx.variant(ctx.cfg.extractor, ctx.cfg.color_mode);
            let evals = ctx.evaluate(&v)?;
            let (m, s) = accuracy_stats(&evals);
            println!("{}: accuracy {:.2} +- {:.2} %", v.label, m, s);
            Ok(())
        }
        Command::Analyze(c) => {
            let ctx = Context::new(&c)?;
            let v = ctx.variant(ctx.cfg.extractor, ctx.cfg.color_mode);
            let a = ctx.analyze(&v)?;
            println!(
                "{}: sparseness {:.3} +- {:.3}, coherence {:.3}, reconstruction {:.5}",
                v.label, a.sparseness.0, a.sparseness.1, a.coherence.0, a.reconstruction.0
            );
            Ok(())
        }
        Command::ReproduceTable { table, common } => {
            let ctx = Context::new(&common)?;
            let path = reproduce(&ctx, table)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn split_name(s: Split) -> &'static str {
    match s {
        Split::Train => "train",
        Split::Test => "test",
    }
}

/// Accuracy mean and standard deviation in percent.
pub fn accuracy_stats(evals: &[Evaluation]) -> (f64, f64) {
    let acc: Vec<f64> = evals.iter().map(|e| 100.0 * e.accuracy).collect();
    mean_std(&acc)
}

/// One trained-extractor configuration and where its files live.
#[derive(Debug, Clone)]
pub struct Variant {
    pub kind: ExtractorKind,
    pub strategy: ColorStrategy,
    pub cfg: RunConfig,
    pub label: String,
    pub dir: PathBuf,
}

/// Per-variant analysis aggregated over runs: `(mean, std)` of per-run means.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSummary {
    pub sparseness: (f64, f64),
    pub per_patch_sparseness: (f64, f64),
    pub coherence: (f64, f64),
    pub coherence_max: f64,
    pub reconstruction: (f64, f64),
    pub reconstruction_mse: (f64, f64),
    pub outer_mass: Option<f64>,
}

pub struct Context {
    pub cfg: RunConfig,
    pub data_root: PathBuf,
    pub cache_dir: PathBuf,
}

impl Context {
    pub fn new(c: &Common) -> Result<Self> {
        let cfg = RunConfig::load(c.config.as_deref(), &c.set)?;
        Ok(Self::from_config(cfg, c.data_root.as_deref()))
    }

    pub fn from_config(cfg: RunConfig, data_root: Option<&Path>) -> Self {
        let data_root = cfg.resolve_data_root(data_root);
        let cache_dir = cfg.out_dir.join("cache");
        Self {
            cfg,
            data_root,
            cache_dir,
        }
    }

    pub fn variant(&self, kind: ExtractorKind, strategy: ColorStrategy) -> Variant {
        self.variant_with(kind, strategy, self.cfg.clone())
    }

    pub fn variant_with(&self, kind: ExtractorKind, strategy: ColorStrategy, mut cfg: RunConfig) -> Variant {
        cfg.extractor = kind;
        cfg.color_mode = strategy;
        let mut label = format!("{kind}_{strategy}_nf{}", cfg.n_f);
        if kind == ExtractorKind::Snn {
            label.push_str(&format!("_b{}-{}", cfg.beta_plus, cfg.beta_minus));
        } else {
            let a = cfg.ae_template(strategy);
            label.push_str(&format!("_r{}-g{}-l{}", a.rho, a.gamma, a.lambda));
        }
        let dir = cfg.out_dir.join(&label);
        Variant {
            kind,
            strategy,
            cfg,
            label,
            dir,
        }
    }

    fn load_split(&self, split: Split) -> Result<LabeledImageSet> {
        let cfg = &self.cfg;
        let mut set = match cfg.dataset {
            DatasetKind::Synthetic => {
                let (n, seed) = match split {
                    Split::Train => (cfg.synthetic_train, cfg.seed),
                    Split::Test => (cfg.synthetic_test, cfg.seed.wrapping_add(1)),
                };
                let mut s = make_synthetic(n, cfg.synthetic_side, cfg.synthetic_classes, seed)?;
                s.split = split;
                s
            }
            DatasetKind::Cifar10 => load_cifar10(&self.data_root, split)?,
            DatasetKind::Cifar100 => load_cifar100(&self.data_root, split)?,
            DatasetKind::Stl10 => load_stl10(&self.data_root, split)?,
        };
        let cap = match split {
            Split::Train => cfg.max_train_images,
            Split::Test => cfg.max_test_images,
        };
        if let Some(n) = cap {
            set.images.truncate(n);
        }
        Ok(set)
    }

    fn cache_path(&self, strategy: ColorStrategy, split: Split) -> PathBuf {
        let c = &self.cfg;
        let cap = match split {
            Split::Train => c.max_train_images,
            Split::Test => c.max_test_images,
        };
        let mut key = format!(
            "{}_{}_{}_dog{}-{}-{}",
            c.dataset.name(),
            strategy,
            split_name(split),
            c.dog_size,
            c.dog_center_sigma,
            c.dog_surround_sigma
        );
        if let Some(n) = cap {
            key.push_str(&format!("_max{n}"));
        }
        if c.dataset == DatasetKind::Synthetic {
            key.push_str(&format!(
                "_s{}-{}-{}-{}-{}",
                c.seed, c.synthetic_train, c.synthetic_test, c.synthetic_side, c.synthetic_classes
            ));
        }
        self.cache_dir.join(format!("{key}.bin"))
    }

    /// Coded split, read from the cache when a valid one exists. The flag
    /// reports a cache hit.
    pub fn coded(&self, strategy: ColorStrategy, split: Split) -> Result<(CodedSet, bool)> {
        let path = self.cache_path(strategy, split);
        if path.exists() {
            match CodedSet::read(&path) {
                Ok(set) if set.strategy == strategy => return Ok((set, true)),
                _ => eprintln!("ignoring invalid cache {}", path.display()),
            }
        }
        let set = encode_set(&self.load_split(split)?, strategy, &self.cfg.dog())?;
        set.write(&path)?;
        Ok((set, false))
    }

    fn dict_path(v: &Variant, run: usize) -> PathBuf {
        v.dir.join(format!("run{run}.dict"))
    }

    /// Trains every run of a variant unless an identical configuration
    /// already produced all of its dictionaries.
    pub fn train(&self, v: &Variant) -> Result<Vec<Dictionary>> {
        let manifest_path = v.dir.join("manifest.toml");
        let paths: Vec<PathBuf> = (0..v.cfg.n_runs).map(|r| Self::dict_path(v, r)).collect();
        if let Ok(m) = RunManifest::read(&manifest_path) {
            if m.config.training_key() == v.cfg.training_key() && paths.iter().all(|p| p.exists()) {
                if let Ok(d) = paths.iter().map(|p| Dictionary::read(p)).collect::<Result<Vec<_>>>() {
                    return Ok(d);
                }
            }
        }
        let _ = std::fs::remove_dir_all(v.dir.join("descriptors"));
        let mut manifest = RunManifest::new("train", &v.cfg, v.kind, v.strategy);
        let t0 = Instant::now();
        let (train, _) = self.coded(v.strategy, Split::Train)?;
        manifest.timings.push(StageTiming {
            stage: "preprocess".into(),
            seconds: t0.elapsed().as_secs_f64(),
        });
        let mut dicts = Vec::new();
        for (run, path) in paths.iter().enumerate() {
            let t = Instant::now();
            let spec = v.cfg.train_spec(v.kind, v.strategy, run);
            eprintln!("[{}] training run {run} (seed {})", v.label, spec.seed);
            let (dict, logs) = train_dictionary(&train, &spec)?;
            dict.write(path)?;
            write_training_log(&v.dir.join(format!("train_run{run}.csv")), &logs)?;
            manifest.timings.push(StageTiming {
                stage: format!("train_run{run}"),
                seconds: t.elapsed().as_secs_f64(),
            });
            manifest.outputs.push(path.display().to_string());
            dicts.push(dict);
        }
        manifest.write(&manifest_path)?;
        Ok(dicts)
    }

    fn descriptors(&self, v: &Variant, run: usize, dict: &Dictionary, split: Split) -> Result<(Vec<ImageDescriptor>, usize)> {
        let c = &v.cfg;
        let cap = match split {
            Split::Train => c.max_train_images,
            Split::Test => c.max_test_images,
        };
        let name = format!(
            "run{run}_{}_s{}_r{}_inh{}_max{}.bin",
            split_name(split),
            c.stride,
            c.pool_grid,
            c.inhibition,
            cap.map_or("all".to_string(), |n| n.to_string())
        );
        let path = v.dir.join("descriptors").join(name);
        if let Ok(d) = read_descriptors(&path) {
            return Ok(d);
        }
        let (coded, _) = self.coded(v.strategy, split)?;
        let descs = build_descriptors_coded(dict, &coded, &v.cfg.protocol())?;
        write_descriptors(&descs, coded.n_classes, &path)?;
        Ok((descs, coded.n_classes))
    }

    /// Full protocol for every run; writes `evaluate.csv` and confusion matrices.
    pub fn evaluate(&self, v: &Variant) -> Result<Vec<Evaluation>> {
        let dicts = self.train(v)?;
        let mut evals = Vec::new();
        let mut rows = Vec::new();
        for (run, dict) in dicts.iter().enumerate() {
            let (tr, n_classes) = self.descriptors(v, run, dict, Split::Train)?;
            let (te, _) = self.descriptors(v, run, dict, Split::Test)?;
            let e = classify_descriptors(&tr, &te, n_classes, &v.cfg.svm(v.cfg.run_seed(run)))?;
            write_confusion(&v.dir.join(format!("confusion_run{run}.csv")), &e)?;
            rows.push(vec![run.to_string(), v.cfg.run_seed(run).to_string(), format!("{:.4}", 100.0 * e.accuracy)]);
            evals.push(e);
        }
        let (m, s) = accuracy_stats(&evals);
        rows.push(vec!["mean".into(), String::new(), format!("{m:.4}")]);
        rows.push(vec!["std".into(), String::new(), format!("{s:.4}")]);
        write_csv(
            &v.dir.join("evaluate.csv"),
            &format!("accuracy (%), layout of tables 5-8, variant {}", v.label),
            &["run", "seed", "accuracy"],
            &rows,
        )?;
        Ok(evals)
    }

    /// Every analysis for every run of a variant, on the test split.
    pub fn analyze(&self, v: &Variant) -> Result<AnalysisSummary> {
        let dicts = self.train(v)?;
        let (test, _) = self.coded(v.strategy, Split::Test)?;
        let adir = v.dir.join("analysis");
        let stride = v.cfg.stride;
        let inh = v.cfg.protocol().inhibition;
        let (mut sp, mut spp, mut co, mut rec, mut mse, mut outer) = (vec![], vec![], vec![], vec![], vec![], vec![]);
        let mut co_max = 0.0f64;
        let (mut sp_rows, mut co_rows, mut rec_rows) = (vec![], vec![], vec![]);
        for (run, dict) in dicts.iter().enumerate() {
            let s = feature_sparseness(dict, &test.stacks, stride, inh)?;
            sp_rows.push(vec![
                run.to_string(),
                format!("{:.6}", s.per_image.mean),
                format!("{:.6}", s.per_image.std),
                format!("{:.6}", s.per_patch_mean),
            ]);
            sp.push(s.per_image.mean);
            spp.push(s.per_patch_mean);

            for (p, c) in dictionary_coherence(dict).iter().enumerate() {
                co_rows.push(vec![
                    run.to_string(),
                    p.to_string(),
                    format!("{:.6}", c.mean),
                    format!("{:.6}", c.std),
                    format!("{:.6}", c.max),
                    c.dead.to_string(),
                ]);
                co.push(c.mean);
                co_max = co_max.max(c.max);
            }

            let r = reconstruction_report(dict, &test.stacks, stride, inh)?;
            rec_rows.push(vec![
                run.to_string(),
                format!("{:.6}", r.mean),
                format!("{:.6}", r.std),
                format!("{:.8}", r.mean_mse),
            ]);
            rec.push(r.mean);
            mse.push(r.mean_mse);

            for (p, part) in dict.parts.iter().enumerate() {
                let h = weight_histogram(part, v.cfg.histogram_bins)?;
                write_csv(
                    &adir.join(format!("histogram_run{run}_part{p}.csv")),
                    &format!("weight histogram (fig9 layout), variant {}", v.label),
                    &["bin_lo", "bin_hi", "count"],
                    &histogram_rows(&h),
                )?;
                if let Extractor::Snn(s) = part {
                    outer.push(outer_mass(&s.weights, s.config.w_min, s.config.w_max, 0.1));
                }
            }
            export_filters(dict, &adir.join("filters"), &format!("run{run}"), v.cfg.filter_scale)?;
        }
        write_csv(
            &adir.join("sparseness.csv"),
            &format!("feature sparseness (table9 layout), variant {}", v.label),
            &["run", "per_image_mean", "per_image_std", "per_patch_mean"],
            &sp_rows,
        )?;
        write_csv(
            &adir.join("coherence.csv"),
            &format!("feature coherence (table11 layout), variant {}", v.label),
            &["run", "part", "mean", "std", "max", "dead"],
            &co_rows,
        )?;
        write_csv(
            &adir.join("reconstruction.csv"),
            &format!("reconstruction error (table10 layout), variant {}", v.label),
            &["run", "sse_mean", "sse_std", "mse_per_value"],
            &rec_rows,
        )?;
        Ok(AnalysisSummary {
            sparseness: mean_std(&sp),
            per_patch_sparseness: mean_std(&spp),
            coherence: mean_std(&co),
            coherence_max: co_max,
            reconstruction: mean_std(&rec),
            reconstruction_mse: mean_std(&mse),
            outer_mass: (!outer.is_empty()).then(|| mean_std(&outer).0),
        })
    }

    /// Raw-pixel SVM on a coded split pair (single deterministic run).
    pub fn pixel_baseline(&self, strategy: ColorStrategy) -> Result<Evaluation> {
        let (tr, _) = self.coded(strategy, Split::Train)?;
        let (te, _) = self.coded(strategy, Split::Test)?;
        classify_descriptors(
            &pixel_descriptors(&tr),
            &pixel_descriptors(&te),
            tr.n_classes.max(te.n_classes),
            &self.cfg.svm(self.cfg.seed),
        )
    }
}

fn write_training_log(path: &Path, logs: &[PartLog]) -> Result<()> {
    let mut rows = Vec::new();
    for (p, log) in logs.iter().enumerate() {
        match log {
            PartLog::Snn(l) => {
                for e in &l.epochs {
                    let active = e.wins.iter().filter(|&&w| w > 0).count();
                    rows.push(vec![
                        p.to_string(),
                        e.epoch.to_string(),
                        e.spikes.to_string(),
                        active.to_string(),
                        format!("{:.6}", e.threshold_mean),
                        format!("{:.6}", e.threshold_min),
                        format!("{:.6}", e.threshold_max),
                        String::new(),
                    ]);
                }
            }
            PartLog::Ae(curve) => {
                for (i, l) in curve.iter().enumerate() {
                    let mut r = vec![p.to_string(), i.to_string()];
                    r.extend(std::iter::repeat_n(String::new(), 5));
                    r.push(format!("{l:.8}"));
                    rows.push(r);
                }
            }
        }
    }
    write_csv(
        path,
        "training log",
        &["part", "epoch", "spikes", "active_neurons", "threshold_mean", "threshold_min", "threshold_max", "loss"],
        &rows,
    )
}

fn write_confusion(path: &Path, e: &Evaluation) -> Result<()> {
    let k = e.confusion.len();
    let header: Vec<String> = std::iter::once("true\\pred".to_string())
        .chain((0..k).map(|i| i.to_string()))
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = e
        .confusion
        .iter()
        .enumerate()
        .map(|(i, r)| std::iter::once(i.to_string()).chain(r.iter().map(|c| c.to_string())).collect())
        .collect();
    write_csv(path, "confusion matrix", &header, &rows)
}

fn pct(x: (f64, f64)) -> [String; 2] {
    [format!("{:.2}", x.0), format!("{:.2}", x.1)]
}

/// Runs the stages behind one table and writes `tables/<name>.csv`.
pub fn reproduce(ctx: &Context, table: TableName) -> Result<PathBuf> {
    let cfg = &ctx.cfg;
    let snn = ExtractorKind::Snn;
    let ae = ExtractorKind::Ae;
    let ds = cfg.dataset.name();
    let (name, title, header, rows): (&str, String, Vec<&str>, Vec<Vec<String>>) = match table {
        TableName::Table5 => {
            let mut rows = Vec::new();
            for s in [
                ColorStrategy::Grayscale,
                ColorStrategy::RgbOpponent,
                ColorStrategy::BioColor,
                ColorStrategy::GrayscalePlusColor,
            ] {
                let v = ctx.variant(snn, s);
                let [m, sd] = pct(accuracy_stats(&ctx.evaluate(&v)?));
                rows.push(vec![ds.to_string(), s.to_string(), m, sd]);
            }
            ("table5", "table5: SNN accuracy (%) per color strategy".into(), vec!["dataset", "strategy", "mean", "std"], rows)
        }
        TableName::Table6 => {
            let mut rows = Vec::new();
            for (k, s) in [(snn, cfg.color_mode), (ae, cfg.ae_strategy())] {
                let v = ctx.variant(k, s);
                let [m, sd] = pct(accuracy_stats(&ctx.evaluate(&v)?));
                rows.push(vec![ds.to_string(), k.to_string(), s.to_string(), cfg.n_f.to_string(), m, sd]);
            }
            (
                "table6",
                "table6: accuracy (%) of SNN and AE features".into(),
                vec!["dataset", "model", "strategy", "n_f", "mean", "std"],
                rows,
            )
        }
        TableName::Table7 => {
            let mut rows = Vec::new();
            for beta in [1.0, 2.0, 3.0, 4.0] {
                let c = RunConfig {
                    beta_plus: beta,
                    beta_minus: beta,
                    ..cfg.clone()
                };
                let v = ctx.variant_with(snn, cfg.color_mode, c);
                let [m, sd] = pct(accuracy_stats(&ctx.evaluate(&v)?));
                rows.push(vec![ds.to_string(), format!("{beta}"), m, sd]);
            }
            ("table7", "table7: SNN accuracy (%) per STDP beta".into(), vec!["dataset", "beta", "mean", "std"], rows)
        }
        TableName::Table8 => {
            let mut rows = Vec::new();
            for (raw, dog) in [
                (ColorStrategy::RawRgb, ColorStrategy::RgbOpponent),
                (ColorStrategy::RawGray, ColorStrategy::Grayscale),
            ] {
                for s in [raw, dog] {
                    let px = ctx.pixel_baseline(s)?;
                    let mut c = cfg.clone();
                    if s.uses_dog() {
                        c.ae_rho = c.ae_rho.or(Some(0.005));
                        c.ae_gamma = c.ae_gamma.or(Some(1.0));
                        c.ae_lambda = c.ae_lambda.or(Some(1e-4));
                    }
                    let v = ctx.variant_with(ae, s, c);
                    let [m, sd] = pct(accuracy_stats(&ctx.evaluate(&v)?));
                    rows.push(vec![ds.to_string(), s.to_string(), format!("{:.2}", 100.0 * px.accuracy), m, sd]);
                }
            }
            (
                "table8",
                "table8: accuracy (%) of raw pixels and AE features per pre-processing".into(),
                vec!["dataset", "strategy", "raw_pixels", "ae_mean", "ae_std"],
                rows,
            )
        }
        TableName::Table9 | TableName::Table10 | TableName::Table11 => {
            let mut rows = Vec::new();
            let snn_v = ctx.variant(snn, cfg.color_mode);
            let mut variants = vec![("snn", snn_v.clone())];
            if table == TableName::Table9 {
                // Same dictionaries, extraction without lateral inhibition.
                ctx.train(&snn_v)?;
                let mut off = snn_v.clone();
                off.cfg.inhibition = false;
                off.dir = snn_v.dir.join("no_inhibition");
                copy_dicts(&snn_v, &off)?;
                variants.push(("snn_no_inhibition", off));
            }
            variants.push(("ae", ctx.variant(ae, cfg.ae_strategy())));
            for (model, v) in variants {
                let a = ctx.analyze(&v)?;
                rows.push(match table {
                    TableName::Table9 => vec![
                        model.into(),
                        format!("{:.4}", a.sparseness.0),
                        format!("{:.4}", a.sparseness.1),
                        format!("{:.4}", a.per_patch_sparseness.0),
                    ],
                    TableName::Table10 => vec![
                        model.into(),
                        format!("{:.5}", a.reconstruction.0),
                        format!("{:.5}", a.reconstruction.1),
                        format!("{:.8}", a.reconstruction_mse.0),
                    ],
                    _ => vec![
                        model.into(),
                        format!("{:.4}", a.coherence.0),
                        format!("{:.4}", a.coherence.1),
                        format!("{:.4}", a.coherence_max),
                    ],
                });
            }
            match table {
                TableName::Table9 => (
                    "table9",
                    format!("table9: feature sparseness on the {ds} test split, n_f={}", cfg.n_f),
                    vec!["model", "mean", "std", "per_patch_mean"],
                    rows,
                ),
                TableName::Table10 => (
                    "table10",
                    format!("table10: reconstruction error on the {ds} test split, n_f={}", cfg.n_f),
                    vec!["model", "sse_mean", "sse_std", "mse_per_value"],
                    rows,
                ),
                _ => (
                    "table11",
                    format!("table11: feature coherence, {ds}, n_f={}", cfg.n_f),
                    vec!["model", "mean", "std", "max"],
                    rows,
                ),
            }
        }
        TableName::Fig9 => {
            let mut rows = Vec::new();
            for beta in [1.0, 4.0] {
                let c = RunConfig {
                    beta_plus: beta,
                    beta_minus: beta,
                    ..cfg.clone()
                };
                let v = ctx.variant_with(snn, cfg.color_mode, c);
                for (run, dict) in ctx.train(&v)?.iter().enumerate() {
                    for part in &dict.parts {
                        let h = weight_histogram(part, cfg.histogram_bins)?;
                        for r in histogram_rows(&h) {
                            let mut row = vec![format!("{beta}"), run.to_string()];
                            row.extend(r);
                            rows.push(row);
                        }
                    }
                }
            }
            ("fig9", "fig9: SNN weight distribution per beta".into(), vec!["beta", "run", "bin_lo", "bin_hi", "count"], rows)
        }
    };
    let path = cfg.out_dir.join("tables").join(format!("{name}.csv"));
    write_csv(&path, &title, &header, &rows)?;
    Ok(path)
}

/// Makes the dictionaries of `from` available to `to` (same runs, other extraction settings).
fn copy_dicts(from: &Variant, to: &Variant) -> Result<()> {
    std::fs::create_dir_all(&to.dir).map_err(|e| Error::io(&to.dir, e))?;
    let mut m = RunManifest::read(&from.dir.join("manifest.toml"))?;
    for run in 0..from.cfg.n_runs {
        let (src, dst) = (Context::dict_path(from, run), Context::dict_path(to, run));
        std::fs::copy(&src, &dst).map_err(|e| Error::io(&dst, e))?;
    }
    m.config = to.cfg.clone();
    m.write(&to.dir.join("manifest.toml"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(out: &Path) -> RunConfig {
        RunConfig::from_sources(
            None,
            &[
                "dataset=synthetic".into(),
                format!("out_dir=\"{}\"", out.display()),
                "n_runs=1".into(),
                "n_f=4".into(),
                "n_patches=200".into(),
                "epochs=1".into(),
                "synthetic_train=12".into(),
                "synthetic_test=8".into(),
                "synthetic_side=10".into(),
                "pool_grid=1".into(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn cli_parses_verbs() {
        let c = Cli::try_parse_from(["spikefeat", "train", "--set", "n_f=8", "--set", "seed=2"]).unwrap();
        assert!(matches!(c.command, Command::Train(ref a) if a.set.len() == 2));
        let c = Cli::try_parse_from(["spikefeat", "reproduce-table", "table7"]).unwrap();
        assert!(matches!(c.command, Command::ReproduceTable { table: TableName::Table7, .. }));
        assert!(Cli::try_parse_from(["spikefeat", "reproduce-table", "table99"]).is_err());
    }

    #[test]
    fn cache_hit_on_second_preprocess() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = Context::from_config(tiny_config(dir.path()), None);
        let (a, hit) = ctx.coded(ColorStrategy::Grayscale, Split::Train).unwrap();
        assert!(!hit);
        let (b, hit) = ctx.coded(ColorStrategy::Grayscale, Split::Train).unwrap();
        assert!(hit);
        assert_eq!(a, b);
    }

    #[test]
    fn train_is_restartable() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = Context::from_config(tiny_config(dir.path()), None);
        let v = ctx.variant(ExtractorKind::Snn, ColorStrategy::Grayscale);
        let d1 = ctx.train(&v).unwrap();
        std::fs::remove_dir_all(&ctx.cache_dir).unwrap();
        std::fs::remove_file(v.dir.join("manifest.toml")).unwrap();
        let d2 = ctx.train(&v).unwrap();
        assert_eq!(d1, d2);
        let e = ctx.evaluate(&v).unwrap();
        assert_eq!(e.len(), 1);
        assert!(v.dir.join("evaluate.csv").exists());
    }

    #[test]
    fn missing_dataset_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_config(dir.path());
        cfg.dataset = DatasetKind::Cifar10;
        let ctx = Context::from_config(cfg, Some(&dir.path().join("nowhere")));
        assert!(matches!(ctx.coded(ColorStrategy::Grayscale, Split::Test), Err(Error::MissingFile { .. })));
    }
}
