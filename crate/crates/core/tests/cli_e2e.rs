use clap::Parser;
use proptest::prelude::*;

use spikefeat::cli::{run, Cli};
use spikefeat::config::RunConfig;
use spikefeat::Error;

fn tiny_args(out: &std::path::Path) -> Vec<String> {
    [
        "dataset=synthetic".to_string(),
        format!("out_dir=\"{}\"", out.display()),
        "n_runs=2".into(),
        "n_f=4".into(),
        "n_patches=300".into(),
        "epochs=2".into(),
        "synthetic_train=16".into(),
        "synthetic_test=10".into(),
        "synthetic_side=10".into(),
    ]
    .into_iter()
    .flat_map(|kv| ["--set".to_string(), kv])
    .collect()
}

fn invoke(verb: &[&str], out: &std::path::Path) -> spikefeat::Result<()> {
    let mut argv: Vec<String> = std::iter::once("spikefeat").chain(verb.iter().copied()).map(String::from).collect();
    argv.extend(tiny_args(out));
    run(Cli::try_parse_from(argv).unwrap())
}

#[test]
fn every_table_reproduces_on_synthetic_data() {
    let dir = tempfile::tempdir().unwrap();
    for table in ["table5", "table6", "table7", "table8", "table9", "table10", "table11", "fig9"] {
        invoke(&["reproduce-table", table], dir.path()).unwrap_or_else(|e| panic!("{table}: {e}"));
        let csv = std::fs::read_to_string(dir.path().join("tables").join(format!("{table}.csv"))).unwrap();
        assert!(csv.starts_with("# "), "{table} has no title line");
        assert!(csv.lines().count() >= 3, "{table} is empty:\n{csv}");
    }
}

#[test]
fn stage_verbs_run_in_sequence() {
    let dir = tempfile::tempdir().unwrap();
    for verb in ["preprocess", "train", "evaluate", "analyze"] {
        invoke(&[verb], dir.path()).unwrap_or_else(|e| panic!("{verb}: {e}"));
    }
    let variant = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .find(|e| e.file_name().to_string_lossy().starts_with("snn_"))
        .expect("variant directory")
        .path();
    for f in ["manifest.toml", "run0.dict", "run1.dict", "evaluate.csv", "analysis/sparseness.csv"] {
        assert!(variant.join(f).exists(), "missing {f}");
    }
}

#[test]
fn config_round_trips_through_toml() {
    let cfg = RunConfig::from_sources(None, &["n_f=32".into(), "beta_plus=3.0".into(), "color_mode=\"bio_color\"".into()]).unwrap();
    let back = RunConfig::from_sources(Some(&cfg.to_toml()), &[]).unwrap();
    assert_eq!(cfg, back);
}

#[test]
fn bad_configs_are_rejected() {
    for bad in ["no_such_key=1", "n_f=0", "n_runs=0", "color_mode=\"sepia\"", "missing_equals"] {
        assert!(
            matches!(RunConfig::from_sources(None, &[bad.into()]), Err(Error::Config(_) | Error::InvalidParam(_))),
            "{bad} accepted"
        );
    }
}

proptest! {
    #[test]
    fn numeric_overrides_apply(n_f in 1usize..2048, seed in any::<u32>(), stride in 1usize..5) {
        let cfg = RunConfig::from_sources(None, &[format!("n_f={n_f}"), format!("seed={seed}"), format!("stride={stride}")]).unwrap();
        prop_assert_eq!((cfg.n_f, cfg.seed, cfg.stride), (n_f, seed as u64, stride));
    }
}
