use std::fs;
use std::path::Path;

use rfimlab::run::{load_records, load_summary, run_experiment, summarize};
use rfimlab::ExperimentConfig;

fn zeta2_config() -> ExperimentConfig {
    ExperimentConfig::from_toml_str(
        r#"
kind = "zeta2"
seed = 42
replicates = 12

[model]
disorder = 1.5

[schedule]
half_sides = [1, 2, 4, 8]
threshold = 0.5
"#,
    )
    .unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap()
}

#[test]
fn same_config_gives_identical_files() {
    let c = zeta2_config();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_experiment(&c, a.path()).unwrap();
    run_experiment(&c, b.path()).unwrap();
    for f in ["config.toml", "records.jsonl", "summary.json", "summary.csv"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f} differs");
    }
}

#[test]
fn summary_round_trips_through_records() {
    let c = zeta2_config();
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&c, dir.path()).unwrap();
    let records = load_records(&dir.path().join("records.jsonl")).unwrap();
    assert_eq!(records, out.records);
    let reloaded_config = ExperimentConfig::load(&dir.path().join("config.toml")).unwrap();
    assert_eq!(reloaded_config, c);
    assert_eq!(summarize(&reloaded_config, &records).unwrap(), out.summary);
    assert_eq!(load_summary(dir.path()).unwrap(), out.summary);
}

#[test]
fn zeta2_summary_has_one_row_per_half_side() {
    let c = zeta2_config();
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&c, dir.path()).unwrap();
    let mut reader = csv::Reader::from_path(dir.path().join("summary.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["series", "x", "y", "err"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    let m_hat: Vec<&csv::StringRecord> = rows.iter().filter(|r| &r[0] == "m_hat").collect();
    let xs: Vec<f64> = m_hat.iter().map(|r| r[1].parse().unwrap()).collect();
    let expected: Vec<f64> = c.schedule.half_sides.iter().map(|&l| f64::from(l)).collect();
    assert_eq!(xs, expected);
    for r in m_hat {
        let (y, err): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!((0.0..=1.0).contains(&y) && err >= 0.0);
    }
}

#[test]
fn summary_ignores_record_order() {
    let c = zeta2_config();
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&c, dir.path()).unwrap();
    let mut shuffled = out.records.clone();
    shuffled.reverse();
    shuffled.swap(0, 5);
    shuffled.rotate_left(3);
    assert_eq!(summarize(&c, &shuffled).unwrap(), out.summary);
}

#[test]
fn records_replay_individually() {
    let c = zeta2_config();
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&c, dir.path()).unwrap();
    let r = &out.records[7];
    assert_eq!(r.master_seed, 42);
    assert!(!r.version.is_empty());
    assert_eq!(&rfimlab::run_replicate(&c, r.replicate).unwrap(), r);
}

#[test]
fn every_kind_runs_small() {
    let configs = [
        "kind = \"order-parameter\"\nseed = 1\nreplicates = 3\n[schedule]\nhalf_sides = [1, 3]\n",
        "kind = \"crossing-stats\"\nseed = 1\nreplicates = 2\n[crossing]\nell = 16\nrectangles = [{ x = 22, y = -5, width = 2, height = 10 }]\n",
        "kind = \"tortuosity\"\nseed = 1\nreplicates = 2\n[model]\ndisorder = 2.0\n[tortuosity]\nell = 8\n",
        "kind = \"coarse-grain-verify\"\nseed = 1\nreplicates = 4\n[coarse]\nperimeter_max = 8\nlevels = [1, 2]\ncluster_shapes = 5\ncluster_half_side = 4\nimage_perimeters = [8]\nimage_levels = [1]\ncorridor_half_side = 3\n",
        "kind = \"q-scan\"\nseed = 1\nreplicates = 2\n[model]\ndisorder = 2.0\n[qscan]\nhalf_side = 3\nperimeter_budget = 8\n",
        "kind = \"bound-chain\"\nseed = 1\n[bounds]\njeps = [1.0, 2.0, 3.0]\n",
    ];
    for text in configs {
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&c, dir.path()).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert!(!out.summary.rows.is_empty() || !out.summary.scalars.is_empty(), "{text}");
        assert!(!dir.path().join("FAILED").exists());
    }
}
