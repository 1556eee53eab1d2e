//! Running experiments: one record per replicate, then a summary computed
//! from the records alone.
//!
//! Output directory layout:
//!
//! - `config.toml`: the resolved configuration
//! - `records.jsonl`: one JSON record per line, in replicate order
//! - `summary.json`, `summary.csv`: aggregated values (`series,x,y,err`)
//! - `FAILED`: present only when a replicate failed; earlier records are kept

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rfimlab_core::bounds::{evaluate_bound_chain, CONVENTIONAL_LABEL};
use rfimlab_core::coarsegrain::{
    corridor_event_frequencies, count_coarse_images, disagreement_cluster_shapes, scan_q_event, verify_key_lemma1,
    verify_key_lemma1_corpus, verify_violator, CorpusSummary,
};
use rfimlab_core::disagreement::{
    annulus_crossing, rectangle_crossed, rescale_to_curve_system, sample_disagreement, LatticeRectangle,
};
use rfimlab_core::lattice::Site;
use rfimlab_core::rfim::{ground_state_pair, sample_field, ModelParams};
use rfimlab_core::rng::replicate_seed;
use rfimlab_core::stats::{least_squares_slope, Proportion};
use rfimlab_core::tortuosity::{k0_tail, sparsity_k0, t_statistic, TStatistic};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ExperimentConfig, ExperimentKind, RectangleSpec};

/// Artifact version stamped on every record.
pub const VERSION: &str = concat!("rfimlab-", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum RunError {
    #[error("replicate {replicate}: {message}")]
    Replicate { replicate: u64, message: String },
    #[error("{0}")]
    Experiment(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}, line {line}: {message}")]
    BadRecord { path: PathBuf, line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub master_seed: u64,
    pub replicate: u64,
    pub version: String,
    pub kind: ExperimentKind,
    pub data: RecordData,
}

/// Finite part of a bound chain; quantities that overflow `f64` are kept as logs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub rho: f64,
    pub log_eps_h2: f64,
    pub log_alpha: f64,
    pub tail_exponent: f64,
    pub log_log_ell1: f64,
    pub log_log_ell1_threshold: f64,
    pub log_log_zeta1_upper: f64,
    pub log_zeta2_lower: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageRow {
    pub ell: usize,
    pub k: u32,
    pub images: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorridorRow {
    pub disorder: f64,
    /// Frequency and half-width of `E_k(ℓ)^c` for `k = 0..=N_ℓ`.
    pub levels: Vec<(f64, f64)>,
    pub any: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum RecordData {
    /// `(σ⁺_0 - σ⁻_0)/2` at each scheduled half-side.
    Gaps { half_sides: Vec<u32>, gaps: Vec<f64> },
    Crossings { rectangles: Vec<bool>, annulus_crossed: bool, annulus_length: Option<usize>, annulus_event: bool },
    Tortuosity { curves: usize, diameters: Vec<f64>, k0s: Vec<u32>, t: TStatistic },
    Coarse {
        corpus: CorpusSummary,
        clusters: CorpusSummary,
        images: Vec<ImageRow>,
        corridor_ell: usize,
        corridor: Vec<CorridorRow>,
    },
    QScan { violators: usize, enumerated: usize, components: usize, reverified: bool },
    Bound { jeps: f64, chain: Option<BoundPoint>, error: Option<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub series: String,
    pub x: f64,
    pub y: f64,
    pub err: f64,
}

fn row(series: impl Into<String>, x: f64, y: f64, err: f64) -> Row {
    Row { series: series.into(), x, y, err }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: ExperimentKind,
    pub master_seed: u64,
    pub version: String,
    pub records: usize,
    pub rows: Vec<Row>,
    pub scalars: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

/// Number of records an experiment produces.
pub fn record_count(config: &ExperimentConfig) -> usize {
    match config.kind {
        ExperimentKind::CoarseGrainVerify => 1,
        ExperimentKind::BoundChain => config.bounds.jeps.len(),
        _ => config.replicates,
    }
}

fn rectangles(config: &ExperimentConfig) -> Vec<LatticeRectangle> {
    config.crossing.rectangles.iter().map(RectangleSpec::rectangle).collect()
}

/// Recomputes one record from the configuration. Replicate `r` draws its field
/// with `replicate_seed(seed, r)`, as the core estimators do.
pub fn run_replicate(config: &ExperimentConfig, replicate: u64) -> Result<Record, RunError> {
    let fail = |message: String| RunError::Replicate { replicate, message };
    let seed = config.master_seed();
    let field_seed = replicate_seed(seed, replicate);
    let p = config.model.params();
    let dist = config.model.distribution;
    let data = match config.kind {
        ExperimentKind::OrderParameter | ExperimentKind::Zeta2 => {
            let half_sides = config.schedule.half_sides.clone();
            let gaps = half_sides
                .iter()
                .map(|&l| {
                    let h = sample_field(l, dist, field_seed);
                    let (plus, minus) = ground_state_pair(&h, &p);
                    f64::from(plus.spin(Site::ORIGIN) - minus.spin(Site::ORIGIN)) / 2.0
                })
                .collect();
            RecordData::Gaps { half_sides, gaps }
        }
        ExperimentKind::CrossingStats => {
            let c = &config.crossing;
            let d = sample_disagreement(2 * c.ell, &p, dist, field_seed);
            let a = annulus_crossing(&d, c.ell, c.alpha).map_err(|e| fail(e.to_string()))?;
            RecordData::Crossings {
                rectangles: rectangles(config).iter().map(|r| rectangle_crossed(&d, r)).collect(),
                annulus_crossed: a.report.crossed,
                annulus_length: a.report.length,
                annulus_event: a.event,
            }
        }
        ExperimentKind::Tortuosity => {
            let t = &config.tortuosity;
            let d = sample_disagreement(2 * t.ell, &p, dist, field_seed);
            let system = rescale_to_curve_system(&d, t.ell).map_err(|e| fail(e.to_string()))?;
            let delta = 4.0 / f64::from(t.ell);
            let k0s = system
                .curves
                .iter()
                .map(|c| sparsity_k0(c, t.gamma, delta).map(|r| r.k0))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| fail(e.to_string()))?;
            let stat = t_statistic(&system, t.s, t.r, delta).map_err(|e| fail(e.to_string()))?;
            RecordData::Tortuosity {
                curves: system.curves.len(),
                diameters: system.curves.iter().map(|c| c.diameter()).collect(),
                k0s,
                t: stat,
            }
        }
        ExperimentKind::CoarseGrainVerify => coarse_record(config).map_err(fail)?,
        ExperimentKind::QScan => {
            let h = sample_field(config.qscan.half_side, dist, field_seed);
            let r = scan_q_event(&h, &p, config.qscan.perimeter_budget).map_err(|e| fail(e.to_string()))?;
            RecordData::QScan {
                violators: r.violators.len(),
                enumerated: r.enumerated_checked,
                components: r.components_checked,
                reverified: r.violators.iter().all(|v| verify_violator(&h, &p, v)),
            }
        }
        ExperimentKind::BoundChain => {
            let jeps = *config.bounds.jeps.get(replicate as usize).ok_or_else(|| fail("no such J/ε point".into()))?;
            match evaluate_bound_chain(jeps, &config.bounds.constants) {
                Ok(c) => RecordData::Bound {
                    jeps,
                    chain: Some(BoundPoint {
                        rho: c.rho,
                        log_eps_h2: c.log_eps_h2,
                        log_alpha: c.log_alpha,
                        tail_exponent: c.tail_exponent,
                        log_log_ell1: c.log_log_ell1,
                        log_log_ell1_threshold: c.log_log_ell1_threshold,
                        log_log_zeta1_upper: c.log_log_zeta1_upper,
                        log_zeta2_lower: c.log_zeta2_lower,
                    }),
                    error: None,
                },
                Err(e) => RecordData::Bound { jeps, chain: None, error: Some(e.to_string()) },
            }
        }
    };
    Ok(Record { master_seed: seed, replicate, version: VERSION.to_string(), kind: config.kind, data })
}

fn coarse_record(config: &ExperimentConfig) -> Result<RecordData, String> {
    let c = &config.coarse;
    let seed = config.master_seed();
    let corpus = verify_key_lemma1_corpus(c.perimeter_max, &c.levels).map_err(|e| e.to_string())?;
    let p = config.model.params();
    let shapes = disagreement_cluster_shapes(&p, config.model.distribution, c.cluster_half_side, c.cluster_shapes, seed);
    let clusters = verify_key_lemma1(&shapes, &c.levels, None);
    let mut images = Vec::new();
    for &ell in &c.image_perimeters {
        for &k in &c.image_levels {
            let r = count_coarse_images(ell, k).map_err(|e| e.to_string())?;
            images.push(ImageRow { ell, k, images: r.images, ratio: r.ratio });
        }
    }
    let mut corridor = Vec::new();
    for &eps in &c.corridor_disorders {
        let q = ModelParams::lower_bound(p.coupling, eps).map_err(|e| e.to_string())?;
        let f = corridor_event_frequencies(
            &q,
            config.model.distribution,
            c.corridor_half_side,
            c.corridor_perimeter,
            config.replicates.max(1),
            seed,
        )
        .map_err(|e| e.to_string())?;
        corridor.push(CorridorRow {
            disorder: eps,
            levels: f.levels.iter().map(|l| (l.frequency.mean, l.frequency.half_width)).collect(),
            any: (f.any.mean, f.any.half_width),
        });
    }
    Ok(RecordData::Coarse { corpus, clusters, images, corridor_ell: c.corridor_perimeter, corridor })
}

fn mismatch(r: &Record) -> RunError {
    RunError::Experiment(format!("record {} does not match the experiment kind", r.replicate))
}

/// Aggregates records. Records are sorted by replicate index first, so the
/// result does not depend on the order they arrive in.
pub fn summarize(config: &ExperimentConfig, records: &[Record]) -> Result<Summary, RunError> {
    let mut records: Vec<&Record> = records.iter().collect();
    records.sort_by_key(|r| r.replicate);
    if records.windows(2).any(|w| w[0].replicate == w[1].replicate) {
        return Err(RunError::Experiment("duplicate replicate index".into()));
    }
    let mut rows = Vec::new();
    let mut scalars = BTreeMap::new();
    let mut notes = Vec::new();
    match config.kind {
        ExperimentKind::OrderParameter | ExperimentKind::Zeta2 => {
            let schedule = &config.schedule.half_sides;
            let mut columns: Vec<Vec<f64>> = vec![Vec::new(); schedule.len()];
            for r in &records {
                let RecordData::Gaps { half_sides, gaps } = &r.data else { return Err(mismatch(r)) };
                if half_sides != schedule {
                    return Err(mismatch(r));
                }
                for (col, g) in columns.iter_mut().zip(gaps) {
                    col.push(*g);
                }
            }
            let estimates: Vec<(u32, Proportion)> =
                schedule.iter().zip(columns).map(|(&l, col)| (l, Proportion::from_values(col))).collect();
            for (l, e) in &estimates {
                rows.push(row("m_hat", f64::from(*l), e.mean, e.half_width));
            }
            if config.kind == ExperimentKind::Zeta2 {
                let t = config.schedule.threshold;
                scalars.insert("threshold".into(), t);
                match estimates.iter().find(|(_, e)| e.mean < t) {
                    Some((l, _)) => {
                        scalars.insert("zeta2".into(), f64::from(*l));
                    }
                    None => notes.push("m_hat stays above the threshold on the whole schedule".into()),
                }
                let pts: Vec<(f64, f64)> =
                    estimates.iter().filter(|(_, e)| e.mean > 0.0).map(|(l, e)| (f64::from(*l), e.mean.ln())).collect();
                if let Some(s) = least_squares_slope(&pts) {
                    scalars.insert("decay_slope".into(), s);
                }
            }
        }
        ExperimentKind::CrossingStats => {
            let m = config.crossing.rectangles.len();
            let mut flags: Vec<&Vec<bool>> = Vec::new();
            let mut events = Vec::new();
            let mut crossed = Vec::new();
            for r in &records {
                let RecordData::Crossings { rectangles, annulus_crossed, annulus_event, .. } = &r.data else {
                    return Err(mismatch(r));
                };
                if rectangles.len() != m {
                    return Err(mismatch(r));
                }
                flags.push(rectangles);
                events.push(*annulus_event);
                crossed.push(*annulus_crossed);
            }
            for i in 0..m {
                let p = Proportion::from_flags(flags.iter().map(|f| f[i]));
                rows.push(row("rectangle", i as f64, p.mean, p.half_width));
            }
            let joint = Proportion::from_flags(flags.iter().map(|f| f.iter().all(|&b| b)));
            rows.push(row("joint", m as f64, joint.mean, joint.half_width));
            let ell = f64::from(config.crossing.ell);
            let a = Proportion::from_flags(crossed);
            rows.push(row("annulus_crossed", ell, a.mean, a.half_width));
            let e = Proportion::from_flags(events);
            rows.push(row("annulus_event", ell, e.mean, e.half_width));
            scalars.insert("rho_hat".into(), joint.mean.powf(1.0 / m as f64));
        }
        ExperimentKind::Tortuosity => {
            let mut system_k0 = Vec::new();
            let mut t_values = Vec::new();
            let mut vacuous = 0usize;
            for r in &records {
                let RecordData::Tortuosity { k0s, t, .. } = &r.data else { return Err(mismatch(r)) };
                system_k0.push(k0s.iter().copied().max().unwrap_or(0));
                match t {
                    TStatistic::Value { value, .. } => t_values.push(*value),
                    TStatistic::Vacuous => vacuous += 1,
                }
            }
            let (tail, slope, r2) = k0_tail(&system_k0);
            for (n, f) in tail {
                rows.push(row("k0_tail", f64::from(n), f, 0.0));
            }
            if let Some(s) = slope {
                scalars.insert("k0_tail_slope".into(), s);
            }
            if let Some(r2) = r2 {
                scalars.insert("k0_tail_r2".into(), r2);
            }
            if !t_values.is_empty() {
                scalars.insert("t_mean".into(), t_values.iter().sum::<f64>() / t_values.len() as f64);
                scalars.insert("t_min".into(), t_values.iter().copied().fold(f64::INFINITY, f64::min));
            }
            scalars.insert("t_vacuous_fraction".into(), vacuous as f64 / records.len().max(1) as f64);
        }
        ExperimentKind::CoarseGrainVerify => {
            let [r] = records.as_slice() else {
                return Err(RunError::Experiment("coarse-grain-verify expects exactly one record".into()));
            };
            let RecordData::Coarse { corpus, clusters, images, corridor_ell, corridor } = &r.data else {
                return Err(mismatch(r));
            };
            for (name, s) in [("corpus", corpus), ("clusters", clusters)] {
                scalars.insert(format!("{name}_sets"), s.sets as f64);
                scalars.insert(format!("{name}_checks"), s.checks as f64);
                scalars.insert(format!("{name}_failures"), s.failures as f64);
                for (i, v) in s.max_ratios.iter().enumerate() {
                    scalars.insert(format!("{name}_max_ratio_{}", i + 1), *v);
                }
                scalars.insert(format!("{name}_max_component_ratio"), s.max_component_ratio);
            }
            for im in images {
                rows.push(row(format!("image_ratio_k{}", im.k), im.ell as f64, im.ratio, 0.0));
            }
            if let Some(max) = images.iter().map(|i| i.ratio).reduce(f64::max) {
                scalars.insert("image_ratio_max".into(), max);
            }
            scalars.insert("corridor_ell".into(), *corridor_ell as f64);
            for c in corridor {
                for (k, (f, e)) in c.levels.iter().enumerate() {
                    rows.push(row(format!("corridor_eps_{}", c.disorder), k as f64, *f, *e));
                }
                rows.push(row("corridor_any", c.disorder, c.any.0, c.any.1));
            }
        }
        ExperimentKind::QScan => {
            let mut hits = Vec::new();
            let mut reverified = true;
            for r in &records {
                let RecordData::QScan { violators, reverified: ok, .. } = &r.data else { return Err(mismatch(r)) };
                rows.push(row("violators", r.replicate as f64, *violators as f64, 0.0));
                hits.push(*violators > 0);
                reverified &= *ok;
            }
            let p = Proportion::from_flags(hits);
            scalars.insert("q_frequency".into(), p.mean);
            scalars.insert("q_frequency_err".into(), p.half_width);
            scalars.insert("all_reverified".into(), if reverified { 1.0 } else { 0.0 });
        }
        ExperimentKind::BoundChain => {
            for r in &records {
                let RecordData::Bound { jeps, chain, error } = &r.data else { return Err(mismatch(r)) };
                match chain {
                    Some(c) => {
                        for (name, v) in [
                            ("rho", c.rho),
                            ("log_eps_h2", c.log_eps_h2),
                            ("log_alpha", c.log_alpha),
                            ("tail_exponent", c.tail_exponent),
                            ("log_log_ell1", c.log_log_ell1),
                            ("log_log_ell1_threshold", c.log_log_ell1_threshold),
                            ("log_log_zeta1_upper", c.log_log_zeta1_upper),
                            ("log_zeta2_lower", c.log_zeta2_lower),
                        ] {
                            rows.push(row(name, *jeps, v, 0.0));
                        }
                    }
                    None => notes.push(format!("J/ε = {jeps}: {}", error.as_deref().unwrap_or("no value"))),
                }
            }
            for name in config.bounds.constants.conventional() {
                notes.push(format!("{name}: {CONVENTIONAL_LABEL}"));
            }
        }
    }
    Ok(Summary {
        kind: config.kind,
        master_seed: config.master_seed(),
        version: VERSION.to_string(),
        records: records.len(),
        rows,
        scalars,
        notes,
    })
}

pub struct RunOutput {
    pub dir: PathBuf,
    pub records: Vec<Record>,
    pub summary: Summary,
}

/// Runs every replicate over the rayon pool and writes the output directory.
/// On a failing replicate the records computed so far are written together
/// with a `FAILED` marker, and the error is returned.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<RunOutput, RunError> {
    config.validate().map_err(|e| RunError::Experiment(e.to_string()))?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let failed = out.join("FAILED");
    if failed.exists() {
        fs::remove_file(&failed).map_err(io_err(&failed))?;
    }
    fs::write(out.join("config.toml"), config.to_toml_string()).map_err(io_err(out))?;
    let results: Vec<Result<Record, RunError>> =
        (0..record_count(config) as u64).into_par_iter().map(|r| run_replicate(config, r)).collect();
    let mut records = Vec::with_capacity(results.len());
    let mut first_error = None;
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    write_records(&out.join("records.jsonl"), &records)?;
    if let Some(e) = first_error {
        fs::write(&failed, format!("{e}\n")).map_err(io_err(&failed))?;
        return Err(e);
    }
    let summary = summarize(config, &records)?;
    write_summary(out, &summary)?;
    Ok(RunOutput { dir: out.to_path_buf(), records, summary })
}

pub fn write_records(path: &Path, records: &[Record]) -> Result<(), RunError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| RunError::Experiment(e.to_string()))?;
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn load_records(path: &Path) -> Result<Vec<Record>, RunError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| RunError::BadRecord {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_summary(dir: &Path, summary: &Summary) -> Result<(), RunError> {
    let json_path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(summary).map_err(|e| RunError::Experiment(e.to_string()))?;
    fs::write(&json_path, json + "\n").map_err(io_err(&json_path))?;
    let csv_path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| RunError::Experiment(e.to_string()))?;
    for r in &summary.rows {
        w.serialize(r).map_err(|e| RunError::Experiment(e.to_string()))?;
    }
    w.flush().map_err(io_err(&csv_path))
}

pub fn load_summary(dir: &Path) -> Result<Summary, RunError> {
    let path = dir.join("summary.json");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| RunError::BadRecord { path, line: 0, message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml_str(text).unwrap()
    }

    #[test]
    fn gaps_match_the_core_estimator() {
        let c = config("kind = \"order-parameter\"\nseed = 5\nreplicates = 6\n[schedule]\nhalf_sides = [2, 4]\n");
        let records: Vec<Record> = (0..6).map(|r| run_replicate(&c, r).unwrap()).collect();
        let s = summarize(&c, &records).unwrap();
        let p = c.model.params();
        for (i, &l) in [2u32, 4].iter().enumerate() {
            let e = rfimlab_core::rfim::estimate_order_parameter(l, &p, c.model.distribution, 6, 5).unwrap();
            assert_eq!((s.rows[i].y, s.rows[i].err), (e.mean, e.half_width));
        }
    }

    #[test]
    fn bound_chain_records_domain_errors() {
        let c = config("kind = \"bound-chain\"\nseed = 0\n[bounds]\njeps = [1.0, 2.0]\n");
        let records: Vec<Record> = (0..2).map(|r| run_replicate(&c, r).unwrap()).collect();
        let s = summarize(&c, &records).unwrap();
        assert!(s.notes[0].starts_with("J/ε = 1"));
        assert!(s.notes.iter().any(|n| n.contains(CONVENTIONAL_LABEL)));
        assert!(s.rows.iter().any(|r| r.series == "log_zeta2_lower" && r.x == 2.0));
    }

    #[test]
    fn duplicate_replicates_are_rejected() {
        let c = config("kind = \"q-scan\"\nseed = 1\nreplicates = 1\n[qscan]\nhalf_side = 2\nperimeter_budget = 6\n");
        let r = run_replicate(&c, 0).unwrap();
        assert!(summarize(&c, &[r.clone(), r]).is_err());
    }
}
