use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rfimlab::config::{apply_override, ExperimentConfig, ExperimentKind};
use rfimlab::run::run_experiment;
use rfimlab::verify::run_suite;
use rfimlab_core::disagreement::disagreement_set;
use rfimlab_core::rfim::{ground_state_pair, sample_field};

#[derive(Parser)]
#[command(name = "rfimlab", version, about = "Zero-temperature random-field Ising experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Set a config key, e.g. `model.disorder=0.8`. Repeatable.
    #[arg(long = "override", value_name = "NAME=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args, Clone)]
struct Sample {
    #[command(flatten)]
    common: Common,
    /// Half-side `L` of the box.
    #[arg(long, default_value_t = 8)]
    half_side: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a field and write `field.csv`.
    Field(Sample),
    /// Both ground states of one sampled field, written to `groundstate.csv`.
    Groundstate(Sample),
    Orderparam(Common),
    Zeta2(Common),
    Crossings(Common),
    Tortuosity(Common),
    Coarsegrain(Common),
    Qscan(Common),
    Bounds(Common),
    /// Run the invariant suite; exits with 2 on any failure.
    Verify(Common),
}

enum Failure {
    Validation(anyhow::Error),
    Invariants,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Validation(e)
    }
}

fn kind_name(kind: ExperimentKind) -> String {
    toml::Value::try_from(kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn resolve(common: &Common, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let mut table: toml::Table = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("{} does not parse", path.display()))?
        }
        None => toml::Table::new(),
    };
    let wanted = kind_name(kind);
    match table.get("kind").and_then(|v| v.as_str()) {
        Some(k) if k != wanted => anyhow::bail!("kind: config says {k:?} but the subcommand runs {wanted:?}"),
        _ => {
            table.insert("kind".into(), toml::Value::String(wanted));
        }
    }
    for o in &common.overrides {
        apply_override(&mut table, o)?;
    }
    if let Some(seed) = common.seed {
        let seed = i64::try_from(seed).context("seed: values above 2^63 - 1 cannot be stored in TOML")?;
        table.insert("seed".into(), toml::Value::Integer(seed));
    }
    if let Some(out) = &common.out {
        apply_override(&mut table, &format!("output.dir={:?}", out.display().to_string()))?;
    }
    Ok(ExperimentConfig::from_table(table)?)
}

fn set_threads(common: &Common) -> Result<()> {
    if let Some(n) = common.threads {
        anyhow::ensure!(n > 0, "threads: must be at least 1");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("threads")?;
    }
    Ok(())
}

fn experiment(common: &Common, kind: ExperimentKind) -> Result<(), Failure> {
    set_threads(common)?;
    let config = resolve(common, kind)?;
    let out = run_experiment(&config, &config.output.dir).map_err(anyhow::Error::from)?;
    for r in &out.summary.rows {
        println!("{}\t{}\t{}\t{}", r.series, r.x, r.y, r.err);
    }
    for (k, v) in &out.summary.scalars {
        println!("{k} = {v}");
    }
    for n in &out.summary.notes {
        println!("note: {n}");
    }
    println!("wrote {}", out.dir.display());
    Ok(())
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| path.display().to_string())?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn sample(args: &Sample, with_ground_state: bool) -> Result<(), Failure> {
    set_threads(&args.common)?;
    let config = resolve(&args.common, ExperimentKind::OrderParameter)?;
    let h = sample_field(args.half_side, config.model.distribution, config.master_seed());
    let dir = &config.output.dir;
    std::fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
    let b = h.domain();
    if !with_ground_state {
        let path = dir.join("field.csv");
        write_csv(&path, &["x", "y", "h"], b.sites().map(|s| vec![s.x.to_string(), s.y.to_string(), h.at(s).to_string()]))?;
        println!("wrote {}", path.display());
        return Ok(());
    }
    let p = config.model.params();
    let (plus, minus) = ground_state_pair(&h, &p);
    let d = disagreement_set(&plus, &minus).map_err(anyhow::Error::from)?;
    let path = dir.join("groundstate.csv");
    write_csv(
        &path,
        &["x", "y", "h", "plus", "minus", "disagree"],
        b.sites().map(|s| {
            vec![
                s.x.to_string(),
                s.y.to_string(),
                h.at(s).to_string(),
                plus.spin(s).to_string(),
                minus.spin(s).to_string(),
                u8::from(d.contains(s)).to_string(),
            ]
        }),
    )?;
    println!("|D| = {}", d.len());
    println!("wrote {}", path.display());
    Ok(())
}

fn verify(common: &Common) -> Result<(), Failure> {
    set_threads(common)?;
    let mut ok = true;
    for c in run_suite() {
        println!("[{}] {}: {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
        ok &= c.passed;
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Invariants)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Field(a) => sample(a, false),
        Command::Groundstate(a) => sample(a, true),
        Command::Orderparam(c) => experiment(c, ExperimentKind::OrderParameter),
        Command::Zeta2(c) => experiment(c, ExperimentKind::Zeta2),
        Command::Crossings(c) => experiment(c, ExperimentKind::CrossingStats),
        Command::Tortuosity(c) => experiment(c, ExperimentKind::Tortuosity),
        Command::Coarsegrain(c) => experiment(c, ExperimentKind::CoarseGrainVerify),
        Command::Qscan(c) => experiment(c, ExperimentKind::QScan),
        Command::Bounds(c) => experiment(c, ExperimentKind::BoundChain),
        Command::Verify(c) => verify(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Invariants) => {
            eprintln!("invariant suite failed");
            ExitCode::from(2)
        }
    }
}
