//! Quick invariant suite behind `rfimlab verify`.

use rand::Rng;
use rfimlab_core::bounds::{evaluate_bound_chain, BoundConstants, BoundError};
use rfimlab_core::coarsegrain::{scan_q_event, verify_key_lemma1_corpus, verify_violator};
use rfimlab_core::lattice::{Site, SquareBox};
use rfimlab_core::rfim::{
    energy, exhaustive_ground_energy, ground_state, ground_state_pair, sample_field, Boundary, FieldDistribution,
    ModelParams, RandomField,
};
use rfimlab_core::rng::stream_rng;
use rfimlab_core::tortuosity::{capacity, choose_scale_params, grid_capacity, verify_scale_params};

use crate::config::ExperimentConfig;
use crate::run::{run_replicate, summarize, Record};

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<String, String>) -> CheckResult {
    match f() {
        Ok(detail) => CheckResult { name, passed: true, detail },
        Err(detail) => CheckResult { name, passed: false, detail },
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const G: FieldDistribution = FieldDistribution::Gaussian;

fn min_cut_matches_enumeration() -> Result<String, String> {
    let mut n = 0;
    for eps in [0.5, 2.0] {
        for eta in [0.0, 0.3] {
            let p = ModelParams::new(1.0, eps, eta).map_err(|e| e.to_string())?;
            for seed in 0..20 {
                let h = sample_field(1, G, seed);
                for b in [Boundary::Plus, Boundary::Minus] {
                    let cut = energy(&ground_state(&h, &p, b), &h, &p).map_err(|e| e.to_string())?;
                    let best = exhaustive_ground_energy(&h, &p, b).map_err(|e| e.to_string())?;
                    ensure((cut - best).abs() <= 1e-9 * (1.0 + best.abs()), || {
                        format!("seed {seed}, ε={eps}, η={eta}: cut {cut} vs exhaustive {best}")
                    })?;
                    n += 1;
                }
            }
        }
    }
    Ok(format!("{n} boxes"))
}

fn monotone_coupling() -> Result<String, String> {
    let p = ModelParams::new(1.0, 1.0, 0.0).map_err(|e| e.to_string())?;
    for seed in 0..20 {
        let (plus, minus) = ground_state_pair(&sample_field(8, G, seed), &p);
        ensure(minus.is_below(&plus), || format!("seed {seed}: σ⁻ is not below σ⁺"))?;
    }
    Ok("20 fields at L=8".into())
}

fn zero_disorder_orders() -> Result<String, String> {
    let p = ModelParams::new(1.0, 0.0, 0.0).map_err(|e| e.to_string())?;
    let (plus, minus) = ground_state_pair(&sample_field(6, G, 3), &p);
    ensure(plus.spin(Site::ORIGIN) == 1 && minus.spin(Site::ORIGIN) == -1, || "origin not ordered at ε=0".into())?;
    Ok("m̂ = 1".into())
}

fn key_lemma_small_corpus() -> Result<String, String> {
    let s = verify_key_lemma1_corpus(10, &[2, 3, 4]).map_err(|e| e.to_string())?;
    ensure(s.all_pass(), || format!("{} of {} checks fail", s.failures, s.checks))?;
    Ok(format!("{} sets, {} checks", s.sets, s.checks))
}

fn capacity_against_grid() -> Result<String, String> {
    let mut rng = stream_rng(11, 0);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(1..=3);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let a = capacity(&refs, 1.2, 0.05).map_err(|e| e.to_string())?.value;
        let b = grid_capacity(&refs, 1.2, 0.05, 200).map_err(|e| e.to_string())?;
        worst = worst.max((a - b).abs() / b.abs().max(1.0));
    }
    ensure(worst <= 1e-2, || format!("relative deviation {worst:e}"))?;
    Ok(format!("max relative deviation {worst:.2e}"))
}

fn scale_params() -> Result<String, String> {
    let p = choose_scale_params(1e-2, 1.0, 2).map_err(|e| e.to_string())?;
    let c = verify_scale_params(&p).map_err(|e| e.to_string())?;
    ensure(c.all_hold(1e-12), || format!("{c:?}"))?;
    Ok(format!("γ = {}", p.gamma))
}

fn q_scan() -> Result<String, String> {
    let p = ModelParams::new(1.0, 0.5, 0.0).map_err(|e| e.to_string())?;
    let zero = RandomField::from_values(SquareBox::new(3), vec![0.0; 49]);
    let r = scan_q_event(&zero, &p, 8).map_err(|e| e.to_string())?;
    ensure(r.violators.is_empty(), || "zero field has violators".into())?;
    let planted = RandomField::from_fn(SquareBox::new(3), |s| if s == Site::ORIGIN { 5.0 } else { 0.0 });
    let r = scan_q_event(&planted, &p, 8).map_err(|e| e.to_string())?;
    ensure(r.violators.iter().any(|v| v.sites == vec![Site::ORIGIN]), || "planted site missed".into())?;
    ensure(r.violators.iter().all(|v| verify_violator(&planted, &p, v)), || "violator fails re-check".into())?;
    Ok(format!("{} violators on the planted field", r.violators.len()))
}

fn bound_chain() -> Result<String, String> {
    let k = BoundConstants::default();
    let a = evaluate_bound_chain(3.0, &k).map_err(|e| e.to_string())?;
    ensure(a == evaluate_bound_chain(3.0, &k).map_err(|e| e.to_string())?, || "not deterministic".into())?;
    let b = evaluate_bound_chain(4.0, &k).map_err(|e| e.to_string())?;
    ensure(b.log_log_zeta1_upper >= a.log_log_zeta1_upper, || "ζ₁ bound decreased".into())?;
    ensure(matches!(evaluate_bound_chain(1.0, &k), Err(BoundError::EpsilonOutOfDomain(_))), || {
        "no domain error at ε_H2 = e^-1".into()
    })?;
    Ok("deterministic, monotone, domain error raised".into())
}

fn summary_round_trip() -> Result<String, String> {
    let c = ExperimentConfig::from_toml_str(
        "kind = \"zeta2\"\nseed = 2\nreplicates = 8\n[schedule]\nhalf_sides = [1, 2, 3]\n",
    )
    .map_err(|e| e.to_string())?;
    let records: Vec<Record> = (0..8).map(|r| run_replicate(&c, r)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let text: Vec<String> = records.iter().map(|r| serde_json::to_string(r).unwrap()).collect();
    let back: Vec<Record> = text.iter().rev().map(|l| serde_json::from_str(l).unwrap()).collect();
    let a = summarize(&c, &records).map_err(|e| e.to_string())?;
    let b = summarize(&c, &back).map_err(|e| e.to_string())?;
    ensure(a == b, || "summary changed after serialize + reverse".into())?;
    Ok("8 records".into())
}

pub fn run_suite() -> Vec<CheckResult> {
    vec![
        check("min-cut vs exhaustive at L=1", min_cut_matches_enumeration),
        check("monotone coupling", monotone_coupling),
        check("zero disorder", zero_disorder_orders),
        check("coarse-graining inequalities", key_lemma_small_corpus),
        check("capacity vs simplex grid", capacity_against_grid),
        check("scale parameters", scale_params),
        check("large-field scan", q_scan),
        check("bound chain", bound_chain),
        check("record round trip", summary_round_trip),
    ]
}
