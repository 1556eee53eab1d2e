//! Experiment configuration, read from TOML.
//!
//! ```toml
//! kind = "zeta2"
//! seed = 7
//! replicates = 100
//!
//! [model]
//! coupling = 1.0
//! disorder = 1.5
//! distribution = "gaussian"
//!
//! [schedule]
//! half_sides = [1, 2, 4, 8]
//! threshold = 0.5
//! ```
//!
//! Any key can be replaced from the command line with a dotted path,
//! e.g. `model.disorder=0.8` or `schedule.half_sides=[2,4]`.

use std::path::{Path, PathBuf};

use rfimlab_core::bounds::BoundConstants;
use rfimlab_core::disagreement::{GeometryPolicy, LatticeRectangle};
use rfimlab_core::lattice::Site;
use rfimlab_core::rfim::{FieldConvention, FieldDistribution, ModelParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config does not parse: {0}")]
    Parse(String),
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), message: message.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    OrderParameter,
    Zeta2,
    CrossingStats,
    Tortuosity,
    CoarseGrainVerify,
    QScan,
    BoundChain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub coupling: f64,
    pub disorder: f64,
    pub field: f64,
    pub convention: FieldConvention,
    pub distribution: FieldDistribution,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            coupling: 1.0,
            disorder: 1.0,
            field: 0.0,
            convention: FieldConvention::Standard,
            distribution: FieldDistribution::Gaussian,
        }
    }
}

impl ModelSection {
    pub fn params(&self) -> ModelParams {
        ModelParams { coupling: self.coupling, disorder: self.disorder, field: self.field, convention: self.convention }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    pub half_sides: Vec<u32>,
    pub threshold: f64,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        ScheduleSection { half_sides: vec![1, 2, 4, 8, 16], threshold: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectangleSpec {
    pub x: i32,
    pub y: i32,
    pub width: u32,
    pub height: u32,
}

impl RectangleSpec {
    pub fn rectangle(&self) -> LatticeRectangle {
        LatticeRectangle { min: Site::new(self.x, self.y), width: self.width, height: self.height }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossingSection {
    pub ell: u32,
    /// Exponent in the annulus event `length <= ℓ^{1+α}`.
    pub alpha: f64,
    pub rectangles: Vec<RectangleSpec>,
    pub policy: GeometryPolicy,
}

impl Default for CrossingSection {
    fn default() -> Self {
        CrossingSection {
            ell: 64,
            alpha: 0.5,
            rectangles: vec![RectangleSpec { x: 90, y: -20, width: 8, height: 40 }],
            policy: GeometryPolicy::Relaxed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TortuositySection {
    pub ell: u32,
    /// Capacity exponent `s`.
    pub s: f64,
    /// Diameter cut `r` of the `T` statistic.
    pub r: f64,
    /// Scaling factor `γ > 1` for the straight-run sparsity index `k₀`.
    pub gamma: f64,
}

impl Default for TortuositySection {
    fn default() -> Self {
        TortuositySection { ell: 16, s: 1.1, r: 1.0, gamma: 2.25 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoarseSection {
    pub perimeter_max: usize,
    pub levels: Vec<u32>,
    pub cluster_shapes: usize,
    pub cluster_half_side: u32,
    pub image_perimeters: Vec<usize>,
    pub image_levels: Vec<u32>,
    pub corridor_half_side: u32,
    pub corridor_perimeter: usize,
    pub corridor_disorders: Vec<f64>,
}

impl Default for CoarseSection {
    fn default() -> Self {
        CoarseSection {
            perimeter_max: 12,
            levels: vec![0, 1, 2, 3, 4, 5, 6],
            cluster_shapes: 200,
            cluster_half_side: 16,
            image_perimeters: vec![8, 10, 12],
            image_levels: vec![1, 2],
            corridor_half_side: 8,
            corridor_perimeter: 8,
            corridor_disorders: vec![0.01, 0.5, 1.0, 2.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QScanSection {
    pub half_side: u32,
    pub perimeter_budget: usize,
}

impl Default for QScanSection {
    fn default() -> Self {
        QScanSection { half_side: 6, perimeter_budget: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSection {
    pub jeps: Vec<f64>,
    pub constants: BoundConstants,
}

impl Default for BoundsSection {
    fn default() -> Self {
        BoundsSection { jeps: vec![2.0, 3.0, 4.0, 6.0, 8.0], constants: BoundConstants::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("rfimlab-out") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Master seed; required.
    pub seed: Option<u64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub crossing: CrossingSection,
    #[serde(default)]
    pub tortuosity: TortuositySection,
    #[serde(default)]
    pub coarse: CoarseSection,
    #[serde(default)]
    pub qscan: QScanSection,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_replicates() -> usize {
    100
}

/// Sets `path` (dot separated) in a TOML table. The value is read as a TOML
/// literal, falling back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| invalid(assignment, "override must look like NAME=VALUE"))?;
    let path = path.trim();
    let value: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {}", raw.trim())) {
        Ok(mut t) => t.remove("v").expect("just parsed"),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let keys: Vec<&str> = path.split('.').collect();
    let (last, parents) = keys.split_last().expect("split yields one key");
    let mut cursor = table;
    for key in parents {
        let entry = cursor.entry(key.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry.as_table_mut().ok_or_else(|| invalid(path, format!("{key} is not a table")))?;
    }
    cursor.insert(last.to_string(), value);
    Ok(())
}

impl ExperimentConfig {
    pub fn from_table(table: toml::Table) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn master_seed(&self) -> u64 {
        self.seed.expect("validated configs carry a seed")
    }

    /// Checks every parameter the chosen experiment reads.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.seed.is_none() {
            return Err(invalid("seed", "a master seed is required"));
        }
        let needs_replicates = !matches!(self.kind, ExperimentKind::CoarseGrainVerify | ExperimentKind::BoundChain);
        if needs_replicates && self.replicates == 0 {
            return Err(invalid("replicates", "must be at least 1"));
        }
        if self.kind != ExperimentKind::BoundChain {
            self.model.params().validate().map_err(|e| invalid("model", e.to_string()))?;
        }
        match self.kind {
            ExperimentKind::OrderParameter | ExperimentKind::Zeta2 => {
                let s = &self.schedule.half_sides;
                if s.is_empty() {
                    return Err(invalid("schedule.half_sides", "must not be empty"));
                }
                if s.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("schedule.half_sides", "must be strictly increasing"));
                }
                let t = self.schedule.threshold;
                if self.kind == ExperimentKind::Zeta2 && !(t > 0.0 && t < 1.0) {
                    return Err(invalid("schedule.threshold", format!("must lie in (0, 1), got {t}")));
                }
            }
            ExperimentKind::CrossingStats => {
                let c = &self.crossing;
                if c.ell == 0 {
                    return Err(invalid("crossing.ell", "must be positive"));
                }
                if !(c.alpha >= 0.0) {
                    return Err(invalid("crossing.alpha", "must be nonnegative"));
                }
                let family: Vec<LatticeRectangle> = c.rectangles.iter().map(RectangleSpec::rectangle).collect();
                rfimlab_core::disagreement::validate_family(&family, c.ell, c.policy)
                    .map_err(|e| invalid("crossing.rectangles", e.to_string()))?;
            }
            ExperimentKind::Tortuosity => {
                let t = &self.tortuosity;
                if t.ell < 2 {
                    return Err(invalid("tortuosity.ell", "must be at least 2"));
                }
                if !(t.s > 0.0) {
                    return Err(invalid("tortuosity.s", "must be positive"));
                }
                if !(t.r > 0.0) {
                    return Err(invalid("tortuosity.r", "must be positive"));
                }
                if !(t.gamma > 1.0 && t.gamma.is_finite()) {
                    return Err(invalid("tortuosity.gamma", "must exceed 1"));
                }
            }
            ExperimentKind::CoarseGrainVerify => {
                let c = &self.coarse;
                if !(4..=rfimlab_core::lattice::DEFAULT_PERIMETER_CAP).contains(&c.perimeter_max) {
                    return Err(invalid("coarse.perimeter_max", "must lie in [4, 18]"));
                }
                if c.levels.iter().any(|&k| k > 20) || c.image_levels.iter().any(|&k| k > 20) {
                    return Err(invalid("coarse.levels", "levels above 20 are not supported"));
                }
                if c.corridor_perimeter < 4 || c.corridor_perimeter > rfimlab_core::lattice::DEFAULT_PERIMETER_CAP {
                    return Err(invalid("coarse.corridor_perimeter", "must lie in [4, 18]"));
                }
                if c.corridor_disorders.iter().any(|&e| !(e > 0.0)) {
                    return Err(invalid("coarse.corridor_disorders", "must be positive"));
                }
            }
            ExperimentKind::QScan => {
                if self.model.disorder <= 0.0 {
                    return Err(invalid("model.disorder", "the scan needs ε > 0"));
                }
                let b = self.qscan.perimeter_budget;
                if !(4..=rfimlab_core::lattice::DEFAULT_PERIMETER_CAP).contains(&b) {
                    return Err(invalid("qscan.perimeter_budget", "must lie in [4, 18]"));
                }
            }
            ExperimentKind::BoundChain => {
                if self.bounds.jeps.is_empty() {
                    return Err(invalid("bounds.jeps", "must not be empty"));
                }
                if let Some(x) = self.bounds.jeps.iter().find(|&&x| !(x >= 1.0)) {
                    return Err(invalid("bounds.jeps", format!("J/ε = {x} is below 1")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_toml_str("kind = \"zeta2\"\nseed = 3\n").unwrap();
        assert_eq!(c.replicates, 100);
        assert_eq!(c.model, ModelSection::default());
    }

    #[test]
    fn seed_is_required() {
        let err = ExperimentConfig::from_toml_str("kind = \"zeta2\"\n").unwrap_err();
        assert!(err.to_string().starts_with("seed:"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml_str("kind = \"zeta2\"\nseed = 1\nsed = 2\n").is_err());
    }

    #[test]
    fn overrides_follow_dotted_paths() {
        let mut t: toml::Table = toml::from_str("kind = \"zeta2\"\nseed = 1\n").unwrap();
        apply_override(&mut t, "model.disorder=0.25").unwrap();
        apply_override(&mut t, "schedule.half_sides=[2, 4]").unwrap();
        apply_override(&mut t, "model.distribution=rademacher").unwrap();
        let c = ExperimentConfig::from_table(t).unwrap();
        assert_eq!(c.model.disorder, 0.25);
        assert_eq!(c.schedule.half_sides, vec![2, 4]);
        assert_eq!(c.model.distribution, FieldDistribution::Rademacher);
        let mut bad: toml::Table = toml::from_str("kind = \"zeta2\"\nseed = 1\n").unwrap();
        assert!(apply_override(&mut bad, "no-equals-sign").is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let err = ExperimentConfig::from_toml_str("kind = \"zeta2\"\nseed = 1\n[schedule]\nhalf_sides = [4, 2]\n").unwrap_err();
        assert!(err.to_string().starts_with("schedule.half_sides"));
        let err = ExperimentConfig::from_toml_str("kind = \"bound-chain\"\nseed = 1\n[bounds]\njeps = [0.5]\n").unwrap_err();
        assert!(err.to_string().starts_with("bounds.jeps"));
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig::from_toml_str("kind = \"crossing-stats\"\nseed = 9\n").unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap(), c);
    }
}
