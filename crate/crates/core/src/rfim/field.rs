use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::RfimError;
use crate::lattice::{SquareBox, Site, VertexSet};
use crate::rng::site_rng;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldDistribution {
    /// Standard normal.
    Gaussian,
    /// Uniform on `{-1, +1}`.
    Rademacher,
    /// Uniform on `[-√3, √3]` (unit variance).
    UniformSymmetric,
}

impl FieldDistribution {
    /// Sub-Gaussian scale `ψ` with `E exp(h²/ψ²) <= 2`. The Gaussian uses the
    /// normalized convention `ψ = 1`; bounded laws use `sup|h| / √ln 2`.
    pub fn psi(&self) -> f64 {
        match self {
            FieldDistribution::Gaussian => 1.0,
            FieldDistribution::Rademacher => 1.0 / std::f64::consts::LN_2.sqrt(),
            FieldDistribution::UniformSymmetric => SQRT_3 / std::f64::consts::LN_2.sqrt(),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            FieldDistribution::Gaussian => rng.sample(StandardNormal),
            FieldDistribution::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            FieldDistribution::UniformSymmetric => rng.random_range(-SQRT_3..=SQRT_3),
        }
    }
}

impl FromStr for FieldDistribution {
    type Err = RfimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(FieldDistribution::Gaussian),
            "rademacher" => Ok(FieldDistribution::Rademacher),
            "uniform-symmetric" | "uniform" => Ok(FieldDistribution::UniformSymmetric),
            other => Err(RfimError::UnknownDistribution(other.to_string())),
        }
    }
}

impl fmt::Display for FieldDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldDistribution::Gaussian => "gaussian",
            FieldDistribution::Rademacher => "rademacher",
            FieldDistribution::UniformSymmetric => "uniform-symmetric",
        })
    }
}

/// Quenched field values `h_v` on `Λ(L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomField {
    domain: SquareBox,
    values: Vec<f64>,
    distribution: Option<FieldDistribution>,
    psi: f64,
    seed: u64,
}

/// i.i.d. field on `Λ(L)`. The value at a site depends only on the seed, the
/// distribution and the site, so fields of different sizes drawn with the same
/// seed agree on their common sites.
pub fn sample_field(half_side: u32, distribution: FieldDistribution, seed: u64) -> RandomField {
    let domain = SquareBox::new(half_side);
    let values = domain.sites().map(|s| distribution.sample(&mut site_rng(seed, s))).collect();
    RandomField { domain, values, distribution: Some(distribution), psi: distribution.psi(), seed }
}

impl RandomField {
    /// A hand-built field (planted instances, tests). Values are row-major over the box.
    pub fn from_values(domain: SquareBox, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), domain.vertex_count(), "one value per site");
        RandomField { domain, values, distribution: None, psi: 1.0, seed: 0 }
    }

    pub fn from_fn(domain: SquareBox, f: impl Fn(Site) -> f64) -> Self {
        let values = domain.sites().map(f).collect();
        Self::from_values(domain, values)
    }

    pub fn domain(&self) -> SquareBox {
        self.domain
    }

    pub fn half_side(&self) -> u32 {
        self.domain.half_side
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `None` for planted fields.
    pub fn distribution(&self) -> Option<FieldDistribution> {
        self.distribution
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Panics outside the box.
    pub fn at(&self, s: Site) -> f64 {
        self.values[self.domain.index(s).expect("site inside the field's box")]
    }

    /// `Σ_{v ∈ A} h_v`.
    pub fn sum_over(&self, a: &VertexSet) -> Result<f64, RfimError> {
        let mut total = 0.0;
        for s in a.iter() {
            let i = self.domain.index(s).ok_or(RfimError::SetOutsideBox(self.domain.half_side))?;
            total += self.values[i];
        }
        Ok(total)
    }
}
