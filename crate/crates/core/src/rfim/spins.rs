use serde::{Deserialize, Serialize};

use super::RfimError;
use crate::lattice::{Site, SquareBox, VertexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Plus,
    Minus,
}

impl Boundary {
    pub fn sign(self) -> i8 {
        match self {
            Boundary::Plus => 1,
            Boundary::Minus => -1,
        }
    }
}

/// `±1` spins on `Λ(L)`, row-major, plus the frozen value outside the box.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    domain: SquareBox,
    spins: Vec<i8>,
    boundary: Boundary,
}

impl SpinConfiguration {
    pub fn uniform(domain: SquareBox, boundary: Boundary, value: i8) -> Self {
        assert!(value == 1 || value == -1, "spin values must be ±1");
        SpinConfiguration { domain, spins: vec![value; domain.vertex_count()], boundary }
    }

    pub fn from_spins(domain: SquareBox, boundary: Boundary, spins: Vec<i8>) -> Result<Self, RfimError> {
        if spins.len() != domain.vertex_count() || spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(RfimError::InvalidSpin);
        }
        Ok(SpinConfiguration { domain, spins, boundary })
    }

    /// Panics if `f` returns anything other than `±1`.
    pub fn from_fn(domain: SquareBox, boundary: Boundary, f: impl Fn(Site) -> i8) -> Self {
        let spins: Vec<i8> = domain.sites().map(f).collect();
        Self::from_spins(domain, boundary, spins).expect("spin values must be ±1")
    }

    pub fn domain(&self) -> SquareBox {
        self.domain
    }

    pub fn half_side(&self) -> u32 {
        self.domain.half_side
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// Spin at `s`, or the boundary value outside the box.
    pub fn spin(&self, s: Site) -> i8 {
        match self.domain.index(s) {
            Some(i) => self.spins[i],
            None => self.boundary.sign(),
        }
    }

    pub fn plus_sites(&self) -> VertexSet {
        VertexSet::from_window_fn(self.domain.window(), |s| self.spin(s) == 1)
    }

    pub fn with_flipped(&self, gamma: &VertexSet) -> Result<Self, RfimError> {
        let mut out = self.clone();
        for s in gamma.iter() {
            let i = self.domain.index(s).ok_or(RfimError::SetOutsideBox(self.domain.half_side))?;
            out.spins[i] = -out.spins[i];
        }
        Ok(out)
    }

    /// Pointwise `self <= other`.
    pub fn is_below(&self, other: &SpinConfiguration) -> bool {
        self.domain == other.domain && self.spins.iter().zip(&other.spins).all(|(a, b)| a <= b)
    }
}
