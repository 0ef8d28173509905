//! Experiment configuration files.
//!
//! ```toml
//! experiment = "duality"
//! seed = 1
//! budget = 2000000
//!
//! [map]
//! kind = "rational"
//! num = [[-1, 0], [0, 0], [1, 0]]   # ascending coefficients, [re, im]
//! den = [[1, 0]]
//!
//! [region]
//! kind = "disk"
//! center = [0, 0]
//! radius = 2
//! ```

use crate::LabError;
use num_complex::Complex64;
use ruelle_core::lattes::{lattes_map, LattesParams};
use ruelle_core::quadrature::Region;
use ruelle_core::{Polynomial, RationalMap, SpherePoint};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub type C = [f64; 2];

pub fn complex(c: C) -> Complex64 {
    Complex64::new(c[0], c[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MapSpec {
    Rational { num: Vec<C>, den: Vec<C> },
    Lattes { g2: C, g3: C },
}

impl MapSpec {
    pub fn build(&self) -> Result<RationalMap, LabError> {
        match self {
            MapSpec::Rational { num, den } => {
                let num = Polynomial::new(num.iter().copied().map(complex).collect());
                let den = Polynomial::new(den.iter().copied().map(complex).collect());
                Ok(RationalMap::new(num, den)?)
            }
            MapSpec::Lattes { .. } => Ok(lattes_map(&self.lattes_params()?.expect("lattes spec"))?),
        }
    }

    pub fn lattes_params(&self) -> Result<Option<LattesParams>, LabError> {
        match self {
            MapSpec::Lattes { g2, g3 } => Ok(Some(LattesParams::new(complex(*g2), complex(*g3))?)),
            MapSpec::Rational { .. } => Ok(None),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RegionSpec {
    Plane,
    Disk { center: C, radius: f64 },
    Annulus { center: C, inner: f64, outer: f64 },
}

impl RegionSpec {
    pub fn build(&self) -> Region {
        match self {
            RegionSpec::Plane => Region::WholePlane,
            RegionSpec::Disk { center, radius } => Region::disk(complex(*center), *radius),
            RegionSpec::Annulus { center, inner, outer } => Region::Annulus {
                center: complex(*center),
                inner: *inner,
                outer: *outer,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub budget: usize,
    pub map: MapSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionSpec>,
    /// Second region (mixing).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_b: Option<RegionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    /// Pole `v` of the test function `γ_v`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<C>,
    /// Expected eigenvalue for `γ_v` or for the transfer matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalue: Option<C>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_list: Option<Vec<f64>>,
    /// Number of random evaluation points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Two finite fixed points sent to 0 and 1 (∞ stays fixed).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_points: Option<[C; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if self.budget == 0 {
            return Err(LabError::Config("budget must be positive".into()));
        }
        if let Some(ns) = &self.n_list {
            if ns.windows(2).any(|w| w[0] >= w[1]) {
                return Err(LabError::Config("n_list must be strictly increasing".into()));
            }
        }
        Ok(())
    }

    /// Canonical text form: the bytes covered by the inputs hash.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn region_or(&self, default: Region) -> Region {
        self.region.as_ref().map_or(default, RegionSpec::build)
    }

    pub fn v_or(&self, default: Complex64) -> Complex64 {
        self.v.map_or(default, complex)
    }

    pub fn normalization(&self) -> Option<(SpherePoint, SpherePoint)> {
        self.fixed_points
            .map(|[p, q]| (SpherePoint::Finite(complex(p)), SpherePoint::Finite(complex(q))))
    }
}
