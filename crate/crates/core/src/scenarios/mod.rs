//! Network scenarios expressed as phase distributions.

pub mod csma;
pub mod dense;
pub mod fading;
pub mod holes;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;
use crate::spectral::distribution::{SamplingDistribution, UniformPhases};

use csma::{csma_success_profile, HierarchyConfig, PiecewiseDensity};
use fading::FadingScenario;
use holes::HoleScenario;

fn default_d1() -> usize {
    1
}

fn default_d2() -> usize {
    2
}

/// Serializable description of a phase distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DistributionSpec {
    Uniform {
        #[serde(default = "default_d1")]
        d: usize,
    },
    Hole {
        c: f64,
        #[serde(default = "default_d1")]
        d: usize,
    },
    Fading {
        a_db: f64,
    },
    Piecewise {
        areas: Vec<f64>,
        levels: Vec<f64>,
        #[serde(default = "default_d2")]
        d: usize,
    },
    Csma(HierarchyConfig),
}

impl DistributionSpec {
    /// Accepts inline JSON, or the shorthands `uniform`, `uniform:D`,
    /// `hole:C`, `hole:C:D` and `fading:A_DB`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return Ok(serde_json::from_str(s)?);
        }
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts[i].parse().map_err(|_| invalid(format!("bad number '{}' in distribution '{s}'", parts[i])))
        };
        let dim = |i: usize| -> Result<usize> {
            parts[i].parse().map_err(|_| invalid(format!("bad dimension '{}' in distribution '{s}'", parts[i])))
        };
        match (parts[0], parts.len()) {
            ("uniform", 1) => Ok(Self::Uniform { d: 1 }),
            ("uniform", 2) => Ok(Self::Uniform { d: dim(1)? }),
            ("hole", 2) => Ok(Self::Hole { c: num(1)?, d: 1 }),
            ("hole", 3) => Ok(Self::Hole { c: num(1)?, d: dim(2)? }),
            ("fading", 2) => Ok(Self::Fading { a_db: num(1)? }),
            _ => Err(invalid(format!("unknown distribution '{s}'"))),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Uniform { d } | Self::Hole { d, .. } | Self::Piecewise { d, .. } => *d,
            Self::Fading { .. } | Self::Csma(_) => 2,
        }
    }

    pub fn build<T: Real>(&self) -> Result<Arc<dyn SamplingDistribution<T>>> {
        Ok(match self {
            Self::Uniform { d } => Arc::new(UniformPhases::new(*d)?),
            Self::Hole { c, d } => Arc::new(HoleScenario::new(T::lit(*c), *d)?),
            Self::Fading { a_db } => Arc::new(FadingScenario::from_db(T::lit(*a_db))?),
            Self::Piecewise { areas, levels, d } => Arc::new(PiecewiseDensity::strips(areas.clone(), levels.clone(), *d)?),
            Self::Csma(cfg) => Arc::new(csma_success_profile(&cfg.build()?)?.density),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthands() {
        assert_eq!(DistributionSpec::parse("uniform").unwrap(), DistributionSpec::Uniform { d: 1 });
        assert_eq!(DistributionSpec::parse("uniform:2").unwrap(), DistributionSpec::Uniform { d: 2 });
        assert_eq!(DistributionSpec::parse("hole:0.8").unwrap(), DistributionSpec::Hole { c: 0.8, d: 1 });
        assert_eq!(DistributionSpec::parse("fading:5").unwrap(), DistributionSpec::Fading { a_db: 5.0 });
        assert!(DistributionSpec::parse("gauss").is_err());
        assert!(DistributionSpec::parse("hole:x").is_err());
    }

    #[test]
    fn json_forms_build() {
        let s = DistributionSpec::parse(r#"{"type":"hole","c":0.5}"#).unwrap();
        let d = s.build::<f64>().unwrap();
        assert_eq!(d.support_measure(), 0.5);
        let c = DistributionSpec::Csma(HierarchyConfig::fig6());
        let back: DistributionSpec = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.build::<f32>().unwrap().dim(), 2);
    }
}
