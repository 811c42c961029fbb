//! Clustered CSMA data collection. Each of `L` areas runs an `H`-layer
//! cluster tree; traffic that survives collisions at one layer becomes the
//! offered load of the next.

use std::fmt::Debug;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::centered_uniform;
use crate::scalar::Real;
use crate::spectral::distribution::{DensityOfDensity, SamplingDistribution};
use crate::spectral::eta::mse_asymptotic;

/// Collision probability seen by one of `m_nodes` contenders offering `load`.
pub trait CollisionModel: Send + Sync + Debug {
    fn collision_probability(&self, m_nodes: usize, load: f64) -> f64;
}

/// Slotted CSMA with per-slot attempt probability `q = min(1, load · slot · backoff)`:
/// `P_c = 1 - (1 - q)^{v (m - 1)}`, where `v` slots are vulnerable to a
/// competing attempt.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlottedCsma {
    pub slot_duration: f64,
    pub backoff_factor: f64,
    pub vulnerable_slots: f64,
    /// Carried for parity with the reference configuration; not used by the closed form.
    pub payload_bytes: u32,
}

impl Default for SlottedCsma {
    fn default() -> Self {
        Self { slot_duration: 1.0, backoff_factor: 1.0, vulnerable_slots: 2.0, payload_bytes: 32 }
    }
}

impl SlottedCsma {
    pub fn attempt_probability(&self, load: f64) -> f64 {
        (load * self.slot_duration * self.backoff_factor).clamp(0.0, 1.0)
    }
}

impl CollisionModel for SlottedCsma {
    fn collision_probability(&self, m_nodes: usize, load: f64) -> f64 {
        if m_nodes <= 1 {
            return 0.0;
        }
        let q = self.attempt_probability(load);
        1.0 - (1.0 - q).powf(self.vulnerable_slots * (m_nodes - 1) as f64)
    }
}

/// The same collision probability everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedCollision {
    pub probability: f64,
}

impl CollisionModel for FixedCollision {
    fn collision_probability(&self, _m_nodes: usize, _load: f64) -> f64 {
        self.probability
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum CollisionConfig {
    SlottedCsma(SlottedCsma),
    Fixed(FixedCollision),
}

impl Default for CollisionConfig {
    fn default() -> Self {
        Self::SlottedCsma(SlottedCsma::default())
    }
}

impl CollisionConfig {
    pub fn build(&self) -> Arc<dyn CollisionModel> {
        match self {
            Self::SlottedCsma(m) => Arc::new(*m),
            Self::Fixed(m) => Arc::new(*m),
        }
    }
}

/// On-disk hierarchy description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyConfig {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "H")]
    pub h: usize,
    pub areas: Vec<f64>,
    /// `m[i][h]`: nodes per cluster at layer `h` of area `i`.
    pub m: Vec<Vec<usize>>,
    pub lambda1: Vec<f64>,
    #[serde(default)]
    pub collision: CollisionConfig,
}

impl HierarchyConfig {
    /// Four equal areas, three layers, with the given per-node loads at layer 1.
    pub fn four_areas(lambda1: [f64; 4]) -> Self {
        Self {
            l: 4,
            h: 3,
            areas: vec![0.25; 4],
            m: vec![vec![10, 10, 4]; 4],
            lambda1: lambda1.to_vec(),
            collision: CollisionConfig::default(),
        }
    }

    /// Light-load configuration.
    pub fn fig6() -> Self {
        Self::four_areas([1e-3, 2e-4, 2e-4, 2e-5])
    }

    /// Heavy-load configuration.
    pub fn fig7() -> Self {
        Self::four_areas([5e-3, 1e-3, 1e-3, 1e-4])
    }

    pub fn build(&self) -> Result<ClusterHierarchy> {
        ClusterHierarchy::new(self.areas.clone(), self.m.clone(), self.lambda1.clone(), self.collision.build())
            .and_then(|c| {
                if c.areas.len() != self.l || c.m.iter().any(|r| r.len() != self.h) {
                    Err(invalid("L and H disagree with the array shapes"))
                } else {
                    Ok(c)
                }
            })
    }
}

#[derive(Clone, Debug)]
pub struct ClusterHierarchy {
    pub areas: Vec<f64>,
    pub m: Vec<Vec<usize>>,
    pub lambda1: Vec<f64>,
    pub collision: Arc<dyn CollisionModel>,
}

impl ClusterHierarchy {
    pub fn new(areas: Vec<f64>, m: Vec<Vec<usize>>, lambda1: Vec<f64>, collision: Arc<dyn CollisionModel>) -> Result<Self> {
        let l = areas.len();
        if l == 0 || m.len() != l || lambda1.len() != l {
            return Err(invalid("areas, m and lambda1 must have one entry per area"));
        }
        if areas.iter().any(|a| !(*a > 0.0)) || (areas.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(invalid("area measures must be positive and sum to 1"));
        }
        let h = m[0].len();
        if h == 0 || m.iter().any(|r| r.len() != h || r.contains(&0)) {
            return Err(invalid("every area needs the same positive number of layers with m >= 1"));
        }
        if lambda1.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(invalid("offered loads must be finite and nonnegative"));
        }
        Ok(Self { areas, m, lambda1, collision })
    }

    pub fn layers(&self) -> usize {
        self.m[0].len()
    }
}

#[derive(Clone, Debug)]
pub struct SuccessProfile {
    /// `λ[i][h]`, per-node offered load.
    pub load: Vec<Vec<f64>>,
    /// `P_c[i][h]`.
    pub collision: Vec<Vec<f64>>,
    /// `P_s[i][h] = 1 - P_c[i][h]`.
    pub layer_success: Vec<Vec<f64>>,
    /// End-to-end `P_s(i) = Π_h P_s(i, h)`.
    pub success: Vec<f64>,
    /// `p_s(i) = P_s(i) / Σ_j |A_j| P_s(j)`.
    pub normalized: Vec<f64>,
    pub density: PiecewiseDensity,
}

pub fn csma_success_profile(hier: &ClusterHierarchy) -> Result<SuccessProfile> {
    let l = hier.areas.len();
    let h = hier.layers();
    let mut load = vec![vec![0.0; h]; l];
    let mut collision = vec![vec![0.0; h]; l];
    for i in 0..l {
        let mut lam = hier.lambda1[i];
        for layer in 0..h {
            let pc = hier.collision.collision_probability(hier.m[i][layer], lam);
            if !(0.0..1.0).contains(&pc) {
                return Err(Error::InvalidModel(format!(
                    "collision probability {pc} at area {}, layer {} (load {lam})",
                    i + 1,
                    layer + 1
                )));
            }
            load[i][layer] = lam;
            collision[i][layer] = pc;
            lam = hier.m[i][layer] as f64 * lam * (1.0 - pc);
        }
    }
    let layer_success: Vec<Vec<f64>> = collision.iter().map(|r| r.iter().map(|c| 1.0 - c).collect()).collect();
    let success: Vec<f64> = layer_success.iter().map(|r| r.iter().product()).collect();
    let mean: f64 = hier.areas.iter().zip(&success).map(|(a, s)| a * s).sum();
    let normalized: Vec<f64> = success.iter().map(|s| s / mean).collect();
    let density = PiecewiseDensity::strips(hier.areas.clone(), normalized.clone(), 2)?;
    Ok(SuccessProfile { load, collision, layer_success, success, normalized, density })
}

/// Density constant on consecutive strips `A_i` along the first coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDensity {
    pub areas: Vec<f64>,
    pub levels: Vec<f64>,
    pub d: usize,
}

impl PiecewiseDensity {
    pub fn strips(areas: Vec<f64>, levels: Vec<f64>, d: usize) -> Result<Self> {
        if areas.is_empty() || areas.len() != levels.len() || d == 0 {
            return Err(invalid("need one level per area and a positive dimension"));
        }
        if areas.iter().any(|a| !(*a > 0.0)) || (areas.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(invalid("area measures must be positive and sum to 1"));
        }
        if levels.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(invalid("density levels must be finite and nonnegative"));
        }
        let mass: f64 = areas.iter().zip(&levels).map(|(a, v)| a * v).sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("density integrates to {mass}, not 1")));
        }
        Ok(Self { areas, levels, d })
    }

    /// Strip boundaries on the first axis, from `-1/2` to `1/2`.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut acc = -0.5;
        let mut out = vec![acc];
        for a in &self.areas {
            acc += a;
            out.push(acc);
        }
        let last = out.len() - 1;
        out[last] = 0.5;
        out
    }

    fn strip_of(&self, z0: f64) -> usize {
        let b = self.boundaries();
        b[1..].partition_point(|e| *e <= z0).min(self.areas.len() - 1)
    }
}

impl<T: Real> SamplingDistribution<T> for PiecewiseDensity {
    fn dim(&self) -> usize {
        self.d
    }

    fn density(&self, z: &[T]) -> T {
        T::lit(self.levels[self.strip_of(z[0].to_f64_lossy())])
    }

    fn support_measure(&self) -> T {
        T::lit(self.areas.iter().zip(&self.levels).filter(|(_, v)| **v > 0.0).map(|(a, _)| a).sum())
    }

    fn sample_point(&self, rng: &mut dyn RngCore, out: &mut [T]) {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut strip = self.areas.len() - 1;
        for (i, (a, v)) in self.areas.iter().zip(&self.levels).enumerate() {
            acc += a * v;
            if u < acc {
                strip = i;
                break;
            }
        }
        let b = self.boundaries();
        let t: f64 = rng.random();
        out[0] = T::lit(b[strip] + t * self.areas[strip]);
        for v in out[1..].iter_mut() {
            *v = centered_uniform(rng);
        }
    }

    fn gx(&self) -> DensityOfDensity<T> {
        let covered: f64 = self.areas.iter().zip(&self.levels).filter(|(_, v)| **v > 0.0).map(|(a, _)| a).sum();
        DensityOfDensity::DiscreteAtoms(
            self.areas
                .iter()
                .zip(&self.levels)
                .filter(|(_, v)| **v > 0.0)
                .map(|(a, v)| (T::lit(*v), T::lit(a / covered)))
                .collect(),
        )
    }

    fn id(&self) -> String {
        format!("piecewise(areas={:?},levels={:?})", self.areas, self.levels)
    }

    /// `I_k = Σ_i |A_i| p_i^k`.
    fn power_integrals(&self, max_k: usize) -> Option<Vec<T>> {
        Some(
            (1..=max_k as i32)
                .map(|k| T::lit(self.areas.iter().zip(&self.levels).map(|(a, v)| a * v.powi(k)).sum()))
                .collect(),
        )
    }

    fn breakpoints(&self, axis: usize) -> Vec<T> {
        if axis == 0 {
            let b = self.boundaries();
            b[1..b.len() - 1].iter().map(|x| T::lit(*x)).collect()
        } else {
            Vec::new()
        }
    }
}

/// Asymptotic MSE for a CSMA success profile.
pub fn csma_mse<T: Real>(profile: &SuccessProfile, beta: T, snr: T, eta_u: &dyn Fn(T, T) -> Result<T>) -> Result<T> {
    let dist = &profile.density;
    let gx = <PiecewiseDensity as SamplingDistribution<T>>::gx(dist);
    let measure = <PiecewiseDensity as SamplingDistribution<T>>::support_measure(dist);
    mse_asymptotic(&gx, measure, beta, snr, eta_u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_model_examples() {
        let m = SlottedCsma::default();
        assert_eq!(m.collision_probability(1, 0.5), 0.0);
        assert_eq!(m.collision_probability(10, 0.0), 0.0);
        let single = SlottedCsma { vulnerable_slots: 1.0, ..m };
        assert!((single.collision_probability(10, 0.05) - (1.0 - 0.95f64.powi(9))).abs() < 1e-15);
        assert!((single.collision_probability(10, 0.05) - 0.3698).abs() < 1e-4);
        assert!((m.collision_probability(10, 0.05) - (1.0 - 0.95f64.powi(18))).abs() < 1e-15);
    }

    #[test]
    fn lossless_network_is_uniform() {
        let hier = ClusterHierarchy::new(
            vec![0.25; 4],
            vec![vec![10, 10, 4]; 4],
            vec![1e-3; 4],
            Arc::new(FixedCollision { probability: 0.0 }),
        )
        .unwrap();
        let p = csma_success_profile(&hier).unwrap();
        assert!(p.normalized.iter().all(|v| (*v - 1.0).abs() < 1e-15));
        let gx: DensityOfDensity<f64> = p.density.gx();
        assert!((gx.cdf(1.0) - 1.0).abs() < 1e-15 && gx.cdf(0.999) == 0.0);
    }

    #[test]
    fn fig6_profile() {
        let p = csma_success_profile(&HierarchyConfig::fig6().build().unwrap()).unwrap();
        let mass: f64 = p.normalized.iter().map(|v| 0.25 * v).sum();
        assert!((mass - 1.0).abs() < 1e-14);
        assert!(p.normalized[0] < p.normalized[1] && p.normalized[1] < p.normalized[3]);
        for (s, layers) in p.success.iter().zip(&p.layer_success) {
            assert!(layers.iter().all(|l| *s <= *l));
        }
    }

    #[test]
    fn saturated_model_is_rejected() {
        let hier = ClusterHierarchy::new(vec![1.0], vec![vec![3]], vec![1.0], Arc::new(SlottedCsma::default())).unwrap();
        assert!(matches!(csma_success_profile(&hier), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn config_json_round_trip() {
        let c = HierarchyConfig::fig7();
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"L\":4") && s.contains("\"slotted_csma\""));
        assert_eq!(serde_json::from_str::<HierarchyConfig>(&s).unwrap(), c);
        let bad = HierarchyConfig { h: 2, ..c };
        assert!(bad.build().is_err());
    }

    #[test]
    fn strips_integrate_and_sample() {
        let d = PiecewiseDensity::strips(vec![0.5, 0.25, 0.25], vec![0.5, 1.0, 2.0], 2).unwrap();
        let i: Vec<f64> = d.power_integrals(2).unwrap();
        assert!((i[0] - 1.0).abs() < 1e-15);
        assert!((i[1] - (0.125 + 0.25 + 1.0)).abs() < 1e-15);
        assert_eq!(SamplingDistribution::<f64>::density(&d, &[-0.4, 0.0]), 0.5);
        assert_eq!(SamplingDistribution::<f64>::density(&d, &[0.3, 0.0]), 2.0);
        let mut rng = crate::rng::rng_for(2, crate::rng::stream::POINTS, 0);
        let pts: Vec<f64> = d.sample(&mut rng, 40_000);
        let right = pts.chunks(2).filter(|p| p[0] >= 0.25).count() as f64 / 40_000.0;
        assert!((right - 0.5).abs() < 0.01, "{right}");
        assert!(PiecewiseDensity::strips(vec![0.5, 0.5], vec![1.0, 2.0], 2).is_err());
    }
}
