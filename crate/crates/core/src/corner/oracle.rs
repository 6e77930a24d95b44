//! Reference solution of the full penalized problem
//!
//! ```text
//! u'' + 2α G(u, u') + (u - P_K u) = 0
//! ```
//!
//! in fast time `σ = t√k`, with no phase decomposition. Region changes are
//! located as events and the integration restarts with the force formulas
//! of the new region, so no Runge–Kutta step ever straddles a kink.

use crate::corner::CartesianSample;
use crate::error::{Error, Result};
use crate::geometry::{ConeGeometry, Region, Vec2};
use crate::linear_phase::{check_stiffness, DampingParams, InitialData};
use crate::ode::{integrate, OdeOptions, OdeSolution, OdeSystem};

const MAX_SWITCHES: usize = 64;

struct RegionSystem {
    cone: ConeGeometry,
    alpha: f64,
    region: Region,
}

impl OdeSystem<4> for RegionSystem {
    fn rhs(&self, _s: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
        let u = Vec2::new(y[0], y[1]);
        let v = Vec2::new(y[2], y[3]);
        let (spring, damp) = self.cone.region_forces(u, v, self.region);
        Ok([
            y[2],
            y[3],
            -2.0 * self.alpha * damp.x1 - spring.x1,
            -2.0 * self.alpha * damp.x2 - spring.x2,
        ])
    }
}

struct Segment {
    system: RegionSystem,
    solution: OdeSolution<4>,
}

/// Oracle trajectory, stored in fast time.
pub struct OracleTrajectory {
    sqrt_k: f64,
    segments: Vec<Segment>,
}

impl OracleTrajectory {
    /// Physical end time.
    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.solution.t_last()) / self.sqrt_k
    }

    /// Regions visited, with the physical time each visit starts.
    pub fn regions(&self) -> Vec<(f64, Region)> {
        self.segments
            .iter()
            .map(|s| (s.solution.t_first() / self.sqrt_k, s.system.region))
            .collect()
    }

    /// Physical position and velocity at time `t`.
    pub fn state_at(&self, t: f64) -> Result<CartesianSample> {
        let sigma = t * self.sqrt_k;
        let seg = self
            .segments
            .iter()
            .find(|s| sigma <= s.solution.t_last())
            .ok_or_else(|| Error::InvalidInput(format!("time {t} beyond oracle horizon")))?;
        let sigma = sigma.max(seg.solution.t_first());
        let y = seg.solution.eval(&seg.system, sigma)?;
        Ok(self.sample(sigma, &y))
    }

    /// Samples at every accepted step.
    pub fn samples(&self) -> Vec<CartesianSample> {
        self.segments
            .iter()
            .flat_map(|s| s.solution.ts.iter().zip(&s.solution.ys))
            .map(|(&sigma, y)| self.sample(sigma, y))
            .collect()
    }

    fn sample(&self, sigma: f64, y: &[f64; 4]) -> CartesianSample {
        CartesianSample {
            t: sigma / self.sqrt_k,
            u: Vec2::new(y[0], y[1]),
            v: Vec2::new(y[2] * self.sqrt_k, y[3] * self.sqrt_k),
        }
    }
}

/// Integrate the penalized problem from the impact data up to physical time
/// `horizon`.
pub fn oracle_fast_time_integration(
    init: &InitialData,
    damping: &DampingParams,
    cone: &ConeGeometry,
    k: f64,
    horizon: f64,
    opts: &OdeOptions,
) -> Result<OracleTrajectory> {
    let u0 = Vec2::new(0.0, init.s0);
    let v0 = Vec2::new(init.dr0, init.ds0);
    oracle_from_state(u0, v0, damping, cone, k, horizon, opts)
}

/// As [`oracle_fast_time_integration`] but from an arbitrary state at `t = 0`.
pub fn oracle_from_state(
    u0: Vec2,
    v0: Vec2,
    damping: &DampingParams,
    cone: &ConeGeometry,
    k: f64,
    horizon: f64,
    opts: &OdeOptions,
) -> Result<OracleTrajectory> {
    check_stiffness(k)?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "horizon must be non-negative (got {horizon})"
        )));
    }
    let sqrt_k = k.sqrt();
    let sigma_end = horizon * sqrt_k;
    let mut y = [u0.x1, u0.x2, v0.x1 / sqrt_k, v0.x2 / sqrt_k];
    let mut sigma = 0.0;
    let mut region = next_region(cone, u0, v0)?;
    let mut segments = Vec::new();
    loop {
        let system = RegionSystem {
            cone: *cone,
            alpha: damping.alpha(),
            region,
        };
        let guard = |_s: f64, y: &[f64; 4]| -cone.region_margin(Vec2::new(y[0], y[1]), region);
        let solution = integrate(&system, sigma, y, sigma_end, opts, Some(guard), 0.0, true)?;
        let hit = solution.event;
        segments.push(Segment { system, solution });
        let Some(hit) = hit else { break };
        if segments.len() >= MAX_SWITCHES {
            return Err(Error::IntegrationFailure {
                at: hit.t / sqrt_k,
                reason: format!("more than {MAX_SWITCHES} region changes"),
            });
        }
        sigma = hit.t;
        y = hit.y;
        region = next_region(cone, Vec2::new(y[0], y[1]), Vec2::new(y[2], y[3]))?;
        if sigma >= sigma_end {
            break;
        }
    }
    Ok(OracleTrajectory { sqrt_k, segments })
}

/// Region entered from `u` when moving with velocity `v`.
fn next_region(cone: &ConeGeometry, u: Vec2, v: Vec2) -> Result<Region> {
    let speed = v.norm();
    if speed == 0.0 {
        return cone.classify_region(u);
    }
    let step = 1e-9 * u.norm().max(f64::MIN_POSITIVE) / speed;
    cone.classify_region(u + step * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_phase::r1_phase_state;
    use std::f64::consts::PI;

    fn opts() -> OdeOptions {
        OdeOptions {
            rtol: 1e-11,
            atol: 1e-14,
            ..OdeOptions::default()
        }
    }

    #[test]
    fn free_flight_inside_k() {
        let c = ConeGeometry::new(PI / 3.0).unwrap();
        let d = DampingParams::new(2.0).unwrap();
        let u0 = Vec2::new(-1.0, -1.0);
        let v0 = Vec2::new(-0.5, -0.25);
        let o = oracle_from_state(u0, v0, &d, &c, 100.0, 2.0, &opts()).unwrap();
        assert_eq!(o.regions().len(), 1);
        let s = o.state_at(2.0).unwrap();
        assert!((s.u - (u0 + 2.0 * v0)).norm() < 1e-12);
        assert!((s.v - v0).norm() < 1e-12);
    }

    #[test]
    fn matches_closed_form_on_first_face() {
        let c = ConeGeometry::new(PI / 3.0).unwrap();
        let d = DampingParams::new(2.0).unwrap();
        let init = InitialData::new(-1.0, 1.0, 1.0).unwrap();
        let o = oracle_fast_time_integration(&init, &d, &c, 100.0, 1.0, &opts()).unwrap();
        for i in 0..=50 {
            let t = i as f64 / 50.0;
            let s = o.state_at(t).unwrap();
            let r = r1_phase_state(&init, &d, 100.0, t).unwrap();
            assert!((s.u.x1 - r.r).abs() < 1e-6);
            assert!((s.u.x2 - r.s).abs() < 1e-6);
        }
    }

    #[test]
    fn visits_regions_in_order() {
        let c = ConeGeometry::new(PI / 3.0).unwrap();
        let d = DampingParams::new(2.0).unwrap();
        let init = InitialData::new(-1.0, 1.0, 1.0).unwrap();
        let o = oracle_fast_time_integration(&init, &d, &c, 100.0, 3.0, &opts()).unwrap();
        let labels: Vec<Region> = o.regions().iter().map(|r| r.1).collect();
        assert_eq!(labels, vec![Region::R1, Region::R2, Region::R3]);
        assert!((o.regions()[1].0 - 1.0).abs() < 1e-9);
        assert_eq!(o.end_time(), 3.0);
    }
}
