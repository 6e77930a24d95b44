//! Full trajectory: face-1 spring phase, corner phase, face-2 spring phase.

use crate::corner::{
    integrate_corner, to_cartesian, CartesianSample, CornerControls, CornerResult, ScaledParams,
};
use crate::error::{Error, Result};
use crate::geometry::{ConeGeometry, Vec2};
use crate::harness::config::{Mode, SimConfig};
use crate::harness::table::{Table, Value};
use crate::linear_phase::{face_phase_state, r1_phase_state, DampingParams, InitialData};

/// Points per phase added on a uniform grid, on top of integrator steps.
pub const POINTS_PER_PHASE: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Face1,
    Corner,
    Face2,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Face1 => "R1-phase",
            Phase::Corner => "corner",
            Phase::Face2 => "R3-phase",
        }
    }
}

/// Data carried from the corner into the face-2 phase, in the frame
/// `u = y1 n2 + y2 d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceHandoff {
    pub t_exit: f64,
    pub y1_0: f64,
    pub dy1_0: f64,
    pub dy2_0: f64,
}

/// Piecewise solution with evaluation at any time in `[0, horizon]`.
#[derive(Debug, Clone)]
pub struct FullSolution {
    pub init: InitialData,
    pub damping: DampingParams,
    pub cone: ConeGeometry,
    pub k: f64,
    pub horizon: f64,
    pub params: ScaledParams,
    /// Absent when the horizon ends before the corner is reached.
    pub corner: Option<CornerResult>,
    pub face: Option<FaceHandoff>,
}

impl FullSolution {
    pub fn t0(&self) -> f64 {
        self.params.t0
    }

    fn sqrt_k(&self) -> f64 {
        self.k.sqrt()
    }

    pub fn state_at(&self, t: f64) -> Result<(Phase, CartesianSample)> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::InvalidInput(format!(
                "time {t} outside [0, {}]",
                self.horizon
            )));
        }
        let t0 = self.t0();
        if t <= t0 || self.corner.is_none() {
            let s = r1_phase_state(&self.init, &self.damping, self.k, t.min(t0))?;
            return Ok((
                Phase::Face1,
                CartesianSample {
                    t,
                    u: Vec2::new(s.r, s.s),
                    v: Vec2::new(s.dr, s.ds),
                },
            ));
        }
        if let Some(f) = &self.face {
            if t > f.t_exit {
                return Ok((Phase::Face2, self.face_sample(f, t)?));
            }
        }
        let corner = self.corner.as_ref().expect("checked above");
        let tau = ((t - t0) * self.sqrt_k()).min(corner.end_tau());
        let mut s = to_cartesian(&corner.state_at(tau)?, &self.params)?;
        s.t = t;
        Ok((Phase::Corner, s))
    }

    fn face_sample(&self, f: &FaceHandoff, t: f64) -> Result<CartesianSample> {
        let y = face_phase_state(
            f.y1_0,
            f.dy1_0,
            f.dy2_0,
            &self.damping,
            self.k,
            t - f.t_exit,
        )?;
        let (n, d) = (self.cone.normal2(), self.cone.face2_direction());
        Ok(CartesianSample {
            t,
            u: y.y1 * n + y.y2 * d,
            v: y.dy1 * n + y.dy2 * d,
        })
    }

    /// `y1` (distance beyond face 2) at time `t` in the face-2 phase.
    pub fn face_normal_offset(&self, t: f64) -> Result<Option<f64>> {
        match &self.face {
            Some(f) if t >= f.t_exit => Ok(Some(
                face_phase_state(
                    f.y1_0,
                    f.dy1_0,
                    f.dy2_0,
                    &self.damping,
                    self.k,
                    t - f.t_exit,
                )?
                .y1,
            )),
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub u: Vec2,
    pub v: Vec2,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// Position mismatch at the corner entry and exit.
    pub position_jumps: Vec<f64>,
    pub velocity_jumps: Vec<f64>,
    pub momentum_drift: f64,
    pub exit_time: Option<f64>,
    /// Smallest `y1` over the face-2 samples.
    pub min_face_offset: Option<f64>,
}

pub const TRAJECTORY_COLUMNS: [&str; 6] = ["t", "u1", "u2", "v1", "v2", "phase"];

impl Trajectory {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(TRAJECTORY_COLUMNS);
        for s in &self.samples {
            t.rows.push(vec![
                Value::Num(s.t),
                Value::Num(s.u.x1),
                Value::Num(s.u.x2),
                Value::Num(s.v.x1),
                Value::Num(s.v.x2),
                Value::Text(s.phase.label().to_string()),
            ]);
        }
        t
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub solution: FullSolution,
    pub trajectory: Trajectory,
}

/// Corner controls implied by a configuration.
pub fn corner_controls(cfg: &SimConfig) -> CornerControls {
    CornerControls {
        rtol: cfg.rtol,
        atol: cfg.atol,
        horizon: cfg.corner_horizon,
        zeta: cfg.zeta,
        safety: cfg.safety,
        ..CornerControls::default()
    }
}

/// Assemble the three phases for a physical-mode configuration.
pub fn simulate_full(cfg: &SimConfig) -> Result<Simulation> {
    let k =
        match cfg.mode {
            Some(Mode::Physical { k }) => k,
            Some(Mode::Scaled { .. }) => return Err(Error::InvalidInput(
                "full simulation needs a stiffness `k`; scaled mode covers the corner phase only"
                    .into(),
            )),
            None => {
                return Err(Error::InvalidInput(
                    "config needs `k` for a full simulation".into(),
                ))
            }
        };
    solve_full(cfg, k).and_then(|s| {
        let trajectory = sample_trajectory(&s)?;
        Ok(Simulation {
            solution: s,
            trajectory,
        })
    })
}

/// Build the piecewise solution for stiffness `k` up to the config horizon.
pub fn solve_full(cfg: &SimConfig, k: f64) -> Result<FullSolution> {
    let damping = cfg.damping()?;
    let cone = cfg.cone()?;
    let params = ScaledParams::from_physical(&cfg.init, &damping, k)?;
    let horizon = cfg.horizon_time()?;
    let t0 = params.t0;
    let sk = k.sqrt();
    let mut corner = None;
    let mut face = None;
    if horizon > t0 {
        let mut controls = corner_controls(cfg);
        controls.stop_at_exit = true;
        // the corner window never extends past the physical horizon
        let window = (horizon - t0) * sk;
        controls.horizon = Some(controls.horizon.map_or(window, |h| h.min(window)));
        let res = integrate_corner(&params, &cone, &controls)?;
        if let Some(exit) = res.exit {
            face = Some(FaceHandoff {
                t_exit: t0 + exit.tau / sk,
                y1_0: params.eta * exit.r / sk,
                dy1_0: params.eta * exit.dr,
                dy2_0: params.eta * params.momentum() / exit.r,
            });
        } else if res.end_tau() < window {
            return Err(Error::NumericFailure(format!(
                "corner window ended at tau = {} without an exit; raise corner_horizon",
                res.end_tau()
            )));
        }
        corner = Some(res);
    }
    Ok(FullSolution {
        init: cfg.init,
        damping,
        cone,
        k,
        horizon,
        params,
        corner,
        face,
    })
}

fn uniform(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| {
        if i == n {
            b
        } else {
            a + (b - a) * i as f64 / n as f64
        }
    })
}

/// Sample every phase at integrator steps plus a uniform grid.
pub fn sample_trajectory(sol: &FullSolution) -> Result<Trajectory> {
    let t0 = sol.t0();
    let sk = sol.sqrt_k();
    let mut samples: Vec<TrajectorySample> = Vec::new();
    let mut push = |phase: Phase, c: CartesianSample| {
        if samples.last().is_none_or(|l| c.t > l.t) {
            samples.push(TrajectorySample {
                t: c.t,
                u: c.u,
                v: c.v,
                phase,
            });
        }
    };

    let face1_end = t0.min(sol.horizon);
    for t in uniform(0.0, face1_end, POINTS_PER_PHASE) {
        push(Phase::Face1, sol.state_at(t)?.1);
    }

    let mut position_jumps = Vec::new();
    let mut velocity_jumps = Vec::new();
    let mut momentum_drift = 0.0;
    let mut min_face_offset = None;
    if let Some(corner) = &sol.corner {
        let r1 = r1_phase_state(&sol.init, &sol.damping, sol.k, t0)?;
        let entry = to_cartesian(&corner.samples[0], &sol.params)?;
        position_jumps.push((entry.u - Vec2::new(r1.r, r1.s)).norm());
        velocity_jumps.push((entry.v - Vec2::new(r1.dr, r1.ds)).norm());
        momentum_drift = corner.momentum_drift;

        let end = corner.end_tau();
        let mut taus: Vec<f64> = corner.samples.iter().map(|s| s.tau).collect();
        taus.extend(uniform(0.0, end, POINTS_PER_PHASE));
        taus.sort_by(f64::total_cmp);
        taus.dedup();
        for tau in taus {
            if tau == 0.0 {
                continue;
            }
            let mut c = to_cartesian(&corner.state_at(tau)?, &sol.params)?;
            c.t = t0 + tau / sk;
            push(Phase::Corner, c);
        }

        if let (Some(f), Some(exit)) = (&sol.face, corner.exit) {
            let at_exit = to_cartesian(&exit, &sol.params)?;
            let start = sol.face_sample(f, f.t_exit)?;
            position_jumps.push((at_exit.u - start.u).norm());
            velocity_jumps.push((at_exit.v - start.v).norm());
            let mut lowest = f64::INFINITY;
            for t in uniform(f.t_exit, sol.horizon, POINTS_PER_PHASE).skip(1) {
                let c = sol.face_sample(f, t)?;
                lowest = lowest.min(c.u.dot(sol.cone.normal2()));
                push(Phase::Face2, c);
            }
            min_face_offset = Some(lowest);
        }
    }
    Ok(Trajectory {
        samples,
        position_jumps,
        velocity_jumps,
        momentum_drift,
        exit_time: sol.face.map(|f| f.t_exit),
        min_face_offset,
    })
}
