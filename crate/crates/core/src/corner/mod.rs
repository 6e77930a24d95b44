//! Corner phase: the particle is in R2, where the penalty force is central.
//!
//! With `r = η R / √k`, `t = t0 + τ/√k` and `θ = Θ` the motion becomes
//!
//! ```text
//! R'' = E(1-ε)²/R³ - 2α R' - R,     Θ' = √E (1-ε) / R²
//! ```
//!
//! which depends on the stiffness only through `(η, ε)`. That is what lets
//! asymptotic studies run at values of η far below what any representable
//! `k` would give.

pub mod oracle;

use crate::asymptotics::lyapunov_q;
use crate::error::{ensure_finite, Error, Result};
use crate::geometry::{ConeGeometry, Vec2};
use crate::linear_phase::{check_stiffness, first_crossing_time, DampingParams, InitialData};
use crate::ode::{integrate, OdeOptions, OdeSolution, OdeSystem};

/// Below this value of `ξ1 t0 √k`, `η⁴` is no longer a normal double.
pub const UNDERFLOW_EXPONENT: f64 = -354.0;

/// How ε is obtained in scale-free mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsPolicy {
    /// `ε = η^(2(ξ2-ξ1)/ξ1)`, the value a physical run would produce.
    Derive,
    Value(f64),
}

/// Parameters of the scaled corner problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledParams {
    /// Radius scale `e^{ξ1 t0 √k / 2}`.
    pub eta: f64,
    /// `e^{(ξ2-ξ1) t0 √k}`, the fast-mode remnant at the handoff.
    pub eps: f64,
    /// Energy constant `E = (dr0 ds0)² / (4Δ)`.
    pub energy: f64,
    pub r_init: f64,
    pub dr_init: f64,
    /// `W = Ṙ(0)² + E/R(0)²`.
    pub first_integral: f64,
    /// Time at which the first-asymptotic radius is smallest.
    pub tau_vertex: f64,
    /// `√E / W`, the curvature time scale at the closest approach.
    pub kappa: f64,
    /// Physical angular momentum `r² θ̇`, known only in physical mode.
    pub physical_momentum: Option<f64>,
    pub stiffness: Option<f64>,
    pub t0: f64,
    pub damping: DampingParams,
    pub init: InitialData,
}

impl ScaledParams {
    /// Parameters produced by a physical run with stiffness `k`.
    pub fn from_physical(init: &InitialData, damping: &DampingParams, k: f64) -> Result<Self> {
        check_stiffness(k)?;
        let t0 = first_crossing_time(init)?;
        let sk = k.sqrt();
        let exponent = damping.xi1() * t0 * sk;
        if exponent < UNDERFLOW_EXPONENT {
            return Err(Error::ScaleUnderflow { exponent });
        }
        let eta = (0.5 * exponent).exp();
        let eps = ((damping.xi2() - damping.xi1()) * t0 * sk).exp();
        let mut p = Self::assemble(eta, eps, init, damping, t0)?;
        p.stiffness = Some(k);
        p.physical_momentum = Some(eta * eta * (1.0 - eps) * p.energy.sqrt() / sk);
        Ok(p)
    }

    /// Scale-free parameters with η chosen directly.
    pub fn direct(
        eta: f64,
        eps: EpsPolicy,
        init: &InitialData,
        damping: &DampingParams,
    ) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidScale(eta));
        }
        let eps = match eps {
            EpsPolicy::Derive => (eta.ln() * eps_exponent(damping)).exp(),
            EpsPolicy::Value(e) => {
                if !(0.0..1.0).contains(&e) {
                    return Err(Error::InvalidInput(format!(
                        "eps must lie in [0, 1) (got {e})"
                    )));
                }
                e
            }
        };
        let t0 = first_crossing_time(init)?;
        Self::assemble(eta, eps, init, damping, t0)
    }

    fn assemble(
        eta: f64,
        eps: f64,
        init: &InitialData,
        damping: &DampingParams,
        t0: f64,
    ) -> Result<Self> {
        let sd = damping.sqrt_delta();
        let energy = (init.dr0 * init.ds0).powi(2) / (4.0 * damping.delta());
        let r_init = eta * init.dr0 * (1.0 - eps) / (2.0 * sd);
        let dr_init = eta * init.dr0 * damping.xi1() * (1.0 - eps * damping.xi2() / damping.xi1())
            / (2.0 * sd);
        let first_integral = dr_init * dr_init + energy / (r_init * r_init);
        let tau_vertex = -dr_init * r_init / first_integral;
        let kappa = energy.sqrt() / first_integral;
        ensure_finite(
            "scaled parameters",
            &[r_init, dr_init, first_integral, tau_vertex, kappa],
        )
        .map_err(|_| Error::NumericFailure("scaled parameters are not representable".into()))?;
        if !(r_init > 0.0) {
            return Err(Error::NumericFailure(format!(
                "initial scaled radius underflows (eta = {eta:e})"
            )));
        }
        Ok(Self {
            eta,
            eps,
            energy,
            r_init,
            dr_init,
            first_integral,
            tau_vertex,
            kappa,
            physical_momentum: None,
            stiffness: None,
            t0,
            damping: *damping,
            init: *init,
        })
    }

    /// Scaled angular momentum `R² Θ' = √E (1-ε)`.
    pub fn momentum(&self) -> f64 {
        self.energy.sqrt() * (1.0 - self.eps)
    }

    /// `E (1-ε)²`, the strength of the centrifugal term.
    pub fn centrifugal(&self) -> f64 {
        self.energy * (1.0 - self.eps).powi(2)
    }
}

/// Exponent `2(ξ2-ξ1)/ξ1` with `ε = η^exponent`; equals `4√Δ/|ξ1|`.
pub fn eps_exponent(damping: &DampingParams) -> f64 {
    2.0 * (damping.xi2() - damping.xi1()) / damping.xi1()
}

/// Polar state of the scaled corner problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledState {
    pub tau: f64,
    pub r: f64,
    pub dr: f64,
    pub theta: f64,
}

/// `(Ṙ, R̈, Θ')` at a state with `R > 0`.
pub fn radial_rhs(state: &ScaledState, params: &ScaledParams) -> Result<(f64, f64, f64)> {
    let sys = RadialSystem::new(params);
    let d = sys.rhs(state.tau, &[state.r, state.dr, state.theta])?;
    Ok((d[0], d[1], d[2]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RadialSystem {
    alpha: f64,
    centrifugal: f64,
    momentum: f64,
}

impl RadialSystem {
    pub(crate) fn new(params: &ScaledParams) -> Self {
        Self {
            alpha: params.damping.alpha(),
            centrifugal: params.centrifugal(),
            momentum: params.momentum(),
        }
    }
}

impl OdeSystem<3> for RadialSystem {
    fn rhs(&self, _tau: f64, y: &[f64; 3]) -> Result<[f64; 3]> {
        let (r, dr) = (y[0], y[1]);
        if !(r > 0.0) {
            return Err(Error::SingularRadius(r));
        }
        let r2 = r * r;
        Ok([
            dr,
            self.centrifugal / (r2 * r) - 2.0 * self.alpha * dr - r,
            self.momentum / r2,
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerControls {
    pub rtol: f64,
    pub atol: f64,
    /// End of the scaled time window; `None` picks the default below.
    pub horizon: Option<f64>,
    /// Stop at the first crossing of `Θ = θ̄`; otherwise keep integrating
    /// the radial problem past it.
    pub stop_at_exit: bool,
    /// Factor in `τ3 = ζ ln(1/η)`; `None` means `0.5/|ξ1|`.
    pub zeta: Option<f64>,
    /// Multiplier for the default horizon `τ3 (1 + 2 λ2 safety)`.
    pub safety: f64,
    /// Exit refinement tolerance on `|Θ - θ̄|`.
    pub angle_tol: f64,
}

impl Default for CornerControls {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            horizon: None,
            stop_at_exit: true,
            zeta: None,
            safety: 1.0,
            angle_tol: 1e-11,
        }
    }
}

/// Default `ζ = 0.5/|ξ1|`.
pub fn default_zeta(damping: &DampingParams) -> f64 {
    0.5 / damping.xi1().abs()
}

impl CornerControls {
    pub fn zeta_for(&self, damping: &DampingParams) -> f64 {
        self.zeta.unwrap_or_else(|| default_zeta(damping))
    }

    pub fn horizon_for(&self, params: &ScaledParams) -> f64 {
        self.horizon.unwrap_or_else(|| {
            let zeta = self.zeta_for(&params.damping);
            let lambda2 = lyapunov_q(&params.damping).lambda2;
            zeta * (1.0 / params.eta).ln() * (1.0 + 2.0 * lambda2 * self.safety)
        })
    }
}

#[derive(Debug, Clone)]
pub struct CornerResult {
    /// State at the first crossing of `Θ = θ̄`, if one happened.
    pub exit: Option<ScaledState>,
    /// States at every accepted integrator step.
    pub samples: Vec<ScaledState>,
    /// `max |R² Θ' / (√E(1-ε)) - 1|` over the samples.
    pub momentum_drift: f64,
    pub horizon: f64,
    system: RadialSystem,
    solution: OdeSolution<3>,
}

impl CornerResult {
    pub fn exit_tau(&self) -> Option<f64> {
        self.exit.map(|s| s.tau)
    }

    /// True when the window ended without an exit.
    pub fn reached_horizon(&self) -> bool {
        self.exit.is_none()
    }

    /// Last time covered by the integration.
    pub fn end_tau(&self) -> f64 {
        self.solution.t_last()
    }

    /// Dense evaluation anywhere in `[0, end_tau]`.
    pub fn state_at(&self, tau: f64) -> Result<ScaledState> {
        let y = self.solution.eval(&self.system, tau)?;
        Ok(ScaledState {
            tau,
            r: y[0],
            dr: y[1],
            theta: y[2],
        })
    }

    /// Radial acceleration at a state, from the integrated vector field.
    pub fn acceleration(&self, s: &ScaledState) -> Result<f64> {
        Ok(self.system.rhs(s.tau, &[s.r, s.dr, s.theta])?[1])
    }

    pub fn angular_rate(&self, s: &ScaledState) -> Result<f64> {
        Ok(self.system.rhs(s.tau, &[s.r, s.dr, s.theta])?[2])
    }
}

/// Integrate the corner problem from `(R0, Ṙ0, 0)` at `τ = 0`.
pub fn integrate_corner(
    params: &ScaledParams,
    cone: &ConeGeometry,
    controls: &CornerControls,
) -> Result<CornerResult> {
    let horizon = controls.horizon_for(params);
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "corner horizon must be non-negative (got {horizon})"
        )));
    }
    let system = RadialSystem::new(params);
    let opts = OdeOptions {
        rtol: controls.rtol,
        atol: controls.atol,
        h_init: Some(1e-3 * params.kappa),
        ..OdeOptions::default()
    };
    let theta_bar = cone.theta_bar();
    let solution = integrate(
        &system,
        0.0,
        [params.r_init, params.dr_init, 0.0],
        horizon,
        &opts,
        Some(|_t: f64, y: &[f64; 3]| y[2] - theta_bar),
        controls.angle_tol,
        controls.stop_at_exit,
    )?;
    let samples: Vec<ScaledState> = solution
        .ts
        .iter()
        .zip(&solution.ys)
        .map(|(&tau, y)| ScaledState {
            tau,
            r: y[0],
            dr: y[1],
            theta: y[2],
        })
        .collect();
    let mut momentum_drift = 0.0f64;
    for s in &samples {
        if !(s.r > 0.0) {
            return Err(Error::SingularRadius(s.r));
        }
        let rate = system.rhs(s.tau, &[s.r, s.dr, s.theta])?[2];
        momentum_drift = momentum_drift.max((s.r * s.r * rate / params.momentum() - 1.0).abs());
    }
    let exit = solution.event.map(|hit| ScaledState {
        tau: hit.t,
        r: hit.y[0],
        dr: hit.y[1],
        theta: hit.y[2],
    });
    Ok(CornerResult {
        exit,
        samples,
        momentum_drift,
        horizon,
        system,
        solution,
    })
}

/// A physical-time sample: position and velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianSample {
    pub t: f64,
    pub u: Vec2,
    pub v: Vec2,
}

/// Map a scaled state back to physical position and velocity.
pub fn to_cartesian(state: &ScaledState, params: &ScaledParams) -> Result<CartesianSample> {
    let k = params.stiffness.ok_or(Error::ScaleFreeRun)?;
    let sk = k.sqrt();
    let r = params.eta * state.r / sk;
    let dr = params.eta * state.dr;
    // r θ̇ = (η R/√k)(Θ' √k)
    let r_dtheta = params.eta * params.momentum() / state.r;
    let (s, c) = state.theta.sin_cos();
    Ok(CartesianSample {
        t: params.t0 + state.tau / sk,
        u: Vec2::new(r * c, r * s),
        v: Vec2::new(dr * c - r_dtheta * s, dr * s + r_dtheta * c),
    })
}

/// Physical samples for every stored corner state.
pub fn reconstruct_cartesian(
    result: &CornerResult,
    params: &ScaledParams,
) -> Result<Vec<CartesianSample>> {
    result
        .samples
        .iter()
        .map(|s| to_cartesian(s, params))
        .collect()
}
