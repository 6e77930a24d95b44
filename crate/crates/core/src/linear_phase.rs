//! Closed forms for the linear pieces of the motion: the face-1 spring phase
//! before the particle reaches the corner region, the face-2 spring phase
//! after it leaves, and the fundamental kernels of `y'' + 2α y' + y = 0`.
//!
//! Everything is evaluated in fast time `τ = t√k`, and differences of close
//! exponentials go through `expm1` so that small `τ` and large `k` keep full
//! precision.

use crate::error::{ensure_finite, Error, Result};

/// Characteristic data of the over-damped oscillator `y'' + 2α y' + y = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingParams {
    alpha: f64,
    delta: f64,
    sqrt_delta: f64,
    xi1: f64,
    xi2: f64,
}

impl DampingParams {
    /// Roots of `ξ² + 2αξ + 1 = 0`; requires `α > 1`.
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(Error::NotOverDamped(alpha));
        }
        let delta = (alpha - 1.0) * (alpha + 1.0);
        let sqrt_delta = delta.sqrt();
        let xi2 = -alpha - sqrt_delta;
        // ξ1 = -α + √Δ loses digits for large α; use ξ1 ξ2 = 1 instead.
        let xi1 = 1.0 / xi2;
        Ok(Self {
            alpha,
            delta,
            sqrt_delta,
            xi1,
            xi2,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `Δ = α² - 1`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sqrt_delta(&self) -> f64 {
        self.sqrt_delta
    }

    /// Slow root, `ξ2 < ξ1 < 0`.
    pub fn xi1(&self) -> f64 {
        self.xi1
    }

    /// Fast root.
    pub fn xi2(&self) -> f64 {
        self.xi2
    }

    /// `K₂(τ) = (e^{ξ1 τ} - e^{ξ2 τ}) / (2√Δ)`, zero for `τ <= 0`.
    pub fn k2(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        -(self.xi1 * tau).exp() * (-2.0 * self.sqrt_delta * tau).exp_m1() / (2.0 * self.sqrt_delta)
    }

    /// `dK₂/dτ`.
    pub fn k2_dot(&self, tau: f64) -> f64 {
        if tau < 0.0 {
            return 0.0;
        }
        let m = (-2.0 * self.sqrt_delta * tau).exp_m1();
        (self.xi1 * tau).exp() * (1.0 - self.xi2 * m / (2.0 * self.sqrt_delta))
    }

    /// `H₂(τ) = (-ξ2 e^{ξ1 τ} + ξ1 e^{ξ2 τ}) / (2√Δ)`, zero for `τ < 0`.
    pub fn h2(&self, tau: f64) -> f64 {
        if tau < 0.0 {
            return 0.0;
        }
        let m = (-2.0 * self.sqrt_delta * tau).exp_m1();
        (self.xi1 * tau).exp() * (1.0 + self.xi1 * m / (2.0 * self.sqrt_delta))
    }

    /// `dH₂/dτ = -K₂` (from `ξ1 ξ2 = 1`).
    pub fn h2_dot(&self, tau: f64) -> f64 {
        -self.k2(tau)
    }

    /// Both kernels at `τ >= 0`.
    pub fn kernels(&self, tau: f64) -> Result<(f64, f64)> {
        if !(tau >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "kernel time must be non-negative (got {tau})"
            )));
        }
        Ok((self.k2(tau), self.h2(tau)))
    }

    /// Solution of the damped oscillator in fast time with data `(y, y')`
    /// at `τ = 0`: returns `(y(τ), y'(τ))`.
    pub fn propagate(&self, y0: f64, dy0: f64, tau: f64) -> (f64, f64) {
        let y = dy0 * self.k2(tau) + y0 * self.h2(tau);
        let dy = dy0 * self.k2_dot(tau) + y0 * self.h2_dot(tau);
        (y, dy)
    }
}

/// Data at the first impact time `t = 0`: the particle sits on face 1 at
/// `(0, s0)` with velocity `(dr0, ds0)` heading out of K toward the corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub s0: f64,
    pub dr0: f64,
    pub ds0: f64,
}

impl InitialData {
    pub fn new(s0: f64, dr0: f64, ds0: f64) -> Result<Self> {
        ensure_finite("initial data", &[s0, dr0, ds0])?;
        if !(ds0 > 0.0) {
            return Err(Error::NoCrossing(ds0));
        }
        if !(s0 < 0.0) {
            return Err(Error::InvalidInput(format!(
                "s0 must be negative (got {s0})"
            )));
        }
        if !(dr0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "dr0 must be positive (got {dr0})"
            )));
        }
        Ok(Self { s0, dr0, ds0 })
    }
}

/// Time at which `x2` reaches zero.
pub fn first_crossing_time(init: &InitialData) -> Result<f64> {
    if !(init.ds0 > 0.0) {
        return Err(Error::NoCrossing(init.ds0));
    }
    Ok(-init.s0 / init.ds0)
}

/// Phase-space state in the R1 phase: `(r, ṙ, s, ṡ)` with `r = x1`, `s = x2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R1State {
    pub r: f64,
    pub dr: f64,
    pub s: f64,
    pub ds: f64,
}

/// Closed-form R1-phase state at physical time `t ∈ [0, t0]`.
pub fn r1_phase_state(
    init: &InitialData,
    damping: &DampingParams,
    k: f64,
    t: f64,
) -> Result<R1State> {
    check_stiffness(k)?;
    let t0 = first_crossing_time(init)?;
    let slack = 1e-12 * t0.max(1.0);
    if !(t >= -slack && t <= t0 + slack) {
        return Err(Error::OutOfPhase { t, t0 });
    }
    let t = t.clamp(0.0, t0);
    let sk = k.sqrt();
    let tau = t * sk;
    Ok(R1State {
        r: init.dr0 * damping.k2(tau) / sk,
        dr: init.dr0 * damping.k2_dot(tau),
        s: init.s0 + t * init.ds0,
        ds: init.ds0,
    })
}

/// State in the face-2 frame: `y1` normal to face 2 (outward), `y2` along it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceState {
    pub y1: f64,
    pub dy1: f64,
    pub y2: f64,
    pub dy2: f64,
}

/// Closed-form face-phase motion `t'` after entering R3, with `y2(0) = 0`.
pub fn face_phase_state(
    y1_0: f64,
    dy1_0: f64,
    dy2_0: f64,
    damping: &DampingParams,
    k: f64,
    t: f64,
) -> Result<FaceState> {
    check_stiffness(k)?;
    ensure_finite("face data", &[y1_0, dy1_0, dy2_0, t])?;
    if y1_0 < 0.0 {
        return Err(Error::InvalidInput(format!(
            "y1(0) must be non-negative (got {y1_0})"
        )));
    }
    if t < 0.0 {
        return Err(Error::InvalidInput(format!(
            "face time must be non-negative (got {t})"
        )));
    }
    let sk = k.sqrt();
    let tau = t * sk;
    // fast-time velocity is dy1/√k
    let (y1, dy1_fast) = damping.propagate(y1_0, dy1_0 / sk, tau);
    Ok(FaceState {
        y1,
        dy1: dy1_fast * sk,
        y2: t * dy2_0,
        dy2: dy2_0,
    })
}

pub(crate) fn check_stiffness(k: f64) -> Result<()> {
    if k.is_finite() && k > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "stiffness k must be positive (got {k})"
        )))
    }
}
