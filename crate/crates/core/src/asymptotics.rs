//! Closed-form approximations of the scaled corner motion.
//!
//! * First layer, `τ ∈ [0, τ1]`: the centrifugal term dominates and
//!   `R₁'' = E/R₁³` with matched data gives `R₁² = E/W + W (τ-τ0)²`.
//! * Second layer, `τ ∈ [τ1, τ3]`: the linear oscillator takes over and
//!   `R₂` is propagated with the kernels `K₂`, `H₂` from the state at `τ1`.
//! * Long times: the radial flow has a single attracting equilibrium `Rc`
//!   and a Lyapunov function `F`; far from `Rc` the quadratic form of the
//!   linear oscillator decays at a guaranteed rate.

use crate::corner::ScaledParams;
use crate::error::{Error, Result};
use crate::geometry::ConeGeometry;
use crate::linear_phase::DampingParams;

/// First asymptotic `R₁, Θ₁` and its linearization kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstAsymptotic {
    pub energy: f64,
    pub first_integral: f64,
    pub tau_vertex: f64,
    pub kappa: f64,
}

impl FirstAsymptotic {
    pub fn new(params: &ScaledParams) -> Self {
        Self {
            energy: params.energy,
            first_integral: params.first_integral,
            tau_vertex: params.tau_vertex,
            kappa: params.kappa,
        }
    }

    /// `(R₁, R₁')` at `τ`.
    pub fn radius(&self, tau: f64) -> (f64, f64) {
        let w = self.first_integral;
        let s = tau - self.tau_vertex;
        let r = (self.energy / w + w * s * s).sqrt();
        (r, w * s / r)
    }

    /// `R₁'' = E / R₁³`.
    pub fn acceleration(&self, tau: f64) -> f64 {
        let r = self.radius(tau).0;
        self.energy / (r * r * r)
    }

    /// `Θ₁`, which vanishes at `τ = 0`.
    pub fn angle(&self, tau: f64) -> f64 {
        let se = self.energy.sqrt();
        let w = self.first_integral;
        (w * (tau - self.tau_vertex) / se).atan() + (w * self.tau_vertex / se).atan()
    }

    /// `Θ₁' = √E / R₁²`.
    pub fn angular_rate(&self, tau: f64) -> f64 {
        let r = self.radius(tau).0;
        self.energy.sqrt() / (r * r)
    }

    /// `J(τ, σ) = E/W + W (σ-τ0)(τ-τ0)`; `J(τ, τ) = R₁(τ)²`.
    pub fn kernel_j(&self, tau: f64, sigma: f64) -> f64 {
        let w = self.first_integral;
        self.energy / w + w * (sigma - self.tau_vertex) * (tau - self.tau_vertex)
    }

    /// Green's kernel of `z'' + 3E z / R₁⁴ = f`, zero for `σ > τ`.
    pub fn kernel_k(&self, tau: f64, sigma: f64) -> f64 {
        if sigma > tau {
            return 0.0;
        }
        (tau - sigma) * self.kernel_j(tau, sigma) / (self.radius(tau).0 * self.radius(sigma).0)
    }

    /// Two solutions of the linearized equation with unit Wronskian:
    /// `(z1, z1', z2, z2')`.
    pub fn kernel_solutions(&self, tau: f64) -> (f64, f64, f64, f64) {
        let w = self.first_integral;
        let (r, dr) = self.radius(tau);
        let z1 = dr;
        let dz1 = self.energy / (r * r * r);
        let num = tau * (tau - self.tau_vertex) - self.energy / (w * w);
        let z2 = num / r;
        let dz2 = (2.0 * tau - self.tau_vertex) / r - num * dr / (r * r);
        (z1, dz1, z2, dz2)
    }

    pub fn wronskian(&self, tau: f64) -> f64 {
        let (z1, dz1, z2, dz2) = self.kernel_solutions(tau);
        z1 * dz2 - z2 * dz1
    }

    /// `I(τ) = (1/R₁(τ)) ∫₀^τ K(τ,σ) / R₁(σ)³ dσ`.
    ///
    /// With `x = (σ-τ0)/κ` this becomes
    /// `(1/E) (1/(1+y²)) ∫ (y-x)(1+xy)/(1+x²)² dx` over `[-τ0/κ, y]`,
    /// `y = (τ-τ0)/κ`, which is integrated on geometrically growing pieces.
    pub fn kernel_integral(&self, tau: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Ok(0.0);
        }
        let a = -self.tau_vertex / self.kappa;
        let y = (tau - self.tau_vertex) / self.kappa;
        let f = |x: f64| (y - x) * (1.0 + x * y) / (1.0 + x * x).powi(2);
        let total = piecewise_quadrature(f, a, y, 1.0, 1e-13 * (1.0 + y * y))?;
        Ok(total / (self.energy * (1.0 + y * y)))
    }
}

/// Integrate on `[a, b]` split at `a + scale·2^j` (and at 0 when `a < 0`).
fn piecewise_quadrature<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    scale: f64,
    abs_tol: f64,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let mut cuts = vec![a];
    let mut origin = a;
    if a < 0.0 && b > 0.0 {
        cuts.push(0.0);
        origin = 0.0;
    }
    let mut step = scale;
    while origin + step < b {
        cuts.push(origin + step);
        step *= 2.0;
    }
    cuts.push(b);
    let per_piece = abs_tol / cuts.len() as f64;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let out = quadrature::integrate(&f, w[0], w[1], per_piece);
        if !out.integral.is_finite() {
            return Err(Error::NumericFailure(format!(
                "quadrature diverged on [{}, {}]",
                w[0], w[1]
            )));
        }
        if out.error_estimate > 1e3 * per_piece.max(1e-14 * out.integral.abs()) {
            return Err(Error::NumericFailure(format!(
                "quadrature did not converge on [{}, {}] (error {:e})",
                w[0], w[1], out.error_estimate
            )));
        }
        total += out.integral;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaBound {
    /// Largest `I(τ)` over the sampling grid.
    pub numeric: f64,
    /// Where the largest value was found.
    pub argmax_tau: f64,
    /// `4/E`.
    pub analytic: f64,
}

/// Bound on `I(τ)` over `τ ∈ [0, 1]`, sampled on 401 points.
pub fn delta_bound(params: &ScaledParams) -> Result<DeltaBound> {
    let fa = FirstAsymptotic::new(params);
    let mut best = (0.0, 0.0);
    for i in 0..=400 {
        let tau = i as f64 / 400.0;
        let v = fa.kernel_integral(tau)?;
        if v > best.0 {
            best = (v, tau);
        }
    }
    Ok(DeltaBound {
        numeric: best.0,
        argmax_tau: best.1,
        analytic: 4.0 / params.energy,
    })
}

/// Second asymptotic: the damped oscillator started from the state at `τ1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondAsymptotic {
    pub tau1: f64,
    pub r_match: f64,
    pub dr_match: f64,
    pub damping: DampingParams,
}

impl SecondAsymptotic {
    pub fn new(tau1: f64, r_match: f64, dr_match: f64, damping: &DampingParams) -> Result<Self> {
        if !(r_match.is_finite() && dr_match.is_finite() && tau1.is_finite()) {
            return Err(Error::InvalidInput("matching state must be finite".into()));
        }
        Ok(Self {
            tau1,
            r_match,
            dr_match,
            damping: *damping,
        })
    }

    /// `(R₂, R₂')` at `τ >= τ1`.
    pub fn radius(&self, tau: f64) -> Result<(f64, f64)> {
        if !(tau >= self.tau1) {
            return Err(Error::InvalidInput(format!(
                "second asymptotic needs tau >= tau1 = {} (got {tau})",
                self.tau1
            )));
        }
        Ok(self
            .damping
            .propagate(self.r_match, self.dr_match, tau - self.tau1))
    }

    /// `(1/R₂(τ)) ∫_{τ1}^τ K₂(τ-σ) / R₂(σ)³ dσ`.
    pub fn kernel_integral(&self, tau: f64) -> Result<f64> {
        let r_tau = self.radius(tau)?.0;
        if tau == self.tau1 {
            return Ok(0.0);
        }
        let d = self.damping;
        let f = |s: f64| {
            let r = d.propagate(self.r_match, self.dr_match, s - self.tau1).0;
            d.k2(tau - s) / (r * r * r)
        };
        let scale = self.match_scale();
        let tol = 1e-12 * r_tau / (self.r_match.powi(3)) * scale;
        Ok(piecewise_quadrature(f, self.tau1, tau, scale, tol)? / r_tau)
    }

    /// Time over which the matching velocity doubles the matching radius.
    fn match_scale(&self) -> f64 {
        let s = self.r_match / self.dr_match.abs().max(f64::MIN_POSITIVE);
        s.clamp(1e-12, 1.0)
    }

    /// Largest [`kernel_integral`](Self::kernel_integral) on `[τ1, τ3]`,
    /// sampled geometrically in `τ - τ1`.
    pub fn kernel_integral_sup(&self, tau3: f64, points: usize) -> Result<f64> {
        if !(tau3 > self.tau1) || points < 2 {
            return Ok(0.0);
        }
        let lo = self.match_scale() * 1e-2;
        let span = tau3 - self.tau1;
        let ratio = (span / lo).powf(1.0 / (points - 1) as f64);
        let mut best = 0.0f64;
        let mut h = lo;
        for _ in 0..points {
            best = best.max(self.kernel_integral(self.tau1 + h.min(span))?);
            h *= ratio;
        }
        Ok(best)
    }
}

/// The deterministic time scales of the matched expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticTimes {
    pub gamma1: f64,
    pub zeta: f64,
    /// End of the first layer, `η^γ1`.
    pub tau1: f64,
    /// `2 ln(ξ2/ξ1) / (ξ1 - ξ2)`, after which `K₂` dominates `H₂`.
    pub tau2: f64,
    /// End of the second layer, `ζ ln(1/η)`.
    pub tau3: f64,
    /// First return of `R` to the trapping threshold after `τ3`; only
    /// known from a trajectory.
    pub tau4: Option<f64>,
}

pub fn check_gamma1(gamma1: f64) -> Result<()> {
    if gamma1 > 1.0 && gamma1 < 4.0 / 3.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent {
            name: "gamma1",
            range: "(1, 4/3)",
            value: gamma1,
        })
    }
}

pub fn check_zeta(zeta: f64, damping: &DampingParams) -> Result<()> {
    if zeta > 0.0 && zeta < 1.0 / damping.xi1().abs() {
        Ok(())
    } else {
        Err(Error::InvalidExponent {
            name: "zeta",
            range: "(0, 1/|xi1|)",
            value: zeta,
        })
    }
}

pub fn asymptotic_times(
    eta: f64,
    gamma1: f64,
    zeta: f64,
    damping: &DampingParams,
) -> Result<AsymptoticTimes> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidScale(eta));
    }
    check_gamma1(gamma1)?;
    check_zeta(zeta, damping)?;
    let (x1, x2) = (damping.xi1(), damping.xi2());
    Ok(AsymptoticTimes {
        gamma1,
        zeta,
        tau1: eta.powf(gamma1),
        tau2: 2.0 * (x2 / x1).ln() / (x1 - x2),
        tau3: zeta * (1.0 / eta).ln(),
        tau4: None,
    })
}

/// Equilibrium radius `(E(1-ε)²)^{1/4}`.
pub fn critical_point(energy: f64, eps: f64) -> f64 {
    (energy * (1.0 - eps).powi(2)).powf(0.25)
}

/// `F = R² + E(1-ε)²/R² + R'²`, non-increasing along the radial flow.
pub fn lyapunov_f(r: f64, dr: f64, energy: f64, eps: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::SingularRadius(r));
    }
    Ok(r * r + energy * (1.0 - eps).powi(2) / (r * r) + dr * dr)
}

/// Solution `Q` of `MᵀQ + QM = -I` for `M = [[0, 1], [-1, -2α]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovData {
    pub q: [[f64; 2]; 2],
    pub lambda1: f64,
    pub lambda2: f64,
}

pub fn lyapunov_q(damping: &DampingParams) -> LyapunovData {
    let a = damping.alpha();
    let q11 = a + 0.5 / a;
    let q12 = 0.5;
    let q22 = 0.5 / a;
    let mean = 0.5 * (q11 + q22);
    let rad = (0.25 * (q11 - q22).powi(2) + q12 * q12).sqrt();
    let lambda2 = mean + rad;
    // product of eigenvalues is det Q; avoids cancellation in mean - rad
    let lambda1 = (q11 * q22 - q12 * q12) / lambda2;
    LyapunovData {
        q: [[q11, q12], [q12, q22]],
        lambda1,
        lambda2,
    }
}

impl LyapunovData {
    /// `xᵀ Q x` with `x = (R, R')`.
    pub fn form(&self, r: f64, dr: f64) -> f64 {
        let q = &self.q;
        q[0][0] * r * r + 2.0 * q[0][1] * r * dr + q[1][1] * dr * dr
    }

    /// Instantaneous decay rate `-(d/dτ)(xᵀQx) / xᵀQx` along the radial
    /// flow with centrifugal strength `c = E(1-ε)²`.
    pub fn decay_rate(&self, r: f64, dr: f64, centrifugal: f64) -> f64 {
        let q = &self.q;
        let dv = -(r * r + dr * dr) + 2.0 * (q[0][1] * r + q[1][1] * dr) * centrifugal / r.powi(3);
        -dv / self.form(r, dr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrappingThreshold {
    /// `1.01 · max((4Eλ2^{3/2}/λ1^{1/2})^{1/4}, Rc)`.
    pub rbar: f64,
    /// The same expression without the fourth root, for comparison.
    pub rbar_without_root: f64,
    pub rc: f64,
}

const THRESHOLD_MARGIN: f64 = 0.01;

pub fn trapping_threshold(energy: f64, eps: f64, damping: &DampingParams) -> TrappingThreshold {
    let l = lyapunov_q(damping);
    let rc = critical_point(energy, eps);
    let core = 4.0 * energy * l.lambda2.powf(1.5) / l.lambda1.sqrt();
    TrappingThreshold {
        rbar: (1.0 + THRESHOLD_MARGIN) * core.powf(0.25).max(rc),
        rbar_without_root: (1.0 + THRESHOLD_MARGIN) * core.max(rc),
        rc,
    }
}

/// `r = min(γ1, 4√Δ/|ξ1|)` and the exponent `max(2-r, γ1)` of the lower
/// bound `τ̄ >= C η^{max(2-r, γ1)}` at a right-angle corner.
pub fn obtuse_exponents(gamma1: f64, damping: &DampingParams) -> Result<(f64, f64)> {
    check_gamma1(gamma1)?;
    let ratio = 4.0 * damping.sqrt_delta() / damping.xi1().abs();
    Ok(lower_bound_exponent(gamma1, ratio))
}

/// Branch logic of [`obtuse_exponents`] for an arbitrary rate ratio.
pub fn lower_bound_exponent(gamma1: f64, ratio: f64) -> (f64, f64) {
    let r = gamma1.min(ratio);
    (r, (2.0 - r).max(gamma1))
}

/// Predicted state at the exit from the corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExitEquivalents {
    /// `θ̄ < π/2`: exit during the first layer.
    Acute {
        tau_bar: f64,
        r: f64,
        dr: f64,
        dtheta: f64,
    },
    /// `θ̄ >= π/2`: no exit before `τ3`; predicted state there.
    Obtuse { tau3: f64, r: f64, dr: f64 },
}

pub fn exit_equivalents(
    params: &ScaledParams,
    cone: &ConeGeometry,
    zeta: f64,
) -> Result<ExitEquivalents> {
    let d = &params.damping;
    let init = &params.init;
    let eta = params.eta;
    if cone.is_acute() {
        let se = params.energy.sqrt();
        let r = init.dr0 * eta / (2.0 * cone.cos() * d.sqrt_delta());
        Ok(ExitEquivalents::Acute {
            tau_bar: params.tau_vertex + se * cone.sin() / cone.cos() / params.first_integral,
            r,
            dr: init.ds0 * cone.sin() / eta,
            dtheta: params.momentum() / (r * r),
        })
    } else {
        check_zeta(zeta, d)?;
        let r = init.ds0 * eta.powf(-(1.0 + zeta * d.xi1())) / (2.0 * d.sqrt_delta());
        Ok(ExitEquivalents::Obtuse {
            tau3: zeta * (1.0 / eta).ln(),
            r,
            dr: d.xi1() * r,
        })
    }
}
