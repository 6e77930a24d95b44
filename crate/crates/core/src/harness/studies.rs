//! Convergence, asymptotic and attractor studies, oracle comparison and the
//! phase portrait of the radial flow.

use crate::asymptotics::{
    asymptotic_times, critical_point, delta_bound, exit_equivalents, lyapunov_f, lyapunov_q,
    trapping_threshold, ExitEquivalents, FirstAsymptotic, SecondAsymptotic,
};
use crate::corner::oracle::oracle_fast_time_integration;
use crate::corner::{
    integrate_corner, CornerControls, CornerResult, EpsPolicy, ScaledParams, ScaledState,
};
use crate::error::{Error, Result};
use crate::harness::config::{Mode, SimConfig};
use crate::harness::simulate::{corner_controls, sample_trajectory, solve_full};
use crate::harness::table::Table;
use crate::linear_phase::DampingParams;
use crate::moreau::LimitTrajectory;
use crate::ode::OdeOptions;

/// Uniform grid size for sup-norm errors against the limit.
pub const ERROR_GRID: usize = 2000;

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// usable points.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub k: f64,
    /// `sup |u_k - u∞|` over `[0, T]`.
    pub sup_error: f64,
    /// `sup |u_k|` over `[t0 + 0.1, T]`, the distance to the obtuse limit.
    pub sup_late_norm: f64,
    pub exit_time: Option<f64>,
    pub min_face_offset: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Slope of `ln sup_error` against `ln(1/√k)`.
    pub order: Option<f64>,
    /// Errors non-increasing up to 20% slack.
    pub monotone: bool,
}

pub const CONVERGENCE_COLUMNS: [&str; 6] = [
    "k",
    "sup_error",
    "sup_late_norm",
    "exit_time",
    "min_face_offset",
    "order",
];

impl ConvergenceReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(CONVERGENCE_COLUMNS);
        for r in &self.rows {
            t.push_numbers(&[
                r.k,
                r.sup_error,
                r.sup_late_norm,
                r.exit_time.unwrap_or(f64::NAN),
                r.min_face_offset.unwrap_or(f64::NAN),
                self.order.unwrap_or(f64::NAN),
            ])
            .expect("row width matches");
        }
        t
    }
}

/// Distance to the Moreau limit for each stiffness.
pub fn convergence_study(
    cfg: &SimConfig,
    k_list: &[f64],
    horizon: f64,
) -> Result<ConvergenceReport> {
    if k_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "k_list must be strictly increasing".into(),
        ));
    }
    let mut cfg = cfg.clone();
    cfg.horizon = Some(horizon);
    let cone = cfg.cone()?;
    let limit = LimitTrajectory::new(&cfg.init, &cone)?;
    let late_start = limit.t0 + 0.1;
    let mut rows = Vec::new();
    for &k in k_list {
        let sol = solve_full(&cfg, k)?;
        let mut sup_error = 0.0f64;
        let mut sup_late = 0.0f64;
        for i in 0..ERROR_GRID {
            let t = horizon * i as f64 / (ERROR_GRID - 1) as f64;
            let u = sol.state_at(t)?.1.u;
            sup_error = sup_error.max((u - limit.position(t)).norm());
            if t >= late_start {
                sup_late = sup_late.max(u.norm());
            }
        }
        let tr = sample_trajectory(&sol)?;
        rows.push(ConvergenceRow {
            k,
            sup_error,
            sup_late_norm: sup_late,
            exit_time: tr.exit_time,
            min_face_offset: tr.min_face_offset,
        });
    }
    let inv_sqrt_k: Vec<f64> = rows.iter().map(|r| 1.0 / r.k.sqrt()).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
    let order = if rows.len() >= 2 {
        fit_loglog_slope(&inv_sqrt_k, &errs)
    } else {
        None
    };
    let monotone = errs.windows(2).all(|w| w[1] <= 1.2 * w[0]);
    Ok(ConvergenceReport {
        rows,
        order,
        monotone,
    })
}

/// Scaled states at the integrator steps inside `[lo, hi]` together with
/// uniform and logarithmic refinements of that window.
fn window_states(res: &CornerResult, lo: f64, hi: f64, n: usize) -> Result<Vec<ScaledState>> {
    let hi = hi.min(res.end_tau());
    if !(hi > lo) {
        return Ok(Vec::new());
    }
    let mut taus: Vec<f64> = res
        .samples
        .iter()
        .map(|s| s.tau)
        .filter(|&t| t >= lo && t <= hi)
        .collect();
    for i in 0..=n {
        taus.push(lo + (hi - lo) * i as f64 / n as f64);
    }
    let log_lo = if lo > 0.0 { lo } else { hi * 1e-9 };
    let ratio = (hi / log_lo).powf(1.0 / n as f64);
    let mut t = log_lo;
    for _ in 0..=n {
        taus.push(t.min(hi));
        t *= ratio;
    }
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    taus.into_iter().map(|t| res.state_at(t)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRow {
    pub eta: f64,
    pub tau1: f64,
    pub tau3: f64,
    /// `max |R - R₁| / R₁` on `[0, τ1]`.
    pub first_error: f64,
    /// `max |R' - R₁'| / |R₁'|` on `[η³, τ1]`.
    pub first_rate_error: f64,
    /// `max |R - R₂| / R₂` on `[τ1, τ3]`.
    pub second_error: f64,
    /// Measured exit time (first crossing of `θ̄`), if any.
    pub tau_bar: f64,
    /// Acute corner: `τ̄ / τ̄_est`; otherwise NaN.
    pub exit_ratio: f64,
    /// Obtuse corner: `R(τ3) / R_est(τ3)`; otherwise NaN.
    pub tau3_radius_ratio: f64,
    /// Largest second-layer kernel integral on `[τ1, τ3]`.
    pub second_kernel_sup: f64,
    pub delta_numeric: f64,
    pub delta_analytic: f64,
    pub momentum_drift: f64,
    /// Largest relative increase of `F` between consecutive steps.
    pub lyapunov_max_increase: f64,
    /// `min (R' - ξ1 R)` over the steps with `τ >= τ1`.
    pub plus_margin_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub rows: Vec<AsymptoticRow>,
    pub first_order: Option<f64>,
    pub first_rate_order: Option<f64>,
    pub second_order: Option<f64>,
}

pub const ASYMPTOTIC_COLUMNS: [&str; 19] = [
    "eta",
    "tau1",
    "tau3",
    "first_error",
    "first_rate_error",
    "second_error",
    "tau_bar",
    "exit_ratio",
    "tau3_radius_ratio",
    "second_kernel_sup",
    "delta_numeric",
    "delta_analytic",
    "momentum_drift",
    "lyapunov_max_increase",
    "plus_margin_min",
    "first_order",
    "first_rate_order",
    "second_order",
    "gamma1",
];

impl AsymptoticReport {
    pub fn to_table(&self, gamma1: f64) -> Table {
        let mut t = Table::new(ASYMPTOTIC_COLUMNS);
        let o = |x: Option<f64>| x.unwrap_or(f64::NAN);
        for r in &self.rows {
            t.push_numbers(&[
                r.eta,
                r.tau1,
                r.tau3,
                r.first_error,
                r.first_rate_error,
                r.second_error,
                r.tau_bar,
                r.exit_ratio,
                r.tau3_radius_ratio,
                r.second_kernel_sup,
                r.delta_numeric,
                r.delta_analytic,
                r.momentum_drift,
                r.lyapunov_max_increase,
                r.plus_margin_min,
                o(self.first_order),
                o(self.first_rate_order),
                o(self.second_order),
                gamma1,
            ])
            .expect("row width matches");
        }
        t
    }
}

/// Largest relative increase of `F` between consecutive states.
pub fn lyapunov_max_increase(states: &[ScaledState], params: &ScaledParams) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    let mut prev: Option<f64> = None;
    for s in states {
        let f = lyapunov_f(s.r, s.dr, params.energy, params.eps)?;
        if let Some(p) = prev {
            worst = worst.max((f - p) / p);
        }
        prev = Some(f);
    }
    Ok(worst)
}

/// Scale-free parameters for one entry of an η sweep.
fn scaled_for(cfg: &SimConfig, eta: f64, damping: &DampingParams) -> Result<ScaledParams> {
    let eps = match cfg.mode {
        Some(Mode::Scaled { eps, .. }) => eps,
        _ => EpsPolicy::Derive,
    };
    ScaledParams::direct(eta, eps, &cfg.init, damping)
}

/// Compare the corner trajectory with both asymptotic layers for each η.
pub fn asymptotic_report(cfg: &SimConfig, eta_list: &[f64]) -> Result<AsymptoticReport> {
    let damping = cfg.damping()?;
    let cone = cfg.cone()?;
    let zeta = cfg.zeta_value()?;
    let mut rows = Vec::new();
    for &eta in eta_list {
        let params = scaled_for(cfg, eta, &damping)?;
        let times = asymptotic_times(eta, cfg.gamma1, zeta, &damping)?;
        let mut controls = corner_controls(cfg);
        controls.stop_at_exit = false;
        controls.horizon = Some(cfg.corner_horizon.unwrap_or(times.tau3).max(times.tau3));
        let res = integrate_corner(&params, &cone, &controls)?;
        let fa = FirstAsymptotic::new(&params);

        let mut first_error = 0.0f64;
        for s in window_states(&res, 0.0, times.tau1, 400)? {
            let r1 = fa.radius(s.tau).0;
            first_error = first_error.max((s.r - r1).abs() / r1);
        }
        let mut first_rate_error = 0.0f64;
        for s in window_states(&res, eta.powi(3), times.tau1, 400)? {
            let dr1 = fa.radius(s.tau).1;
            first_rate_error = first_rate_error.max((s.dr - dr1).abs() / dr1.abs());
        }
        let at_tau1 = res.state_at(times.tau1)?;
        let second = SecondAsymptotic::new(times.tau1, at_tau1.r, at_tau1.dr, &damping)?;
        let mut second_error = 0.0f64;
        for s in window_states(&res, times.tau1, times.tau3, 400)? {
            let r2 = second.radius(s.tau)?.0;
            second_error = second_error.max((s.r - r2).abs() / r2);
        }
        let tau_bar = res.exit_tau().unwrap_or(f64::NAN);
        let (exit_ratio, tau3_radius_ratio) = match exit_equivalents(&params, &cone, zeta)? {
            ExitEquivalents::Acute { tau_bar: est, .. } => (tau_bar / est, f64::NAN),
            ExitEquivalents::Obtuse { tau3, r, .. } => (f64::NAN, res.state_at(tau3)?.r / r),
        };
        let delta = delta_bound(&params)?;
        let plus_margin_min = res
            .samples
            .iter()
            .filter(|s| s.tau >= times.tau1)
            .map(|s| s.dr - damping.xi1() * s.r)
            .fold(f64::INFINITY, f64::min);
        rows.push(AsymptoticRow {
            eta,
            tau1: times.tau1,
            tau3: times.tau3,
            first_error,
            first_rate_error,
            second_error,
            tau_bar,
            exit_ratio,
            tau3_radius_ratio,
            second_kernel_sup: second.kernel_integral_sup(times.tau3, 120)?,
            delta_numeric: delta.numeric,
            delta_analytic: delta.analytic,
            momentum_drift: res.momentum_drift,
            lyapunov_max_increase: lyapunov_max_increase(&res.samples, &params)?,
            plus_margin_min,
        });
    }
    let etas: Vec<f64> = rows.iter().map(|r| r.eta).collect();
    let fit = |f: fn(&AsymptoticRow) -> f64| {
        let ys: Vec<f64> = rows.iter().map(f).collect();
        if rows.len() >= 2 {
            fit_loglog_slope(&etas, &ys)
        } else {
            None
        }
    };
    Ok(AsymptoticReport {
        first_order: fit(|r| r.first_error),
        first_rate_order: fit(|r| r.first_rate_error),
        second_order: fit(|r| r.second_error),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttractorReport {
    pub eta: f64,
    pub rc: f64,
    pub rbar: f64,
    pub tau3: f64,
    /// First return of `R` to `R̄` after `τ3`.
    pub tau4: Option<f64>,
    /// First time after which `|R - Rc| + |R'| < 1e-6` holds for good.
    pub settle_tau: Option<f64>,
    /// `τ3 + 20 · 2λ2`.
    pub settle_deadline: f64,
    /// Smallest instantaneous decay rate of `xᵀQx` on `[τ3, τ4]`.
    pub min_decay_rate: f64,
    /// `ln(V(τ3)/V(τ4)) / (τ4 - τ3)`.
    pub mean_decay_rate: f64,
    /// `1/(2λ2)`.
    pub predicted_rate: f64,
}

pub const SETTLE_TOL: f64 = 1e-6;

/// Long run of the radial flow with no exit, checking the approach to `Rc`
/// and the decay of the quadratic form while `R > R̄`.
pub fn attractor_study(
    params: &ScaledParams,
    zeta: f64,
    controls: &CornerControls,
) -> Result<AttractorReport> {
    let damping = params.damping;
    let lq = lyapunov_q(&damping);
    let th = trapping_threshold(params.energy, params.eps, &damping);
    let rc = critical_point(params.energy, params.eps);
    let tau3 = zeta * (1.0 / params.eta).ln();
    let settle_deadline = tau3 + 20.0 * 2.0 * lq.lambda2;
    let mut c = *controls;
    c.stop_at_exit = false;
    c.horizon = Some(c.horizon.unwrap_or(0.0).max(1.5 * settle_deadline));
    // the angle is irrelevant here; any cone will do since no exit is taken
    let cone = crate::geometry::ConeGeometry::new(std::f64::consts::FRAC_PI_2)?;
    let res = integrate_corner(params, &cone, &c)?;

    let mut settle_tau = None;
    for s in res.samples.iter().rev() {
        if (s.r - rc).abs() + s.dr.abs() < SETTLE_TOL {
            settle_tau = Some(s.tau);
        } else {
            break;
        }
    }
    let mut tau4 = None;
    for w in res.samples.windows(2) {
        if w[1].tau > tau3 && w[0].r > th.rbar && w[1].r <= th.rbar {
            tau4 = Some(w[1].tau);
            break;
        }
    }
    let mut min_rate = f64::INFINITY;
    let mut mean_rate = f64::NAN;
    if let Some(t4) = tau4 {
        let centrifugal = params.centrifugal();
        for s in res.samples.iter().filter(|s| s.tau >= tau3 && s.tau < t4) {
            min_rate = min_rate.min(lq.decay_rate(s.r, s.dr, centrifugal));
        }
        let a = res.state_at(tau3)?;
        let b = res.state_at(t4)?;
        mean_rate = (lq.form(a.r, a.dr) / lq.form(b.r, b.dr)).ln() / (t4 - tau3);
    }
    Ok(AttractorReport {
        eta: params.eta,
        rc,
        rbar: th.rbar,
        tau3,
        tau4,
        settle_tau,
        settle_deadline,
        min_decay_rate: min_rate,
        mean_decay_rate: mean_rate,
        predicted_rate: 1.0 / (2.0 * lq.lambda2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison {
    pub k: f64,
    /// `sup |u_pipe - u_oracle| / sup |u_oracle|`.
    pub position_error: f64,
    /// Same for velocities.
    pub velocity_error: f64,
    pub samples: usize,
}

/// Compare the piecewise pipeline with a direct integration of the
/// penalized problem at every pipeline sample.
pub fn oracle_comparison(cfg: &SimConfig, k: f64) -> Result<OracleComparison> {
    let sol = solve_full(cfg, k)?;
    let tr = sample_trajectory(&sol)?;
    let opts = OdeOptions {
        rtol: 1e-11,
        atol: 1e-14,
        ..OdeOptions::default()
    };
    let oracle =
        oracle_fast_time_integration(&cfg.init, &sol.damping, &sol.cone, k, sol.horizon, &opts)?;
    let (mut du, mut dv, mut nu, mut nv) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for s in &tr.samples {
        let o = oracle.state_at(s.t)?;
        du = du.max((s.u - o.u).norm());
        dv = dv.max((s.v - o.v).norm());
        nu = nu.max(o.u.norm());
        nv = nv.max(o.v.norm());
    }
    Ok(OracleComparison {
        k,
        position_error: du / nu,
        velocity_error: dv / nv,
        samples: tr.samples.len(),
    })
}

pub const PORTRAIT_COLUMNS: [&str; 5] = ["R", "dR", "field_R", "field_dR", "critical"];

/// Grid of the radial vector field `(R', R'')` plus the equilibrium row.
pub fn phase_portrait(
    energy: f64,
    eps: f64,
    damping: &DampingParams,
    r_range: (f64, f64),
    dr_range: (f64, f64),
    grid_n: usize,
) -> Result<Table> {
    if !(r_range.0 > 0.0 && r_range.1 >= r_range.0) {
        return Err(Error::InvalidInput(format!(
            "R range must be positive and ordered (got {r_range:?})"
        )));
    }
    let mut t = Table::new(PORTRAIT_COLUMNS);
    if grid_n == 0 {
        return Ok(t);
    }
    let c = energy * (1.0 - eps).powi(2);
    let alpha = damping.alpha();
    let field = |r: f64, dr: f64| c / (r * r * r) - 2.0 * alpha * dr - r;
    let at = |(a, b): (f64, f64), i: usize| {
        if grid_n == 1 {
            a
        } else {
            a + (b - a) * i as f64 / (grid_n - 1) as f64
        }
    };
    for i in 0..grid_n {
        let r = at(r_range, i);
        for j in 0..grid_n {
            let dr = at(dr_range, j);
            t.push_numbers(&[r, dr, dr, field(r, dr), 0.0])?;
        }
    }
    let rc = critical_point(energy, eps);
    t.push_numbers(&[rc, 0.0, 0.0, field(rc, 0.0), 1.0])?;
    Ok(t)
}
