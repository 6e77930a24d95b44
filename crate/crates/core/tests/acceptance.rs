//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use corner_penalty::asymptotics::{delta_bound, lyapunov_f, FirstAsymptotic};
use corner_penalty::corner::{integrate_corner, CornerControls, EpsPolicy, ScaledParams};
use corner_penalty::harness::studies::{
    asymptotic_report, attractor_study, convergence_study, oracle_comparison,
};
use corner_penalty::harness::SimConfig;
use corner_penalty::linear_phase::{r1_phase_state, DampingParams, InitialData};
use corner_penalty::moreau::LimitTrajectory;
use corner_penalty::{ConeGeometry, Result};

const ALPHA: f64 = 2.0;

type Criterion = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn unit() -> InitialData {
    InitialData::new(-1.0, 1.0, 1.0).unwrap()
}

fn damping() -> DampingParams {
    DampingParams::new(ALPHA).unwrap()
}

fn scaled(eta: f64) -> Result<ScaledParams> {
    ScaledParams::direct(eta, EpsPolicy::Derive, &unit(), &damping())
}

/// Fourth-order central difference.
fn deriv(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Pairs of finite-difference and closed-form values for one identity.
#[derive(Default)]
struct Check {
    diff: f64,
    scale: f64,
}

impl Check {
    fn add(&mut self, fd: f64, exact: f64) {
        self.diff = self.diff.max((fd - exact).abs());
        self.scale = self.scale.max(exact.abs());
    }

    /// `sup |fd - exact| / sup |exact|`.
    fn residual(&self) -> f64 {
        self.diff / self.scale
    }
}

fn closed_form_residuals() -> Result<Outcome> {
    let d = damping();
    let a = d.alpha();
    let mut checks: Vec<(&str, Check)> = Vec::new();
    let mut check =
        |name: &'static str, fd: f64, exact: f64| match checks.iter_mut().find(|(n, _)| *n == name)
        {
            Some((_, c)) => c.add(fd, exact),
            None => {
                let mut c = Check::default();
                c.add(fd, exact);
                checks.push((name, c));
            }
        };

    let k: f64 = 100.0;
    let sk = k.sqrt();
    let init = unit();
    let st = |t| r1_phase_state(&init, &d, k, t).unwrap();
    for i in 1..50 {
        let t = 0.02 * i as f64;
        let h = 1e-4;
        let s = st(t);
        check("r", deriv(|t| st(t).r, t, h), s.dr);
        check(
            "r'",
            deriv(|t| st(t).dr, t, h),
            -2.0 * a * sk * s.dr - k * s.r,
        );
        check("s", deriv(|t| st(t).s, t, h), s.ds);
    }

    for i in 0..100 {
        let tau = 0.05 * i as f64 + 0.01;
        let h = 1e-3;
        check("K2", deriv(|x| d.k2(x), tau, h), d.k2_dot(tau));
        check("H2", deriv(|x| d.h2(x), tau, h), d.h2_dot(tau));
        check(
            "K2'",
            deriv(|x| d.k2_dot(x), tau, h),
            -2.0 * a * d.k2_dot(tau) - d.k2(tau),
        );
        check(
            "H2'",
            deriv(|x| d.h2_dot(x), tau, h),
            -2.0 * a * d.h2_dot(tau) - d.h2(tau),
        );
    }

    let mut worst_wronskian = 0.0f64;
    for eta in [1e-2, 1e-3] {
        let fa = FirstAsymptotic::new(&scaled(eta)?);
        let h = 1e-3 * fa.kappa;
        for i in 0..100 {
            let tau = (fa.tau_vertex + fa.kappa * (-0.9 + 0.05 * i as f64)).max(0.0);
            let (r, dr) = fa.radius(tau);
            check("R1", deriv(|x| fa.radius(x).0, tau, h), dr);
            check(
                "R1'",
                deriv(|x| fa.radius(x).1, tau, h),
                fa.energy / (r * r * r),
            );
            let (z1, dz1, z2, dz2) = fa.kernel_solutions(tau);
            let pot = 3.0 * fa.energy / r.powi(4);
            check("z1", deriv(|x| fa.kernel_solutions(x).0, tau, h), dz1);
            check("z2", deriv(|x| fa.kernel_solutions(x).2, tau, h), dz2);
            check(
                "z1'",
                deriv(|x| fa.kernel_solutions(x).1, tau, h),
                -pot * z1,
            );
            check(
                "z2'",
                deriv(|x| fa.kernel_solutions(x).3, tau, h),
                -pot * z2,
            );
            worst_wronskian = worst_wronskian.max((fa.wronskian(tau) - 1.0).abs());
        }
    }
    let (name, worst) = checks
        .iter()
        .map(|(n, c)| (*n, c.residual()))
        .fold(("", 0.0f64), |acc, x| if x.1 > acc.1 { x } else { acc });
    outcome(
        worst < 1e-8 && worst_wronskian <= 1e-10,
        format!(
            "max residual {worst:.3e} ({name}, < 1e-8), max |W-1| {worst_wronskian:.3e} (<= 1e-10)"
        ),
    )
}

fn conservation() -> Result<Outcome> {
    let mut drift = 0.0f64;
    let mut rise = f64::NEG_INFINITY;
    for eta in [1e-2, 1e-3] {
        for theta in [PI / 3.0, 2.0 * PI / 3.0] {
            let p = scaled(eta)?;
            let cone = ConeGeometry::new(theta)?;
            let res = integrate_corner(&p, &cone, &CornerControls::default())?;
            drift = drift.max(res.momentum_drift);
            let fs = res
                .samples
                .iter()
                .map(|s| lyapunov_f(s.r, s.dr, p.energy, p.eps))
                .collect::<Result<Vec<_>>>()?;
            for w in fs.windows(2) {
                rise = rise.max((w[1] - w[0]) / w[0]);
            }
        }
    }
    outcome(
        drift <= 1e-8 && rise <= 1e-9,
        format!(
            "momentum drift {drift:.3e} (<= 1e-8), max relative F increase {rise:.3e} (<= 1e-9)"
        ),
    )
}

fn acute_config() -> SimConfig {
    SimConfig::new(ALPHA, PI / 3.0).unwrap()
}

fn obtuse_config() -> SimConfig {
    SimConfig::new(ALPHA, 2.0 * PI / 3.0).unwrap()
}

fn first_asymptotic() -> Result<Outcome> {
    let rep = asymptotic_report(&acute_config(), &[1e-2, 1e-3, 1e-4])?;
    let at_1e3 = rep.rows[1].first_error;
    let order = rep.first_order.unwrap_or(f64::NAN);
    outcome(
        at_1e3 <= 0.05 && order >= 0.7,
        format!(
            "errors {:.3e}/{:.3e}/{:.3e}, at 1e-3 {at_1e3:.3e} (<= 0.05), order {order:.3} (>= 0.7)",
            rep.rows[0].first_error, rep.rows[1].first_error, rep.rows[2].first_error
        ),
    )
}

fn exit_time() -> Result<Outcome> {
    let rep = asymptotic_report(&acute_config(), &[1e-3, 1e-4])?;
    let (a, b) = (rep.rows[0].exit_ratio, rep.rows[1].exit_ratio);
    outcome(
        (0.95..=1.05).contains(&a) && (0.99..=1.01).contains(&b),
        format!("ratio {a:.6} at 1e-3 (in [0.95, 1.05]), {b:.6} at 1e-4 (in [0.99, 1.01])"),
    )
}

fn second_asymptotic() -> Result<Outcome> {
    let rep = asymptotic_report(&acute_config(), &[1e-3, 1e-4])?;
    let (a, b) = (rep.rows[0].second_error, rep.rows[1].second_error);
    outcome(
        a <= 0.1 && b < a,
        format!("error {a:.3e} at 1e-3 (<= 0.1), {b:.3e} at 1e-4 (decreasing)"),
    )
}

fn attractor() -> Result<Outcome> {
    let p = scaled(1e-3)?;
    let zeta = 0.5 / damping().xi1().abs();
    let rep = attractor_study(&p, zeta, &CornerControls::default())?;
    let settled = rep.settle_tau.is_some_and(|t| t < rep.settle_deadline);
    let rate_ok = rep.min_decay_rate >= 0.9 * rep.predicted_rate;
    outcome(
        settled && rate_ok,
        format!(
            "settle tau {:?} (< {:.4}), min Q decay rate {:.4}, mean {:.4} (>= 0.9 x {:.4})",
            rep.settle_tau,
            rep.settle_deadline,
            rep.min_decay_rate,
            rep.mean_decay_rate,
            rep.predicted_rate
        ),
    )
}

fn moreau_acute() -> Result<Outcome> {
    let cfg = acute_config();
    let rep = convergence_study(&cfg, &[1e2, 1e3, 1e4], 2.0)?;
    let e: Vec<f64> = rep.rows.iter().map(|r| r.sup_error).collect();
    let monotone = e.windows(2).all(|w| w[1] < w[0]);
    let (lo, hi) = (10f64.sqrt() / 2.0, 2.0 * 10f64.sqrt());
    let ratios: Vec<f64> = e.windows(2).map(|w| w[0] / w[1]).collect();
    let ratios_ok = ratios.iter().all(|r| (lo..=hi).contains(r));
    let slope = LimitTrajectory::new(&cfg.init, &cfg.cone()?)?.v_post;
    let slope_ok = (slope.x1 + 0.433_013).abs() <= 1e-6 + 1e-12
        && (slope.x1 + 0.75f64.sqrt() / 2.0).abs() <= 1e-12
        && (slope.x2 - 0.25).abs() <= 1e-12;
    outcome(
        monotone && ratios_ok && slope_ok,
        format!(
            "sup errors {:.4e}/{:.4e}/{:.4e}, decade ratios {:.3}/{:.3} (in [{lo:.3}, {hi:.3}]), slope ({:.12}, {:.12})",
            e[0], e[1], e[2], ratios[0], ratios[1], slope.x1, slope.x2
        ),
    )
}

fn moreau_obtuse() -> Result<Outcome> {
    let rep = convergence_study(&obtuse_config(), &[1e2, 1e3, 1e4], 2.0)?;
    let s: Vec<f64> = rep.rows.iter().map(|r| r.sup_late_norm).collect();
    let decreasing = s.windows(2).all(|w| w[1] < w[0]);
    let y1_min = rep
        .rows
        .iter()
        .filter_map(|r| r.min_face_offset)
        .fold(f64::INFINITY, f64::min);
    outcome(
        decreasing && y1_min >= -1e-12,
        format!(
            "sup over [1.1, 2] {:.4e}/{:.4e}/{:.4e} (decreasing), min y1 {y1_min:.3e} (>= -1e-12)",
            s[0], s[1], s[2]
        ),
    )
}

fn kernel_and_delta() -> Result<Outcome> {
    let mut k_min = f64::INFINITY;
    let mut deltas = Vec::new();
    let mut bound = f64::INFINITY;
    for eta in [1e-2, 1e-3] {
        let p = scaled(eta)?;
        let fa = FirstAsymptotic::new(&p);
        for i in 0..=200 {
            let tau = 0.1 * i as f64 / 200.0;
            for j in 0..=i {
                let sigma = 0.1 * j as f64 / 200.0;
                k_min = k_min.min(fa.kernel_k(tau, sigma));
            }
        }
        deltas.push(delta_bound(&p)?.numeric);
        bound = bound.min(4.0 / p.energy);
    }
    let spread = (deltas[0] - deltas[1]).abs() / deltas[0].max(deltas[1]);
    outcome(
        k_min >= 0.0 && deltas.iter().all(|&d| d <= bound) && spread < 0.05,
        format!(
            "min K {k_min:.3e} (>= 0), delta {:.6}/{:.6} (<= {bound:.3}), spread {:.3e} (< 0.05)",
            deltas[0], deltas[1], spread
        ),
    )
}

fn oracle_equivalence() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for cfg in [acute_config(), obtuse_config()] {
        for k in [100.0, 400.0] {
            let c = oracle_comparison(&cfg, k)?;
            let e = c.position_error.max(c.velocity_error);
            worst = worst.max(e);
            parts.push(format!("{e:.2e}"));
        }
    }
    outcome(
        worst <= 1e-4,
        format!("relative sup errors {} (<= 1e-4)", parts.join("/")),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("closed-form residuals", closed_form_residuals),
        ("conservation", conservation),
        ("first asymptotic", first_asymptotic),
        ("exit time", exit_time),
        ("second asymptotic", second_asymptotic),
        ("attractor", attractor),
        ("moreau acute", moreau_acute),
        ("moreau obtuse", moreau_obtuse),
        ("kernel and delta", kernel_and_delta),
        ("oracle equivalence", oracle_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} {:>2} {name}: {detail} [{secs:.2}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1
        );
        if !pass {
            failed += 1;
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
