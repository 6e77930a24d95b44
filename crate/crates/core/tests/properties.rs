use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::{Matrix2, SymmetricEigen};
use proptest::prelude::*;

use corner_penalty::asymptotics::{
    asymptotic_times, critical_point, lyapunov_f, lyapunov_q, FirstAsymptotic,
};
use corner_penalty::corner::{
    integrate_corner, radial_rhs, CornerControls, EpsPolicy, ScaledParams, ScaledState,
};
use corner_penalty::harness::simulate::{sample_trajectory, solve_full};
use corner_penalty::harness::SimConfig;
use corner_penalty::{ConeGeometry, DampingParams, InitialData, Vec2};

#[test]
fn lyapunov_matrix_solves_the_equation() {
    for alpha in [1.1, 1.25, 2.0, 5.0] {
        let d = DampingParams::new(alpha).unwrap();
        let l = lyapunov_q(&d);
        let q = Matrix2::new(l.q[0][0], l.q[0][1], l.q[1][0], l.q[1][1]);
        let m = Matrix2::new(0.0, 1.0, -1.0, -2.0 * alpha);
        let lhs = m.transpose() * q + q * m;
        assert_relative_eq!(lhs, -Matrix2::identity(), epsilon = 1e-12);
        let eig = SymmetricEigen::new(q).eigenvalues;
        let (lo, hi) = (eig.min(), eig.max());
        assert_relative_eq!(lo, l.lambda1, max_relative = 1e-12);
        assert_relative_eq!(hi, l.lambda2, max_relative = 1e-12);
    }
}

#[test]
fn radial_flow_fixed_point() {
    let d = DampingParams::new(2.0).unwrap();
    let p = ScaledParams::direct(
        1e-3,
        EpsPolicy::Value(0.5),
        &InitialData::new(-1.0, 1.0, 1.0).unwrap(),
        &d,
    )
    .unwrap();
    let rc = critical_point(p.energy, p.eps);
    let s = ScaledState {
        tau: 0.0,
        r: rc,
        dr: 0.0,
        theta: 0.0,
    };
    let (dr, ddr, _) = radial_rhs(&s, &p).unwrap();
    assert_eq!(dr, 0.0);
    assert!(ddr.abs() < 1e-15);
}

fn init_strategy() -> impl Strategy<Value = InitialData> {
    (-2.0..-0.2f64, 0.2..2.0f64, 0.2..2.0f64)
        .prop_map(|(s0, dr0, ds0)| InitialData::new(s0, dr0, ds0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn corner_phase_invariants(init in init_strategy(), alpha in 1.2..4.0f64,
                               log_eta in -4.0..-2.0f64, theta in 0.3..2.8f64) {
        let d = DampingParams::new(alpha).unwrap();
        let p = ScaledParams::direct(10f64.powf(log_eta), EpsPolicy::Derive, &init, &d).unwrap();
        let cone = ConeGeometry::new(theta).unwrap();
        let res = integrate_corner(&p, &cone, &CornerControls::default()).unwrap();
        prop_assert!(res.momentum_drift <= 1e-8);
        let mut prev = f64::INFINITY;
        for s in &res.samples {
            let f = lyapunov_f(s.r, s.dr, p.energy, p.eps).unwrap();
            prop_assert!(f <= prev * (1.0 + 1e-9));
            prop_assert!(s.r > 0.0);
            prop_assert!(s.theta <= theta + 1e-9);
            prev = f;
        }
        prop_assert!(res.samples.windows(2).all(|w| w[1].tau > w[0].tau));
    }

    #[test]
    fn first_layer_identities(init in init_strategy(), log_eta in -5.0..-1.5f64, x in -3.0..3.0f64) {
        let d = DampingParams::new(2.0).unwrap();
        let p = ScaledParams::direct(10f64.powf(log_eta), EpsPolicy::Derive, &init, &d).unwrap();
        let fa = FirstAsymptotic::new(&p);
        let tau = (fa.tau_vertex + x * fa.kappa).max(0.0);
        prop_assert!((fa.wronskian(tau) - 1.0).abs() <= 1e-10);
        let (r, _) = fa.radius(tau);
        prop_assert!((fa.kernel_j(tau, tau) - r * r).abs() <= 1e-12 * r * r);
        let (r0, dr0) = fa.radius(0.0);
        prop_assert!((r0 - p.r_init).abs() <= 1e-12 * p.r_init);
        prop_assert!((dr0 - p.dr_init).abs() <= 1e-10 * p.dr_init.abs().max(r0));
        prop_assert!(fa.angle(0.0).abs() <= 1e-15);
    }

    #[test]
    fn layer_times_are_ordered(alpha in 1.1..5.0f64, log_eta in -8.0..-2.0f64, gamma1 in 1.01..1.33f64,
                               frac in 0.05..0.95f64) {
        let d = DampingParams::new(alpha).unwrap();
        let zeta = frac / d.xi1().abs();
        let eta = 10f64.powf(log_eta);
        let t = asymptotic_times(eta, gamma1, zeta, &d).unwrap();
        prop_assert!(t.tau1 > 0.0 && t.tau1 < t.tau3);
    }

    #[test]
    fn trajectory_is_continuous_and_ordered(log_k in 2.0..3.5f64, theta in 0.4..2.7f64, s0 in -1.5..-0.5f64) {
        let mut cfg = SimConfig::new(2.0, theta).unwrap();
        cfg.init = InitialData::new(s0, 1.0, 1.0).unwrap();
        cfg.horizon = Some(3.0 * -s0);
        let sol = solve_full(&cfg, 10f64.powf(log_k)).unwrap();
        let tr = sample_trajectory(&sol).unwrap();
        prop_assert!(tr.samples.windows(2).all(|w| w[1].t > w[0].t));
        let mut phases: Vec<_> = tr.samples.iter().map(|s| s.phase).collect();
        phases.dedup();
        prop_assert!(phases.len() <= 3);
        for j in &tr.position_jumps {
            prop_assert!(*j < 1e-10);
        }
        if let Some(y1) = tr.min_face_offset {
            prop_assert!(y1 >= -1e-12);
        }
        let cone = ConeGeometry::new(theta).unwrap();
        let end = tr.samples.last().unwrap();
        prop_assert!(end.u.is_finite() && end.v.is_finite());
        if !cone.is_acute() {
            prop_assert!(end.u.norm() < Vec2::new(0.0, s0).norm());
        }
    }
}

#[test]
fn obtuse_runs_come_to_rest_near_vertex() {
    let cfg = SimConfig::new(2.0, 2.0 * PI / 3.0).unwrap();
    let sol = solve_full(&cfg, 1e3).unwrap();
    let (_, s) = sol.state_at(2.0).unwrap();
    assert!(s.u.norm() < 1e-2);
}
