//! The infinitely stiff limit: Moreau's anelastic impact rule.
//!
//! The particle starts on face 1 moving outward, so the rule first drops the
//! normal velocity (it slides along face 1), then at the corner either slides
//! along face 2 (acute corner) or stops (right or obtuse corner).

use crate::error::Result;
use crate::geometry::{pi1, ConeGeometry, Vec2};
use crate::linear_phase::{first_crossing_time, InitialData};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Acute,
    Obtuse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitTrajectory {
    pub t0: f64,
    pub branch: Branch,
    pub u0: Vec2,
    /// Velocity while sliding on face 1.
    pub v_pre: Vec2,
    /// Velocity after the corner.
    pub v_post: Vec2,
}

impl LimitTrajectory {
    pub fn new(init: &InitialData, cone: &ConeGeometry) -> Result<Self> {
        let t0 = first_crossing_time(init)?;
        let v_pre = pi1(Vec2::new(init.dr0, init.ds0));
        let (branch, v_post) = if cone.is_acute() {
            (Branch::Acute, cone.pi2(v_pre))
        } else {
            (Branch::Obtuse, Vec2::ZERO)
        };
        Ok(Self {
            t0,
            branch,
            u0: Vec2::new(0.0, init.s0),
            v_pre,
            v_post,
        })
    }

    /// Limit position at time `t >= 0`.
    pub fn position(&self, t: f64) -> Vec2 {
        if t <= self.t0 {
            self.u0 + t * self.v_pre
        } else {
            (t - self.t0) * self.v_post
        }
    }

    /// Limit velocity (right-continuous at the corner).
    pub fn velocity(&self, t: f64) -> Vec2 {
        if t < self.t0 {
            self.v_pre
        } else {
            self.v_post
        }
    }
}

/// `u∞(t)` for the given impact data.
pub fn limit_trajectory(init: &InitialData, cone: &ConeGeometry, t: f64) -> Result<Vec2> {
    Ok(LimitTrajectory::new(init, cone)?.position(t))
}

/// Outgoing velocity under Moreau's rule at a boundary point.
pub fn moreau_velocity_jump(v_in: Vec2, point: Vec2, cone: &ConeGeometry) -> Result<Vec2> {
    cone.tangent_cone_project(point, v_in)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn unit() -> InitialData {
        InitialData::new(-1.0, 1.0, 1.0).unwrap()
    }

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn limit_examples() {
        let acute = ConeGeometry::new(PI / 3.0).unwrap();
        let obtuse = ConeGeometry::new(2.0 * PI / 3.0).unwrap();
        assert!(close(
            limit_trajectory(&unit(), &acute, 0.5).unwrap(),
            Vec2::new(0.0, -0.5),
            1e-15
        ));
        assert!(close(
            limit_trajectory(&unit(), &acute, 2.0).unwrap(),
            Vec2::new(-0.433_012_701_892_219_3, 0.25),
            1e-12
        ));
        assert_eq!(limit_trajectory(&unit(), &obtuse, 2.0).unwrap(), Vec2::ZERO);
        let right = ConeGeometry::new(PI / 2.0).unwrap();
        assert_eq!(
            LimitTrajectory::new(&unit(), &right).unwrap().branch,
            Branch::Obtuse
        );
    }

    #[test]
    fn jump_examples() {
        let acute = ConeGeometry::new(PI / 3.0).unwrap();
        let obtuse = ConeGeometry::new(2.0 * PI / 3.0).unwrap();
        let v = moreau_velocity_jump(Vec2::new(1.0, 1.0), Vec2::new(0.0, -1.0), &acute).unwrap();
        assert_eq!(v, Vec2::new(0.0, 1.0));
        let v = moreau_velocity_jump(Vec2::new(0.0, 1.0), Vec2::ZERO, &acute).unwrap();
        assert!(close(v, Vec2::new(-0.433_012_701_892_219_3, 0.25), 1e-12));
        let v = moreau_velocity_jump(Vec2::new(0.0, 1.0), Vec2::ZERO, &obtuse).unwrap();
        assert!(close(v, Vec2::ZERO, 1e-15));
        assert!(moreau_velocity_jump(Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0), &acute).is_err());
    }

    proptest! {
        #[test]
        fn jump_never_adds_energy(t in 0.05..3.09f64, a in -3.0..3.0f64, b in -3.0..3.0f64,
                                  s in 0.0..5.0f64, which in 0usize..3) {
            let c = ConeGeometry::new(t).unwrap();
            let p = match which {
                0 => Vec2::new(0.0, -s - 0.1),
                1 => (s + 0.1) * c.face2_direction(),
                _ => Vec2::ZERO,
            };
            let v = Vec2::new(a, b);
            let out = moreau_velocity_jump(v, p, &c).unwrap();
            prop_assert!(out.norm() <= v.norm() + 1e-12);
        }

        #[test]
        fn limit_is_continuous_and_composes(t in 0.05..3.09f64, s0 in -3.0..-0.1f64,
                                            dr0 in 0.1..3.0f64, ds0 in 0.1..3.0f64) {
            let c = ConeGeometry::new(t).unwrap();
            let init = InitialData::new(s0, dr0, ds0).unwrap();
            let l = LimitTrajectory::new(&init, &c).unwrap();
            prop_assert!(l.position(l.t0).norm() <= 1e-12 * (1.0 + s0.abs()));
            prop_assert_eq!(l.v_pre.x1, 0.0);
            // sequential rule: slide on face 1, then jump at the vertex
            let first = moreau_velocity_jump(Vec2::new(dr0, ds0), Vec2::new(0.0, s0), &c).unwrap();
            let second = moreau_velocity_jump(first, Vec2::ZERO, &c).unwrap();
            prop_assert!(close(second, l.v_post, 1e-12));
            if c.is_acute() {
                prop_assert!((l.v_post.norm() - ds0 * c.cos().abs()).abs() <= 1e-12);
                prop_assert!(l.v_post.dot(c.normal2()).abs() <= 1e-12);
            }
        }
    }
}
