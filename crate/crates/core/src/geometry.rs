//! The angular constraint set K, its exterior regions, and the projections
//! used by the penalty force and by Moreau's impact rule.
//!
//! K is the closed convex cone bounded by face 1 (the ray `x1 = 0, x2 <= 0`)
//! and face 2 (the ray along `(-sin θ̄, cos θ̄)`). Its outward unit normals
//! are `(1, 0)` and `(cos θ̄, sin θ̄)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{ensure_finite, Error, Result};

/// Absolute distance below which a boundary point counts as the vertex.
pub const VERTEX_TOL: f64 = 1e-12;
/// Relative tolerance for a point to count as lying on a face line.
pub const FACE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x1: f64,
    pub x2: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x1: 0.0, x2: 0.0 };

    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x1, -self.x2)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x1, self * v.x2)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x1, self.x2)
    }
}

/// Which piece of the plane a point lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// The admissible set itself.
    K,
    /// Outside face 1 only: `x1 >= 0, x2 <= 0`.
    R1,
    /// The polar cone, projected onto the vertex.
    R2,
    /// Outside face 2 only.
    R3,
}

/// Boundary feature of K a point sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryFeature {
    Face1,
    Face2,
    Vertex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeGeometry {
    theta_bar: f64,
    sin: f64,
    cos: f64,
}

impl ConeGeometry {
    pub fn new(theta_bar: f64) -> Result<Self> {
        if !(theta_bar.is_finite() && theta_bar > 0.0 && theta_bar < std::f64::consts::PI) {
            return Err(Error::InvalidInput(format!(
                "theta_bar must lie in (0, pi) (got {theta_bar})"
            )));
        }
        let (sin, cos) = theta_bar.sin_cos();
        Ok(Self {
            theta_bar,
            sin,
            cos,
        })
    }

    pub fn theta_bar(&self) -> f64 {
        self.theta_bar
    }

    pub fn sin(&self) -> f64 {
        self.sin
    }

    pub fn cos(&self) -> f64 {
        self.cos
    }

    pub fn is_acute(&self) -> bool {
        self.theta_bar < std::f64::consts::FRAC_PI_2
    }

    pub fn normal1(&self) -> Vec2 {
        Vec2::new(1.0, 0.0)
    }

    pub fn normal2(&self) -> Vec2 {
        Vec2::new(self.cos, self.sin)
    }

    /// Unit direction of face 2, pointing away from the vertex.
    pub fn face2_direction(&self) -> Vec2 {
        Vec2::new(-self.sin, self.cos)
    }

    /// Classify a point; shared boundaries go to the first of K, R1, R2, R3
    /// whose inequalities hold.
    pub fn classify_region(&self, p: Vec2) -> Result<Region> {
        ensure_finite("point", &[p.x1, p.x2])?;
        let along2 = p.x1 * self.cos + p.x2 * self.sin;
        let across2 = -p.x1 * self.sin + p.x2 * self.cos;
        if p.x1 <= 0.0 && along2 <= 0.0 {
            Ok(Region::K)
        } else if p.x1 >= 0.0 && p.x2 <= 0.0 {
            Ok(Region::R1)
        } else if p.x2 >= 0.0 && across2 <= 0.0 {
            Ok(Region::R2)
        } else if along2 >= 0.0 && across2 >= 0.0 {
            Ok(Region::R3)
        } else {
            // Rounding can leave a point just outside every closed region;
            // fall back to the polar angle.
            Ok(self.classify_by_angle(p))
        }
    }

    fn classify_by_angle(&self, p: Vec2) -> Region {
        use std::f64::consts::{FRAC_PI_2, PI};
        let mut phi = p.x2.atan2(p.x1);
        if phi < -FRAC_PI_2 {
            phi += 2.0 * PI;
        }
        if phi <= 0.0 {
            Region::R1
        } else if phi <= self.theta_bar {
            Region::R2
        } else if phi <= self.theta_bar + FRAC_PI_2 {
            Region::R3
        } else {
            Region::K
        }
    }

    fn project_in(&self, p: Vec2, region: Region) -> Vec2 {
        match region {
            Region::K => p,
            Region::R1 => Vec2::new(0.0, p.x2),
            Region::R2 => Vec2::ZERO,
            Region::R3 => {
                let d = self.face2_direction();
                p.dot(d) * d
            }
        }
    }

    /// Euclidean projection onto K.
    pub fn project_onto_cone(&self, p: Vec2) -> Result<Vec2> {
        let region = self.classify_region(p)?;
        Ok(self.project_in(p, region))
    }

    /// Unit outward direction `(u - P_K u)/|u - P_K u|`, zero inside K.
    pub fn penalty_direction(&self, u: Vec2) -> Result<Vec2> {
        let w = u - self.project_onto_cone(u)?;
        let n = w.norm();
        if n == 0.0 {
            Ok(Vec2::ZERO)
        } else {
            Ok((1.0 / n) * w)
        }
    }

    /// The damping term G(u, v): the component of `v` along `u - P_K u`.
    pub fn damping_force(&self, u: Vec2, v: Vec2) -> Result<Vec2> {
        ensure_finite("velocity", &[v.x1, v.x2])?;
        let w = u - self.project_onto_cone(u)?;
        let n2 = w.dot(w);
        if n2 == 0.0 {
            Ok(Vec2::ZERO)
        } else {
            Ok((v.dot(w) / n2) * w)
        }
    }

    /// Spring displacement `u - P_K u` and damping term `G(u, v)` using the
    /// formulas of a fixed region. Inside that region they coincide with
    /// the general ones, but they stay smooth up to its boundary, which a
    /// Runge–Kutta stage may straddle.
    pub(crate) fn region_forces(&self, u: Vec2, v: Vec2, region: Region) -> (Vec2, Vec2) {
        let along = |n: Vec2| (u.dot(n) * n, v.dot(n) * n);
        match region {
            Region::K => (Vec2::ZERO, Vec2::ZERO),
            Region::R1 => along(self.normal1()),
            Region::R3 => along(self.normal2()),
            Region::R2 => {
                let n2 = u.dot(u);
                if n2 == 0.0 {
                    (Vec2::ZERO, Vec2::ZERO)
                } else {
                    (u, (v.dot(u) / n2) * u)
                }
            }
        }
    }

    /// Signed margins of `p` against the closed inequalities defining
    /// `region` (all non-negative inside).
    pub(crate) fn region_margin(&self, p: Vec2, region: Region) -> f64 {
        let along2 = p.dot(self.normal2());
        let across2 = p.dot(self.face2_direction());
        match region {
            Region::K => (-p.x1).min(-along2),
            Region::R1 => p.x1.min(-p.x2),
            Region::R2 => p.x2.min(-across2),
            Region::R3 => along2.min(across2),
        }
    }

    /// Orthogonal projection onto the face-2 line `x1 cos θ̄ + x2 sin θ̄ = 0`.
    pub fn pi2(&self, v: Vec2) -> Vec2 {
        let d = self.face2_direction();
        v.dot(d) * d
    }

    /// Locate `p` on the boundary of K.
    pub fn boundary_feature(&self, p: Vec2) -> Result<BoundaryFeature> {
        ensure_finite("point", &[p.x1, p.x2])?;
        let scale = 1.0 + p.norm();
        if p.norm() <= VERTEX_TOL {
            return Ok(BoundaryFeature::Vertex);
        }
        if p.x1.abs() <= FACE_TOL * scale && p.x2 < 0.0 {
            return Ok(BoundaryFeature::Face1);
        }
        let on_line2 = p.dot(self.normal2()).abs() <= FACE_TOL * scale;
        if on_line2 && p.dot(self.face2_direction()) > 0.0 {
            return Ok(BoundaryFeature::Face2);
        }
        Err(Error::NotOnBoundary(p.x1, p.x2))
    }

    /// Projection of `v` onto the tangent cone of K at the boundary point `p`.
    ///
    /// On a face interior the tangent cone is a half-plane, so an outgoing
    /// velocity loses its normal component (`pi1`/`pi2`) and an incoming one
    /// is left alone. At the vertex the tangent cone is K itself.
    pub fn tangent_cone_project(&self, p: Vec2, v: Vec2) -> Result<Vec2> {
        ensure_finite("velocity", &[v.x1, v.x2])?;
        match self.boundary_feature(p)? {
            BoundaryFeature::Face1 => Ok(Vec2::new(v.x1.min(0.0), v.x2)),
            BoundaryFeature::Face2 => {
                let n = self.normal2();
                let vn = v.dot(n);
                if vn > 0.0 {
                    Ok(self.pi2(v))
                } else {
                    Ok(v)
                }
            }
            BoundaryFeature::Vertex => self.project_onto_cone(v),
        }
    }
}

/// Orthogonal projection onto the face-1 line `x1 = 0`.
pub fn pi1(v: Vec2) -> Vec2 {
    Vec2::new(0.0, v.x2)
}
