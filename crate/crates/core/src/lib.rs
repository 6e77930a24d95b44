//! Over-damped penalty approximation of a particle hitting the corner of an
//! angular domain, its matched asymptotics, and the Moreau limit it
//! converges to.
//!
//! The motion is split into three phases: a spring phase on face 1 with a
//! closed form, a corner phase integrated in scaled polar variables, and a
//! spring phase on face 2 with a closed form again. [`harness`] stitches
//! them together and runs the convergence and asymptotic studies.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod corner;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linear_phase;
pub mod moreau;
pub mod ode;

pub use error::{Error, Result};
pub use geometry::{ConeGeometry, Region, Vec2};
pub use linear_phase::{DampingParams, InitialData};
