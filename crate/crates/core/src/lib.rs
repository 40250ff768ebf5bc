//! Optimal shallow containers for sloshing with and without surface tension.
//!
//! - [`specfun`]: modified Bessel and Struve functions, a fixed `2F3`, `upsilon`, `d_0`
//! - [`shapes`]: closed-form maximal frequencies and optimal depth profiles
//! - [`admissible`]: depth profiles with prescribed area or volume
//! - [`eigensolver`]: finite-difference fundamental sloshing mode
//! - [`verify`]: sweeps, slope fits and property checks

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissible;
pub mod bond;
pub mod eigensolver;
pub mod shapes;
pub mod specfun;
pub mod verify;

pub use admissible::{Geometry, ShapeSamples};
pub use bond::BondNumber;
pub use eigensolver::{EigenResult, SloshOperator};
pub use shapes::{CanalCase, Case, OptimalSolution, RadialCase};
