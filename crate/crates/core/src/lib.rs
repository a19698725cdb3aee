//! Exact Riemann solvers and finite-volume schemes for Maxwell's equations in
//! an instantaneous Kerr medium.
//!
//! * [`constitutive`]: the cubic constitutive law and derived quantities.
//! * [`wavecurves`]: scalar wave functions shared by both exact solvers.
//! * [`riemann66`]: the full-vector 6×6 Riemann problem.
//! * [`riemann_tm`]: the transverse-magnetic 3×3 Riemann problem with
//!   Liu-admissible composite waves.
//! * [`fv`]: Godunov/MUSCL finite-volume engine on Cartesian grids.
//! * [`relax_kd`]: the relaxed Kerr–Debye interface flux.
//! * [`scenarios`]: experiment configs, runs, norms and CSV output.

pub mod constitutive;
pub mod error;
pub mod fv;
pub mod numerics;
pub mod relax_kd;
pub mod riemann66;
pub mod riemann_tm;
pub mod scenarios;
pub mod vector;
pub mod wavecurves;

pub use constitutive::{MaterialParams, State66, StateTM};
pub use error::{KerrError, Result};
pub use vector::{Vec2, Vec3};
