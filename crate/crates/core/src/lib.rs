//! Equilibria of second-gradient elastic surfaces on rectangular patches.
//!
//! The crate discretizes deformations f: Ω ⊂ R² → R³ of a flat rectangular
//! reference patch on a structured node-centered grid, evaluates a stored
//! energy with membrane, bending and orientation-barrier parts, minimizes the
//! total potential under clamped, pinned or free edge conditions, and then
//! interrogates the computed state: gradient and weak-form consistency,
//! standing-hypothesis checks on the density, and a conservative lower bound
//! on the area Jacobian J = sqrt(det FᵀF) away from zero.
//!
//! Modules mirror the pipeline:
//! - [`kinematics`]: pointwise surface kinematics derived from (F, G)
//! - [`energy`]: stored-energy density, its gradients, model validators
//! - [`discretization`]: grids, boundary data, quadrature, assembly
//! - [`solver`]: limited-memory descent with feasibility-first line search
//! - [`analysis`]: weak residuals and the Jacobian lower-bound estimate
//! - [`config`]: JSON run configuration mapped onto problem objects
//! - [`io`]: VTK / CSV / JSON artifact writers

pub mod analysis;
pub mod config;
pub mod discretization;
pub mod energy;
mod error;
pub mod io;
pub mod kinematics;
pub mod sampling;
pub mod solver;

pub use error::Error;
