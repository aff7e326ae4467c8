//! Numerical simulation of anisotropic multiphase motion by weighted mean
//! curvature for vapor-liquid-substrate wetting and dewetting problems on a
//! periodic 2D grid.
//!
//! The solver evolves the liquid phase by a vectorial median filter applied
//! to level-set functions: each step convolves against kernels concentrated
//! on circles (constructed from the surface tension / mobility pair of each
//! interface), with a Lagrange multiplier enforcing exact area conservation.
//! Companion modules provide a comparison threshold-dynamics stepper, a
//! front-tracking reference integrator, equilibrium (Wulff / Winterbottom)
//! shape construction, and convergence measurement utilities.

pub mod anisotropy;
pub mod error;
pub mod fields;
pub mod fronttrack;
pub mod geom;
pub mod harness;
pub mod kernels;
pub mod metrics;
pub mod threshold_dynamics;
pub mod vls_stepper;

pub use anisotropy::{AnisotropyFn, MobilityFn, SurfaceTensionTriple};
pub use error::{Error, Result};
pub use geom::{Polyline, Vec2};
pub use kernels::{CircleKernel, InterfaceLabel, Stencil, StencilSet};
