//! Entropy-stable nodal discontinuous Galerkin discretization of resistive GLM-MHD
//! with entropy-consistent no-slip wall boundary conditions.

pub mod cli;
pub mod config;
pub mod entropy_audit;
pub mod error;
pub mod fluxes;
pub mod mms;
pub mod refsol;
pub mod sbp;
pub mod solver1d;
pub mod thermo;
pub mod wall_bc;

pub use error::{Error, Result};
pub use fluxes::{DissParams, GlmParams, PrimGradient};
pub use sbp::{build_sbp, SbpOperator};
pub use solver1d::{Boundary, Mesh1D, Physics, Solver};
pub use thermo::{ConsState, EntropyVars, GasParams, Mat9, PrimState, Vec3, Vec9};
pub use wall_bc::{BoundaryFace, HeatFlux, InletSpec, MagneticWall, WallSpec};
