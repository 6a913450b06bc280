//! Self-organized hydrodynamics of rigid bodies: linear analysis, the
//! conservative relaxation system, direct schemes and dimensional reduction.

pub mod algebra;
pub mod grid;
pub mod lin_analysis;
pub mod model;
pub mod solver;
pub mod reduction;
pub mod io;
#[cfg(feature = "cli")]
pub mod cli;
