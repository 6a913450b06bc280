//! Time integration: the conservative relaxation step with projection, the
//! exact homogeneous relaxation, the direct smooth scheme and viscous
//! stepping.

mod direct;
mod fv;
mod relax;
mod run;
mod splitting;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::model::ModelError;

pub use direct::{
    direct_smooth_advance, direct_time_step, diffusion_limit, pure_viscous_advance, soh_direct_advance, viscous_advance,
};
pub use relax::{relax_matrix_exact, relax_ode_exact, RelaxOdeSolution};
pub use run::{advance, run, stable_time_step, RunAbort};
pub use splitting::{
    conservative_step, frame_pair_splitting_advance, projection_step, relaxation_wave_speed, relaxed_advance,
    soh_splitting_advance, splitting_advance,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("time step {dt:e} exceeds the CFL limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("time step {dt:e} exceeds the explicit diffusion limit {limit:e}")]
    DiffusionCflViolation { dt: f64, limit: f64 },
    #[error("cell {cell}: density {rho} is not positive")]
    NegativeDensity { cell: usize, rho: f64 },
    #[error("cell {cell}: det M = {det:e} is not positive")]
    NonPositiveDeterminant { cell: usize, det: f64 },
    #[error("cell {cell}: polar decomposition failed")]
    SingularProjection { cell: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl SolverError {
    /// The failing cell, when the error is local.
    pub fn cell(&self) -> Option<usize> {
        match self {
            SolverError::NegativeDensity { cell, .. }
            | SolverError::NonPositiveDeterminant { cell, .. }
            | SolverError::SingularProjection { cell } => Some(*cell),
            SolverError::Model(
                ModelError::NonRotationField { cell, .. }
                | ModelError::NonUnitDirection { cell, .. }
                | ModelError::NonPositiveDensity { cell, .. },
            ) => Some(*cell),
            _ => None,
        }
    }
}

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(format!(
                        "unknown value '{}', expected one of: {}",
                        s,
                        [$($text),+].join(", ")
                    )),
                }
            }
        }
    };
}

keyword_enum!(Scheme {
    SplittingRelaxation => "splitting_relaxation",
    DirectSmooth => "direct_smooth",
    ViscousDirect => "viscous_direct",
});

keyword_enum!(FluxKind {
    Rusanov => "rusanov",
});

keyword_enum!(TimeIntegrator {
    ForwardEuler => "forward_euler",
    SspRk2 => "ssp_rk2",
});

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub cfl: f64,
    pub flux: FluxKind,
    pub time_integrator: TimeIntegrator,
    pub t_end: f64,
    pub snapshot_interval: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::SplittingRelaxation,
            cfl: 0.5,
            flux: FluxKind::Rusanov,
            time_integrator: TimeIntegrator::SspRk2,
            t_end: 1.0,
            snapshot_interval: 0.0,
        }
    }
}

impl SchemeConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            v.push(format!("cfl in (0, 1] required (cfl = {})", self.cfl));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            v.push(format!("t_end > 0 required (t_end = {})", self.t_end));
        }
        if !(self.snapshot_interval >= 0.0 && self.snapshot_interval.is_finite()) {
            v.push(format!("snapshot_interval >= 0 required (snapshot_interval = {})", self.snapshot_interval));
        }
        v
    }
}
