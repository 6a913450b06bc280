//! Continuum equations: SOHB right-hand sides, conservative relaxation
//! fluxes and sources, the 2D SOH variants and the viscous operator.

pub(crate) mod relaxation;
pub(crate) mod soh;
pub(crate) mod sohb;

use thiserror::Error;

use crate::algebra::{exp_antisym, AntisymmetricMatrix, Rotation, SquareMatrix, Vector};
use crate::grid::GridSpec;

pub use relaxation::{
    relaxation_flux, relaxation_source, soh_frame_relaxation_flux, soh_frame_relaxation_source,
    soh_relaxation_flux, soh_relaxation_source, FramePairVariant,
};
pub use soh::{curl_2d, curl_identity_defect, soh_rhs, SohRhs, SohVariant};
pub use sohb::{sohb_rhs, sohb_rhs_in_frame, sohb_rhs_omega_form, viscous_term, OmegaRhs, SohbRhs};

/// Largest ‖ΘΘᵀ − I‖_F (or |det Θ − 1|) accepted by the right-hand sides.
pub const FIELD_ROTATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("cell {cell}: Θ is not a rotation (|ΘΘᵀ - I| = {defect:e})")]
    NonRotationField { cell: usize, defect: f64 },
    #[error("cell {cell}: |v| = {norm} differs from c1")]
    NonUnitDirection { cell: usize, norm: f64 },
    #[error("cell {cell}: density {rho} is not positive")]
    NonPositiveDensity { cell: usize, rho: f64 },
    #[error("field has {found} entries, grid has {expected} cells")]
    GridMismatch { expected: usize, found: usize },
    #[error("matrix dimension {found} does not match grid dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Density and frame variable on a periodic grid. `m` holds M before
/// projection and Θ after.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub grid: GridSpec,
    pub rho: Vec<f64>,
    pub m: Vec<SquareMatrix>,
}

impl FluidState {
    pub fn new(grid: GridSpec, rho: Vec<f64>, m: Vec<SquareMatrix>) -> Result<Self, ModelError> {
        let cells = grid.num_cells();
        for len in [rho.len(), m.len()] {
            if len != cells {
                return Err(ModelError::GridMismatch {
                    expected: cells,
                    found: len,
                });
            }
        }
        if let Some(bad) = m.iter().find(|x| x.dim() != grid.dim()) {
            return Err(ModelError::DimensionMismatch {
                expected: grid.dim(),
                found: bad.dim(),
            });
        }
        Ok(Self { grid, rho, m })
    }

    pub fn uniform(grid: GridSpec, rho0: f64, theta0: &Rotation) -> Self {
        let cells = grid.num_cells();
        Self {
            rho: vec![rho0; cells],
            m: vec![theta0.matrix().clone(); cells],
            grid,
        }
    }

    /// Θ and ρ sampled from functions of the cell-centre coordinates.
    pub fn from_fn(grid: GridSpec, rho: impl Fn(&[f64]) -> f64, theta: impl Fn(&[f64]) -> SquareMatrix) -> Self {
        let (r, m) = (0..grid.num_cells())
            .map(|i| {
                let x = grid.coords(i);
                (rho(&x), theta(&x))
            })
            .unzip();
        Self { grid, rho: r, m }
    }

    /// n = 2 state Θ = R(φ(x)).
    pub fn from_angle(grid: GridSpec, rho: impl Fn(&[f64]) -> f64, angle: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, rho, |x| Rotation::planar(angle(x)).into_matrix())
    }

    /// n = 3 state Θ = exp([w(x)]ₓ).
    pub fn from_axis_angle(grid: GridSpec, rho: impl Fn(&[f64]) -> f64, w: impl Fn(&[f64]) -> [f64; 3]) -> Self {
        Self::from_fn(grid, rho, |x| Rotation::from_axis_angle(w(x)).into_matrix())
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn total_mass(&self) -> f64 {
        self.grid.integrate(&self.rho)
    }

    /// Ωₖ = Θeₖ at one cell.
    pub fn column(&self, cell: usize, k: usize) -> Vector {
        self.m[cell].column(k)
    }

    /// Checks ρ > 0 and Θ ∈ SO(n) cell-wise to [`FIELD_ROTATION_TOL`].
    pub fn check_rotation_field(&self) -> Result<(), ModelError> {
        for (cell, (r, t)) in self.rho.iter().zip(&self.m).enumerate() {
            if !(*r > 0.0) {
                return Err(ModelError::NonPositiveDensity { cell, rho: *r });
            }
            let defect = t.orthogonality_defect().max((t.determinant() - 1.0).abs());
            if !(defect <= FIELD_ROTATION_TOL) {
                return Err(ModelError::NonRotationField { cell, defect });
            }
        }
        Ok(())
    }

    pub fn max_orthogonality_defect(&self) -> f64 {
        self.m.iter().map(SquareMatrix::orthogonality_defect).fold(0.0, f64::max)
    }

    pub fn min_determinant(&self) -> f64 {
        self.m.iter().map(SquareMatrix::determinant).fold(f64::INFINITY, f64::min)
    }

    pub fn min_rho(&self) -> f64 {
        self.rho.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// 2D SOH state; `v` carries the velocity c1 Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct SohState {
    pub grid: GridSpec,
    pub rho: Vec<f64>,
    pub v: Vec<[f64; 2]>,
}

impl SohState {
    pub fn new(grid: GridSpec, rho: Vec<f64>, v: Vec<[f64; 2]>) -> Result<Self, ModelError> {
        let cells = grid.num_cells();
        if grid.dim() != 2 {
            return Err(ModelError::DimensionMismatch {
                expected: 2,
                found: grid.dim(),
            });
        }
        for len in [rho.len(), v.len()] {
            if len != cells {
                return Err(ModelError::GridMismatch {
                    expected: cells,
                    found: len,
                });
            }
        }
        Ok(Self { grid, rho, v })
    }

    /// v = c1 (cos φ, sin φ).
    pub fn from_angle(grid: GridSpec, c1: f64, rho: impl Fn(&[f64]) -> f64, angle: impl Fn(&[f64]) -> f64) -> Self {
        let (r, v) = (0..grid.num_cells())
            .map(|i| {
                let x = grid.coords(i);
                let (s, c) = angle(&x).sin_cos();
                (rho(&x), [c1 * c, c1 * s])
            })
            .unzip();
        Self { grid, rho: r, v }
    }

    pub fn total_mass(&self) -> f64 {
        self.grid.integrate(&self.rho)
    }
}

/// Two-vector state of the n = 2 frame relaxation: columns v1, v2 of M.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePairState {
    pub grid: GridSpec,
    pub rho: Vec<f64>,
    pub v1: Vec<[f64; 2]>,
    pub v2: Vec<[f64; 2]>,
}

impl FramePairState {
    pub fn from_fluid(state: &FluidState) -> Result<Self, ModelError> {
        if state.dim() != 2 {
            return Err(ModelError::DimensionMismatch {
                expected: 2,
                found: state.dim(),
            });
        }
        let col = |j: usize| state.m.iter().map(|m| [m[(0, j)], m[(1, j)]]).collect();
        Ok(Self {
            grid: state.grid.clone(),
            rho: state.rho.clone(),
            v1: col(0),
            v2: col(1),
        })
    }

    pub fn to_fluid(&self) -> FluidState {
        FluidState {
            grid: self.grid.clone(),
            rho: self.rho.clone(),
            m: self
                .v1
                .iter()
                .zip(&self.v2)
                .map(|(a, b)| SquareMatrix::from_row_slice(2, &[a[0], b[0], a[1], b[1]]).expect("2x2"))
                .collect(),
        }
    }
}

#[inline]
pub(crate) fn perp(v: [f64; 2]) -> [f64; 2] {
    [-v[1], v[0]]
}

/// exp(A)·Θ for an antisymmetric generator given as a plain matrix.
pub(crate) fn rotate_by(generator: &SquareMatrix, theta: &SquareMatrix) -> SquareMatrix {
    let r = exp_antisym(&AntisymmetricMatrix::skew_part(generator));
    r.matrix() * theta
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_validation() {
        let g = GridSpec::cube(2, 4, 1.0).unwrap();
        assert!(FluidState::new(g.clone(), vec![1.0; 3], vec![SquareMatrix::identity(2); 16]).is_err());
        let mut s = FluidState::uniform(g, 1.0, &Rotation::identity(2));
        assert!(s.check_rotation_field().is_ok());
        s.m[5] = SquareMatrix::diagonal(&[1.1, 1.0]);
        assert!(matches!(s.check_rotation_field(), Err(ModelError::NonRotationField { cell: 5, .. })));
        s.m[5] = SquareMatrix::identity(2);
        s.rho[2] = 0.0;
        assert!(matches!(s.check_rotation_field(), Err(ModelError::NonPositiveDensity { cell: 2, .. })));
    }

    #[test]
    fn frame_pair_round_trip() {
        let g = GridSpec::cube(2, 4, 1.0).unwrap();
        let s = FluidState::from_angle(g, |x| 1.0 + x[0], |x| x[1]);
        let back = FramePairState::from_fluid(&s).unwrap().to_fluid();
        assert_eq!(back, s);
    }
}
