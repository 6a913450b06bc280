//! Differential operators on fields over a periodic grid.

use super::{AlgebraError, AntisymmetricMatrix, SquareMatrix, Vector};
use crate::grid::{map_cells, GridSpec};

/// Discrete ∇∧X with entries ∂ᵢXⱼ − ∂ⱼXᵢ from central differences.
pub fn wedge_nabla(x: &[Vector], grid: &GridSpec) -> Result<Vec<AntisymmetricMatrix>, AlgebraError> {
    check_field(x.len(), grid)?;
    let n = grid.dim();
    if let Some(bad) = x.iter().find(|v| v.len() != n) {
        return Err(AlgebraError::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    Ok(map_cells(grid.num_cells(), |idx| {
        let jac = vector_jacobian(x, grid, idx);
        AntisymmetricMatrix(SquareMatrix::from_fn(n, |i, j| jac[(i, j)] - jac[(j, i)]))
    }))
}

/// Central-difference Jacobian with entries ∂ᵢXⱼ.
pub(crate) fn vector_jacobian(x: &[Vector], grid: &GridSpec, idx: usize) -> SquareMatrix {
    let n = grid.dim();
    let mut jac = SquareMatrix::zeros(n);
    for i in 0..n {
        let p = &x[grid.neighbor(idx, i, 1)];
        let m = &x[grid.neighbor(idx, i, -1)];
        let h2 = 2.0 * grid.spacing()[i];
        for j in 0..n {
            jac[(i, j)] = (p[j] - m[j]) / h2;
        }
    }
    jac
}

/// Antisymmetric generator G with ∂ₐΘ ≈ GΘ at one cell: the tangent
/// projection of the central difference of a rotation field.
///
/// Using G in place of the raw difference keeps every discrete derivative of
/// Θ in T_Θ, so orthonormality identities of the columns hold to rounding.
pub fn rotation_generator(theta: &[SquareMatrix], grid: &GridSpec, idx: usize, axis: usize) -> SquareMatrix {
    let p = &theta[grid.neighbor(idx, axis, 1)];
    let m = &theta[grid.neighbor(idx, axis, -1)];
    let mut d = p - m;
    d = d.scale(1.0 / (2.0 * grid.spacing()[axis]));
    (&d * &theta[idx].transpose()).skew()
}

/// Θ∇·Θ evaluated both as a matrix-vector product and as Σₖ(∇·Ωₖ)Ωₖ.
#[derive(Debug, Clone)]
pub struct ThetaDivTheta {
    pub values: Vec<Vector>,
    /// Largest difference between the two evaluations over all cells.
    pub discrepancy: f64,
    /// `discrepancy` is within 1e-12 of the field scale.
    pub consistent: bool,
}

pub fn theta_div_theta(theta: &[SquareMatrix], grid: &GridSpec) -> Result<ThetaDivTheta, AlgebraError> {
    check_field(theta.len(), grid)?;
    let n = grid.dim();
    if let Some(bad) = theta.iter().find(|t| t.dim() != n) {
        return Err(AlgebraError::DimensionMismatch {
            expected: n,
            found: bad.dim(),
        });
    }
    let per_cell = map_cells(grid.num_cells(), |idx| {
        let div = column_divergences(theta, grid, idx);
        let t = &theta[idx];
        let via_matrix = t.mul_vec(&div);
        let mut via_columns: Vector = smallvec::smallvec![0.0; n];
        for (k, dk) in div.iter().enumerate() {
            for i in 0..n {
                via_columns[i] += dk * t[(i, k)];
            }
        }
        let scale = via_matrix.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let gap = via_matrix
            .iter()
            .zip(&via_columns)
            .fold(0.0f64, |g, (a, b)| g.max((a - b).abs()))
            / scale;
        (via_matrix, gap)
    });
    let discrepancy = per_cell.iter().fold(0.0f64, |g, c| g.max(c.1));
    Ok(ThetaDivTheta {
        values: per_cell.into_iter().map(|c| c.0).collect(),
        discrepancy,
        consistent: discrepancy <= 1e-12,
    })
}

/// (∇·Θ)ₖ = ∇·Ωₖ with tangent-projected derivatives.
pub(crate) fn column_divergences(theta: &[SquareMatrix], grid: &GridSpec, idx: usize) -> Vector {
    let n = grid.dim();
    let mut div: Vector = smallvec::smallvec![0.0; n];
    for m in 0..n {
        let d = &rotation_generator(theta, grid, idx, m) * &theta[idx];
        for k in 0..n {
            div[k] += d[(m, k)];
        }
    }
    div
}

fn check_field(len: usize, grid: &GridSpec) -> Result<(), AlgebraError> {
    if len != grid.num_cells() {
        return Err(AlgebraError::DimensionMismatch {
            expected: grid.num_cells(),
            found: len,
        });
    }
    Ok(())
}
