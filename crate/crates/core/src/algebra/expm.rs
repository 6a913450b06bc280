use super::{AntisymmetricMatrix, Rotation, SquareMatrix};

/// exp(A) for antisymmetric A by scaling and squaring a truncated Taylor
/// series. The series is cut once a term drops below 1e-17 relative to the
/// identity, well inside the 1e-13 error budget.
pub fn exp_antisym(a: &AntisymmetricMatrix) -> Rotation {
    Rotation::new_unchecked(expm(a.matrix()))
}

pub(crate) fn expm(a: &SquareMatrix) -> SquareMatrix {
    let n = a.dim();
    let norm = a.frobenius_norm();
    if norm == 0.0 {
        return SquareMatrix::identity(n);
    }
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.25 {
        scaled_norm *= 0.5;
        squarings += 1;
    }
    let x = a.scale(0.5f64.powi(squarings as i32));

    let mut result = SquareMatrix::identity(n);
    let mut term = SquareMatrix::identity(n);
    for k in 1..=30 {
        term = (&term * &x).scale(1.0 / k as f64);
        result.axpy(1.0, &term);
        if term.max_abs() < 1e-17 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}
